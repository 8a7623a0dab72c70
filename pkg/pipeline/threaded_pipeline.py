"""
Threaded branch pipeline.

Design goals:
- The main thread walks the error-free path and hands every forked branch
  to a bounded queue, so at most a few ensemble copies wait at a time.
- Each worker walks its branches into a private sink; sinks are merged once
  at the end, so no lock is held while simulating.
- Numpy kernels release the GIL, which is where the threads overlap.
"""

from __future__ import annotations

import logging
import queue
import threading
from dataclasses import dataclass
from typing import Any, Callable, List, Optional, Tuple

from constants import WORKER_QUEUE_DEPTH
from errors import ConfigError
from statevec import Ensemble

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BranchTask:
    """One forked branch: continue ops[start:] from `ensemble`."""

    start: int
    ensemble: Ensemble
    budget: int
    key: Tuple[int, int, int]


@dataclass(frozen=True)
class WorkerPacket:
    """Everything one worker produced."""

    worker: int
    sink: Any
    tasks_done: int


class BranchWorker(threading.Thread):
    """
    Worker thread: consumes BranchTasks until stopped and the queue is drained.
    The first exception is kept and re-raised by ThreadedPipeline.finish().
    """

    def __init__(
        self,
        index: int,
        in_queue: "queue.Queue[BranchTask]",
        run_task: Callable[[BranchTask, Any], None],
        sink: Any,
    ):
        super().__init__(daemon=True, name=f"branch-worker-{index}")
        self.index = index
        self.in_queue = in_queue
        self.run_task = run_task
        self.sink = sink
        self.tasks_done = 0
        self.error: Optional[BaseException] = None
        self._stop_event = threading.Event()

    def run(self) -> None:
        while not (self._stop_event.is_set() and self.in_queue.empty()):
            try:
                task = self.in_queue.get(timeout=0.2)
            except queue.Empty:
                continue
            try:
                if self.error is None:
                    self.run_task(task, self.sink)
                    self.tasks_done += 1
            except BaseException as exc:  # re-raised in the main thread
                self.error = exc
                logger.error("%s failed: %s", self.name, exc)
            finally:
                self.in_queue.task_done()

    def stop(self) -> None:
        self._stop_event.set()


class ThreadedPipeline:
    """
    Convenience wrapper to manage the worker threads of one engine run.
    """

    def __init__(self, workers: int, run_task: Callable[[BranchTask, Any], None], make_sink: Callable[[], Any]):
        if workers < 1:
            raise ConfigError(f"worker count must be at least 1, got {workers}")
        self._queue: "queue.Queue[BranchTask]" = queue.Queue(maxsize=WORKER_QUEUE_DEPTH * workers)
        self.workers = [BranchWorker(i, self._queue, run_task, make_sink()) for i in range(workers)]
        self._started = False

    def start(self) -> None:
        for worker in self.workers:
            worker.start()
        self._started = True
        logger.debug("started %d branch workers", len(self.workers))

    def submit(self, start: int, ensemble: Ensemble, budget: int, key: Tuple[int, int, int]) -> None:
        """Queue one branch; blocks while the queue is full."""
        if not self._started:
            raise RuntimeError("pipeline not started")
        self._queue.put(BranchTask(start, ensemble, budget, key))

    def finish(self) -> List[WorkerPacket]:
        """Wait for every queued branch, stop the workers and collect their sinks."""
        if self._started:
            self._queue.join()
        for worker in self.workers:
            worker.stop()
        for worker in self.workers:
            worker.join(timeout=1.0)
        for worker in self.workers:
            if worker.error is not None:
                raise worker.error
        return [WorkerPacket(w.index, w.sink, w.tasks_done) for w in self.workers]
