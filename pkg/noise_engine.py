"""
Perturbative Pauli-noise engine.

Every noisy qubit slot suffers x, y or z with probabilities px, py, pz and is
left alone with p0 = 1 - px - py - pz. The engine expands a circuit into all
insertions of at most K Pauli factors and simulates each one exactly:

    rho(p) = sum over insertions of  px^nx py^ny pz^nz p0^(S - n) rho_insertion

where S is the number of noisy slots before the observation point and
n = nx + ny + nz. Branches are walked depth first; the error-free prefix is
simulated once and each insertion only re-runs the suffix after it.

Per-branch numbers are grouped by (nx, ny, nz) and reduced with math.fsum,
which is exactly rounded, so results do not depend on branch order or on
the number of workers.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from circuit import TARGET_PROBE, TARGET_VIEW, NoisyCircuit
from constants import DEFAULT_WORKERS, MAX_ORDER, PAULI_LABELS, PROGRESS_LOG_EVERY
from errors import ConfigError, InvalidPostSelectionError, OrderTooHighError
from errpoly import CONSTANT, ErrorPoly, PolyMatrix, poly_div_series
from ops.base import BaseOp
from ops.ideal_ops import ProbeOp
from pipeline.threaded_pipeline import BranchTask, ThreadedPipeline
from statevec import Ensemble
from utils import Stopwatch

logger = logging.getLogger(__name__)

Key = Tuple[int, int, int]
NO_ERRORS: Key = (0, 0, 0)

# Masses below this are a rejected noiseless run, not a small acceptance.
_ACCEPTANCE_FLOOR = 1e-14


def check_order(order: int) -> int:
    if order > MAX_ORDER:
        raise OrderTooHighError(f"order {order} requested; at most {MAX_ORDER} is supported")
    if order < 0:
        raise ConfigError(f"order must be non-negative, got {order}")
    return int(order)


# -----------------------------
# Insertions
# -----------------------------
@lru_cache(maxsize=None)
def location_insertions(arity: int, budget: int) -> Tuple[Tuple[Tuple[str, ...], Key, int], ...]:
    """Non-identity Pauli labellings of one location with weight <= budget."""
    out = []
    for labels in itertools.product(("i",) + PAULI_LABELS, repeat=arity):
        weight = sum(1 for label in labels if label != "i")
        if weight == 0 or weight > budget:
            continue
        counts = (labels.count("x"), labels.count("y"), labels.count("z"))
        out.append((labels, counts, weight))
    return tuple(out)


def _plus(a: Key, b: Key) -> Key:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def _apply_labels(ensemble: Ensemble, qubits: Sequence[int], labels: Sequence[str]) -> None:
    for q, label in zip(qubits, labels):
        ensemble.apply_pauli(label, q)


@dataclass(frozen=True)
class BranchInsertion:
    """Pauli labels per noisy location: ((location index, labels), ...)."""

    entries: Tuple[Tuple[int, Tuple[str, ...]], ...] = ()

    @property
    def weight(self) -> int:
        return sum(1 for _, labels in self.entries for label in labels if label != "i")

    @property
    def key(self) -> Key:
        labels = [label for _, ls in self.entries for label in ls]
        return (labels.count("x"), labels.count("y"), labels.count("z"))

    def as_mapping(self) -> Dict[int, Tuple[str, ...]]:
        return dict(self.entries)


def enumerate_branches(circuit: NoisyCircuit, order: int) -> List[BranchInsertion]:
    """The empty insertion plus every insertion of total weight <= order."""
    order = check_order(order)
    noisy = [(i, circuit.ops[i].noise_arity) for i in circuit.noisy_indices]
    out: List[BranchInsertion] = []

    def extend(pos: int, budget: int, entries: Tuple[Tuple[int, Tuple[str, ...]], ...]) -> None:
        out.append(BranchInsertion(entries))
        for j in range(pos, len(noisy)):
            index, arity = noisy[j]
            for labels, _, weight in location_insertions(arity, budget):
                extend(j + 1, budget - weight, entries + ((index, labels),))

    extend(0, order, ())
    return out


# -----------------------------
# Weights
# -----------------------------
@lru_cache(maxsize=4096)
def _p0_power(exponent: int, order: int) -> ErrorPoly:
    return ErrorPoly.p_identity(order) ** exponent


def key_weight(key: Key, slots: int, order: int) -> ErrorPoly:
    """px^nx py^ny pz^nz p0^(slots - n), truncated at `order`."""
    n = sum(key)
    if n > slots:
        raise ValueError(f"{n} Pauli factors cannot fit in {slots} slots")
    if n > order:
        return ErrorPoly.zero(order)
    factors = ErrorPoly({key: 1.0}, order)
    return factors * _p0_power(slots - n, order)


def branch_weight(insertion: BranchInsertion, circuit: NoisyCircuit, order: int) -> ErrorPoly:
    return key_weight(insertion.key, circuit.noisy_slots, check_order(order))


# -----------------------------
# Single-branch simulation
# -----------------------------
def run_branch(circuit: NoisyCircuit, insertion: BranchInsertion) -> Tuple[float, float]:
    """
    Simulate one insertion and return (accept_mass, target_mass).

    target_mass is <target| Tr_rest(rho) |target>, unnormalized.
    """
    if circuit.target is None:
        raise ConfigError(f"{circuit.name} has no target state")
    labels_at = insertion.as_mapping()
    ensemble = Ensemble.zero(circuit.n_qubits)
    for index, op in enumerate(circuit.ops):
        labels = labels_at.get(index)
        if labels and op.errors_before:
            _apply_labels(ensemble, op.noise_qubits, labels)
        op.apply_ideal(ensemble)
        if ensemble.is_empty():
            return 0.0, 0.0
        if labels and not op.errors_before:
            _apply_labels(ensemble, op.noise_qubits, labels)
    mass, (gram,) = circuit.target.as_probe().observe(ensemble)
    return mass, float(gram[0, 0].real)


# -----------------------------
# Branch walk
# -----------------------------
class BranchSink:
    """Raw per-branch observations, grouped by probe position and key."""

    def __init__(self):
        self.masses: Dict[int, Dict[Key, List[float]]] = {}
        self.views: Dict[int, Dict[Key, List[List[np.ndarray]]]] = {}
        self.branches: Dict[int, int] = {}
        self.pruned = 0

    def record(self, position: int, key: Key, mass: float, matrices: List[np.ndarray]) -> None:
        self.masses.setdefault(position, {}).setdefault(key, []).append(mass)
        self.views.setdefault(position, {}).setdefault(key, []).append(matrices)

    def count_branch(self, weight: int) -> None:
        self.branches[weight] = self.branches.get(weight, 0) + 1
        total = sum(self.branches.values())
        if total % PROGRESS_LOG_EVERY == 0:
            logger.debug("%d branches walked", total)

    def merge(self, other: "BranchSink") -> None:
        for position, by_key in other.masses.items():
            for key, values in by_key.items():
                self.masses.setdefault(position, {}).setdefault(key, []).extend(values)
        for position, by_key in other.views.items():
            for key, values in by_key.items():
                self.views.setdefault(position, {}).setdefault(key, []).extend(values)
        for weight, count in other.branches.items():
            self.branches[weight] = self.branches.get(weight, 0) + count
        self.pruned += other.pruned


Spawn = Callable[[int, Ensemble, int, Key], None]


def walk(
    ops: Sequence[BaseOp],
    start: int,
    ensemble: Ensemble,
    budget: int,
    key: Key,
    sink: BranchSink,
    spawn: Optional[Spawn] = None,
) -> None:
    """
    Run ops[start:] on `ensemble` in place, recording every probe reached.

    Each noisy location forks the insertions that fit in `budget`; a fork is
    handed to `spawn` when given, otherwise walked recursively.
    """

    def fork(position: int, branch: Ensemble, remaining: int, branch_key: Key) -> None:
        sink.count_branch(sum(branch_key))
        if spawn is not None:
            spawn(position, branch, remaining, branch_key)
        else:
            walk(ops, position, branch, remaining, branch_key, sink)

    for index in range(start, len(ops)):
        op = ops[index]
        if isinstance(op, ProbeOp):
            mass, matrices = op.observe(ensemble)
            sink.record(index, key, mass, matrices)
            continue
        noisy = budget > 0 and op.noise_arity > 0
        if noisy and op.errors_before:
            for labels, counts, weight in location_insertions(op.noise_arity, budget):
                branch = ensemble.copy()
                _apply_labels(branch, op.noise_qubits, labels)
                op.apply_ideal(branch)
                if branch.is_empty():
                    sink.pruned += 1
                    continue
                fork(index + 1, branch, budget - weight, _plus(key, counts))
        op.apply_ideal(ensemble)
        if ensemble.is_empty():
            sink.pruned += 1
            return
        if noisy and not op.errors_before:
            for labels, counts, weight in location_insertions(op.noise_arity, budget):
                branch = ensemble.copy()
                _apply_labels(branch, op.noise_qubits, labels)
                fork(index + 1, branch, budget - weight, _plus(key, counts))


# -----------------------------
# Results
# -----------------------------
@dataclass(frozen=True)
class ProbeResult:
    """Polynomial observations at one probe."""

    label: str
    position: int
    slots: int
    denominator: ErrorPoly
    views: Mapping[str, PolyMatrix]

    def normalized(self, view: str) -> PolyMatrix:
        return self.views[view].divide_series(self.denominator)

    def expectation(self, view: str, vector: np.ndarray) -> ErrorPoly:
        """Unnormalized <v|G|v> of a view."""
        return self.views[view].expectation(vector)


@dataclass(frozen=True)
class EngineResult:
    order: int
    probes: Mapping[str, ProbeResult]
    metadata: Dict[str, object] = field(default_factory=dict)

    def probe(self, label: str) -> ProbeResult:
        try:
            return self.probes[label]
        except KeyError:
            raise ConfigError(f"no probe named {label!r}; have {sorted(self.probes)}") from None


@dataclass(frozen=True)
class PostSelectedResult:
    numerator: ErrorPoly
    denominator: ErrorPoly
    fidelity: ErrorPoly
    metadata: Dict[str, object] = field(default_factory=dict)


def _fsum_matrices(matrices: Sequence[np.ndarray]) -> np.ndarray:
    stack = np.stack(matrices)
    flat = stack.reshape(len(matrices), -1)
    re = [math.fsum(col) for col in flat.real.T]
    im = [math.fsum(col) for col in flat.imag.T]
    return (np.array(re) + 1j * np.array(im)).reshape(stack.shape[1:])


def _reduce_probe(
    probe: ProbeOp, position: int, slots: int, sink: BranchSink, order: int
) -> ProbeResult:
    masses = sink.masses.get(position, {})
    matrices = sink.views.get(position, {})
    denominator = ErrorPoly.zero(order)
    views = {v.label: PolyMatrix.zeros((v.dimension, v.dimension), order) for v in probe.views}
    for key in sorted(masses):
        weight = key_weight(key, slots, order)
        denominator = denominator + weight * math.fsum(masses[key])
        per_view = list(zip(*matrices[key]))
        for view, mats in zip(probe.views, per_view):
            summed = PolyMatrix.from_numeric(_fsum_matrices(mats), order)
            views[view.label] = views[view.label] + summed.scale(weight)
    return ProbeResult(probe.label, position, slots, denominator, views)


def reduced_views(circuit: NoisyCircuit, order: int, workers: int = DEFAULT_WORKERS) -> EngineResult:
    """Denominators and view matrices of every probe, to total degree `order`."""
    order = check_order(order)
    if workers < 1:
        raise ConfigError(f"worker count must be at least 1, got {workers}")
    ops = circuit.all_ops
    probes = circuit.probes()
    if not probes:
        raise ConfigError(f"{circuit.name} has neither probes nor a target")

    logger.info(
        "%s: %d locations, %d noisy slots, order %d, %d worker(s)",
        circuit.name, len(circuit), circuit.noisy_slots, order, workers,
    )
    watch = Stopwatch()
    sink = BranchSink()
    sink.count_branch(0)
    if workers == 1 or order == 0:
        walk(ops, 0, Ensemble.zero(circuit.n_qubits), order, NO_ERRORS, sink)
    else:
        def run_task(task: BranchTask, worker_sink: BranchSink) -> None:
            walk(ops, task.start, task.ensemble, task.budget, task.key, worker_sink)

        pool = ThreadedPipeline(workers, run_task, BranchSink)
        pool.start()
        try:
            walk(ops, 0, Ensemble.zero(circuit.n_qubits), order, NO_ERRORS, sink, spawn=pool.submit)
        finally:
            packets = pool.finish()
        for packet in packets:
            sink.merge(packet.sink)

    results: Dict[str, ProbeResult] = {}
    for position, probe in probes:
        if NO_ERRORS not in sink.masses.get(position, {}):
            raise InvalidPostSelectionError(
                f"{circuit.name}: the noiseless run never reaches probe {probe.label!r}"
            )
        slots = circuit.slots_before(position)
        result = _reduce_probe(probe, position, slots, sink, order)
        if result.denominator.coefficient(CONSTANT) <= _ACCEPTANCE_FLOOR:
            raise InvalidPostSelectionError(
                f"{circuit.name}: the noiseless run is rejected before probe {probe.label!r}"
            )
        results[probe.label] = result

    metadata = {
        "circuit": circuit.name,
        "order": order,
        "workers": workers,
        "n_qubits": circuit.n_qubits,
        "locations": len(circuit),
        "noisy_locations": len(circuit.noisy_indices),
        "noisy_slots": circuit.noisy_slots,
        "branches_by_order": {str(k): v for k, v in sorted(sink.branches.items())},
        "pruned_branches": sink.pruned,
        "wall_time_s": round(watch.elapsed(), 3),
    }
    logger.info(
        "%s: %d branches (%d pruned) in %.1fs",
        circuit.name, sum(sink.branches.values()), sink.pruned, watch.elapsed(),
    )
    return EngineResult(order, results, metadata)


def fidelity_polynomial(
    circuit: NoisyCircuit, order: int, workers: int = DEFAULT_WORKERS
) -> PostSelectedResult:
    """Target fidelity of the post-selected output as a truncated series."""
    if circuit.target is None:
        raise ConfigError(f"{circuit.name} has no target state")
    result = reduced_views(circuit, order, workers)
    probe = result.probe(TARGET_PROBE)
    numerator, _ = probe.views[TARGET_VIEW].entry(0, 0)
    fidelity = poly_div_series(numerator, probe.denominator)
    return PostSelectedResult(numerator, probe.denominator, fidelity, result.metadata)


def iter_branch_masses(
    circuit: NoisyCircuit, order: int
) -> Iterator[Tuple[BranchInsertion, ErrorPoly, float, float]]:
    """(insertion, weight, accept_mass, target_mass) for every branch, one by one."""
    for insertion in enumerate_branches(circuit, order):
        accept, target = run_branch(circuit, insertion)
        yield insertion, branch_weight(insertion, circuit, order), accept, target
