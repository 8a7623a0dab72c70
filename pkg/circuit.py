"""
Noisy circuits: an ordered list of locations plus an optional target.

Qubit life cycle checked at construction:

    fresh --Init/Prepare--> live --Measure--> measured --PostSelect--> fresh

Gates, probes and perfect correction need live qubits, and no qubit may be
left measured but not yet post-selected at the end of a circuit. A fragment
declares the qubits it expects to be live on entry with `inputs`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from constants import JSON_SCHEMA_VERSION
from errors import CircuitValidationError, QubitIndexError
from ops.base import BaseOp
from ops.gate_ops import PrepareOp
from ops.ideal_ops import ProbeOp, View
from ops.measure_ops import InitOp, MeasureOp, PostSelectOp

logger = logging.getLogger(__name__)

TARGET_PROBE = "target"
TARGET_VIEW = "target"

_FRESH, _LIVE, _MEASURED = "fresh", "live", "measured"


@dataclass(frozen=True)
class Target:
    """Ideal output on `register`, compared after the ideal `decode_ops`."""

    register: Tuple[int, ...]
    state: np.ndarray = field(compare=False, repr=False)
    decode_ops: Tuple[BaseOp, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "register", tuple(int(q) for q in self.register))
        vec = np.asarray(self.state, dtype=complex).reshape(-1)
        if vec.size != 2 ** len(self.register):
            raise CircuitValidationError(
                f"target state of length {vec.size} does not fit register {self.register}"
            )
        object.__setattr__(self, "state", vec)
        object.__setattr__(self, "decode_ops", tuple(self.decode_ops))

    def as_probe(self) -> ProbeOp:
        return ProbeOp(TARGET_PROBE, (View(TARGET_VIEW, self.register, self.state, self.decode_ops),))


class NoisyCircuit:
    """An immutable, validated sequence of locations on n_qubits qubits."""

    def __init__(
        self,
        n_qubits: int,
        ops: Iterable[BaseOp],
        target: Optional[Target] = None,
        inputs: Sequence[int] = (),
        name: str = "circuit",
    ):
        self.n_qubits = int(n_qubits)
        self.ops: Tuple[BaseOp, ...] = tuple(ops)
        self.target = target
        self.inputs: Tuple[int, ...] = tuple(inputs)
        self.name = name
        self._validate()
        self._slot_prefix = self._prefix_counts()
        logger.debug("%r: %d noisy slots", self, self.noisy_slots)

    # ----- composition -----
    @classmethod
    def compose(
        cls,
        n_qubits: int,
        parts: Iterable["NoisyCircuit"],
        target: Optional[Target] = None,
        name: str = "circuit",
    ) -> "NoisyCircuit":
        ops: List[BaseOp] = []
        for part in parts:
            ops.extend(part.ops)
        return cls(n_qubits, ops, target=target, name=name)

    def with_target(self, target: Optional[Target]) -> "NoisyCircuit":
        return NoisyCircuit(self.n_qubits, self.ops, target=target, inputs=self.inputs, name=self.name)

    # ----- queries -----
    @property
    def all_ops(self) -> Tuple[BaseOp, ...]:
        """Locations with the target appended as a final probe."""
        if self.target is None:
            return self.ops
        return self.ops + (self.target.as_probe(),)

    @property
    def noisy_indices(self) -> Tuple[int, ...]:
        return tuple(i for i, op in enumerate(self.ops) if op.noise_arity)

    @property
    def noisy_slots(self) -> int:
        return self._slot_prefix[-1]

    def slots_before(self, index: int) -> int:
        """Number of noisy qubit slots in locations strictly before `index`."""
        return self._slot_prefix[min(index, len(self.ops))]

    def probes(self) -> List[Tuple[int, ProbeOp]]:
        return [(i, op) for i, op in enumerate(self.all_ops) if isinstance(op, ProbeOp)]

    def stats(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for op in self.ops:
            counts[op.name] = counts.get(op.name, 0) + 1
        counts["noisy_locations"] = len(self.noisy_indices)
        counts["noisy_slots"] = self.noisy_slots
        return counts

    def __len__(self) -> int:
        return len(self.ops)

    def __repr__(self) -> str:
        return f"NoisyCircuit(name={self.name!r}, n_qubits={self.n_qubits}, locations={len(self.ops)})"

    # ----- validation -----
    def _prefix_counts(self) -> List[int]:
        prefix = [0]
        for op in self.ops:
            prefix.append(prefix[-1] + op.noise_arity)
        return prefix

    def _check_range(self, index: int, op: BaseOp) -> None:
        for q in op.qubits:
            if not 0 <= q < self.n_qubits:
                raise QubitIndexError(
                    f"{self.name}: location {index} ({op.name}) touches qubit {q} "
                    f"outside 0..{self.n_qubits - 1}"
                )

    def _validate(self) -> None:
        state = {q: _FRESH for q in range(self.n_qubits)}
        for q in self.inputs:
            if q not in state:
                raise QubitIndexError(f"{self.name}: input qubit {q} out of range")
            state[q] = _LIVE

        def require(index: int, op: BaseOp, qubits: Iterable[int], wanted: str) -> None:
            for q in qubits:
                if state[q] != wanted:
                    raise CircuitValidationError(
                        f"{self.name}: location {index} ({op.name}) needs qubit {q} {wanted}, "
                        f"found {state[q]}"
                    )

        for index, op in enumerate(self.all_ops):
            self._check_range(index, op)
            if isinstance(op, (InitOp, PrepareOp)):
                require(index, op, op.qubits, _FRESH)
                state.update({q: _LIVE for q in op.qubits})
            elif isinstance(op, MeasureOp):
                require(index, op, op.qubits, _LIVE)
                state[op.qubit] = _MEASURED
            elif isinstance(op, PostSelectOp):
                require(index, op, op.qubits, _MEASURED)
                state.update({q: _FRESH for q in op.qubits})
            else:
                require(index, op, op.qubits, _LIVE)

        dangling = sorted(q for q, s in state.items() if s == _MEASURED)
        if dangling:
            raise CircuitValidationError(
                f"{self.name}: qubits {dangling} are measured but never post-selected"
            )

    # ----- serialization -----
    def to_records(self) -> List[dict]:
        records = []
        for index, op in enumerate(self.ops):
            record = {"index": index}
            record.update(op.to_record())
            records.append(record)
        return records


def circuit_to_json(circuit: NoisyCircuit) -> dict:
    """JSON circuit description: ordered location records plus summary counts."""
    payload = {
        "schema": JSON_SCHEMA_VERSION,
        "name": circuit.name,
        "n_qubits": circuit.n_qubits,
        "stats": circuit.stats(),
        "locations": circuit.to_records(),
    }
    if circuit.target is not None:
        payload["target"] = {
            "register": list(circuit.target.register),
            "decode_ops": [op.to_record() for op in circuit.target.decode_ops],
        }
    return payload
