"""Gate locations and ideal register preparation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from errors import ArityError, QubitIndexError
from ops.base import BaseOp
from statevec import GATE_MATRICES, Ensemble, Gate


@dataclass(frozen=True)
class GateOp(BaseOp):
    """A gate from {H, X, Y, Z, T, CNOT, CM}; noisy unless marked ideal."""

    kind: str
    targets: Tuple[int, ...]
    noisy: bool = True

    name = "gate"

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        if self.kind not in GATE_MATRICES:
            raise ArityError(f"unknown gate kind: {self.kind}")
        arity = Gate.named(self.kind).arity
        if len(self.targets) != arity:
            raise ArityError(f"{self.kind} acts on {arity} qubit(s), got targets {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise QubitIndexError(f"repeated target qubits: {self.targets}")

    @property
    def qubits(self) -> Tuple[int, ...]:
        return self.targets

    @property
    def noise_qubits(self) -> Tuple[int, ...]:
        return self.targets if self.noisy else ()

    def apply_ideal(self, ensemble: Ensemble) -> None:
        ensemble.apply_matrix(GATE_MATRICES[self.kind], self.targets)

    def to_record(self) -> dict:
        record = super().to_record()
        record.update(gate=self.kind, noisy=self.noisy)
        return record


def ideal(kind: str, *targets: int) -> GateOp:
    return GateOp(kind, tuple(targets), noisy=False)


def noisy(kind: str, *targets: int) -> GateOp:
    return GateOp(kind, tuple(targets), noisy=True)


def inverse_ops(ops: Sequence[GateOp]) -> Tuple[GateOp, ...]:
    """Ideal inverse of a sequence of self-inverse gates (H, X, Y, Z, CNOT)."""
    out = []
    for op in reversed(ops):
        if op.kind in ("T", "CM"):
            raise ArityError(f"{op.kind} is not self-inverse")
        out.append(GateOp(op.kind, op.targets, noisy=False))
    return tuple(out)


@dataclass(frozen=True)
class PrepareOp(BaseOp):
    """Noiseless preparation of a register state on qubits currently in |0...0>."""

    register: Tuple[int, ...] = field()
    vector: np.ndarray = field(compare=False, repr=False)
    label: str = "prepared"

    name = "prepare"

    def __post_init__(self):
        object.__setattr__(self, "register", tuple(int(q) for q in self.register))
        vec = np.asarray(self.vector, dtype=complex).reshape(-1)
        if vec.size != 2 ** len(self.register):
            raise ArityError(f"state of length {vec.size} does not fit {len(self.register)} qubits")
        object.__setattr__(self, "vector", vec)

    @property
    def qubits(self) -> Tuple[int, ...]:
        return self.register

    def apply_ideal(self, ensemble: Ensemble) -> None:
        ensemble.prepare(self.register, self.vector)

    def to_record(self) -> dict:
        record = super().to_record()
        record.update(label=self.label)
        return record
