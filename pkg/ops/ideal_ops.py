"""
Noiseless elements: perfect error correction and observation probes.

A probe does not change the state. When the engine reaches one it records
the acceptance mass and, for each View, the matrix

    G_ij = <b_i| Tr_rest(rho) |b_j>

of the register after the view's ideal decoding operations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from constants import CODE_LENGTH
from errors import CircuitValidationError
from ops.base import BaseOp
from statevec import Ensemble


@dataclass(frozen=True)
class PerfectCorrectionOp(BaseOp):
    """Noiseless six-generator syndrome projection plus minimal-weight recovery."""

    register: Tuple[int, ...] = field()

    name = "perfect-ec"

    def __post_init__(self):
        object.__setattr__(self, "register", tuple(int(q) for q in self.register))
        if len(self.register) != CODE_LENGTH:
            raise CircuitValidationError(
                f"perfect correction acts on {CODE_LENGTH} qubits, got {len(self.register)}"
            )

    @property
    def qubits(self) -> Tuple[int, ...]:
        return self.register

    def apply_ideal(self, ensemble: Ensemble) -> None:
        # steane builds circuits, so it is imported late
        from steane import perfect_ec

        perfect_ec(ensemble, self.register)


@dataclass(frozen=True)
class View:
    """A reduced matrix of `register` in the basis given by the rows of `basis`."""

    label: str
    register: Tuple[int, ...]
    basis: np.ndarray = field(compare=False, repr=False)
    decode_ops: Tuple[BaseOp, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "register", tuple(int(q) for q in self.register))
        rows = np.atleast_2d(np.asarray(self.basis, dtype=complex))
        if rows.shape[1] != 2 ** len(self.register):
            raise CircuitValidationError(
                f"view {self.label!r}: basis rows of length {rows.shape[1]} do not fit "
                f"{len(self.register)} qubits"
            )
        object.__setattr__(self, "basis", rows)
        object.__setattr__(self, "decode_ops", tuple(self.decode_ops))

    @property
    def dimension(self) -> int:
        return self.basis.shape[0]

    def matrix(self, ensemble: Ensemble) -> np.ndarray:
        if self.decode_ops:
            ensemble = ensemble.copy()
            for op in self.decode_ops:
                op.apply_ideal(ensemble)
        return ensemble.view_matrix(self.register, self.basis)


@dataclass(frozen=True)
class ProbeOp(BaseOp):
    """Observation point; `pre_ops` are applied ideally to a copy first."""

    label: str
    views: Tuple[View, ...]
    pre_ops: Tuple[BaseOp, ...] = ()

    name = "probe"

    def __post_init__(self):
        object.__setattr__(self, "views", tuple(self.views))
        object.__setattr__(self, "pre_ops", tuple(self.pre_ops))
        labels = [v.label for v in self.views]
        if len(set(labels)) != len(labels):
            raise CircuitValidationError(f"probe {self.label!r} has duplicate view labels")

    @property
    def qubits(self) -> Tuple[int, ...]:
        touched = set()
        for op in self.pre_ops:
            touched.update(op.qubits)
        for view in self.views:
            touched.update(view.register)
            for op in view.decode_ops:
                touched.update(op.qubits)
        return tuple(sorted(touched))

    def apply_ideal(self, ensemble: Ensemble) -> None:
        return None

    def observe(self, ensemble: Ensemble) -> Tuple[float, List[np.ndarray]]:
        """Acceptance mass and view matrices of the (unnormalized) branch state."""
        if self.pre_ops:
            ensemble = ensemble.copy()
            for op in self.pre_ops:
                op.apply_ideal(ensemble)
        return ensemble.mass(), [view.matrix(ensemble) for view in self.views]

    def to_record(self) -> dict:
        record = super().to_record()
        record.update(
            label=self.label,
            views=[v.label for v in self.views],
            pre_ops=[op.to_record() for op in self.pre_ops],
        )
        return record
