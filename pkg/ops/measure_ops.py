"""
Qubit initialization, measurement and post-selection.

A measurement only rotates the measured basis onto the computational one;
the outcome is fixed later by a PostSelectOp, which projects onto the
accepted outcomes, discards the qubits and hands them back in |0>.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from errors import CircuitValidationError
from ops.base import BaseOp
from statevec import BASIS_ROTATIONS, Ensemble

PREDICATES = ("zero", "even", "odd", "any")


def outcome_mask(predicate: str, n_bits: int) -> np.ndarray:
    """Boolean vector over the 2^n outcomes (first qubit most significant)."""
    outcomes = np.arange(2**n_bits)
    parity = np.array([bin(c).count("1") % 2 for c in outcomes], dtype=int)
    masks: Dict[str, np.ndarray] = {
        "zero": outcomes == 0,
        "even": parity == 0,
        "odd": parity == 1,
        "any": np.ones(2**n_bits, dtype=bool),
    }
    try:
        return masks[predicate]
    except KeyError:
        raise CircuitValidationError(
            f"unknown post-selection predicate {predicate!r}; expected one of {PREDICATES}"
        ) from None


@dataclass(frozen=True)
class InitOp(BaseOp):
    """Preparation of |0> on a fresh qubit, followed by the Pauli channel when noisy."""

    qubit: int
    noisy: bool = True

    name = "init"

    @property
    def qubits(self) -> Tuple[int, ...]:
        return (self.qubit,)

    @property
    def noise_qubits(self) -> Tuple[int, ...]:
        return (self.qubit,) if self.noisy else ()

    def apply_ideal(self, ensemble: Ensemble) -> None:
        # The qubit is already |0>; circuit validation guarantees it.
        return None

    def to_record(self) -> dict:
        record = super().to_record()
        record.update(noisy=self.noisy)
        return record


@dataclass(frozen=True)
class MeasureOp(BaseOp):
    """Measurement of one qubit in the z or x basis; Pauli errors precede it."""

    qubit: int
    basis: str = "z"
    noisy: bool = True

    name = "measure"
    errors_before = True

    def __post_init__(self):
        if self.basis not in BASIS_ROTATIONS:
            raise CircuitValidationError(f"unsupported measurement basis: {self.basis!r}")

    @property
    def qubits(self) -> Tuple[int, ...]:
        return (self.qubit,)

    @property
    def noise_qubits(self) -> Tuple[int, ...]:
        return (self.qubit,) if self.noisy else ()

    def apply_ideal(self, ensemble: Ensemble) -> None:
        if self.basis != "z":
            ensemble.apply_matrix(BASIS_ROTATIONS[self.basis], (self.qubit,))

    def to_record(self) -> dict:
        record = super().to_record()
        record.update(basis=self.basis, noisy=self.noisy)
        return record


@dataclass(frozen=True)
class PostSelectOp(BaseOp):
    """Keep the branch only on outcomes of `targets` satisfying `predicate`."""

    targets: Tuple[int, ...]
    predicate: str = "zero"

    name = "post-select"

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        if not self.targets:
            raise CircuitValidationError("post-selection needs at least one measured qubit")
        outcome_mask(self.predicate, 1)

    @property
    def qubits(self) -> Tuple[int, ...]:
        return self.targets

    @property
    def accepted(self) -> np.ndarray:
        return outcome_mask(self.predicate, len(self.targets))

    def apply_ideal(self, ensemble: Ensemble) -> None:
        ensemble.post_select(self.targets, self.accepted)

    def to_record(self) -> dict:
        record = super().to_record()
        record.update(predicate=self.predicate)
        return record
