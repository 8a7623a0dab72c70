"""
Location base class.

Every circuit element implements the same interface:
    apply_ideal(ensemble) -> None      the noiseless action, in place
    noise_qubits                       qubit slots that receive Pauli insertions
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Tuple

from statevec import Ensemble


class BaseOp(ABC):
    """Base interface for all circuit locations."""

    name: str = "op"
    # Pauli insertions go after the ideal action unless this is set.
    errors_before: bool = False

    @property
    @abstractmethod
    def qubits(self) -> Tuple[int, ...]:
        """Qubits the operation touches."""
        raise NotImplementedError

    @property
    def noise_qubits(self) -> Tuple[int, ...]:
        """Qubit slots subject to the Pauli channel (empty for ideal elements)."""
        return ()

    @property
    def noise_arity(self) -> int:
        return len(self.noise_qubits)

    @abstractmethod
    def apply_ideal(self, ensemble: Ensemble) -> None:
        """
        Apply the noiseless action.

        Args:
            ensemble: Branch ensemble, modified in place.
        """
        raise NotImplementedError

    def to_record(self) -> dict:
        return {"op": self.name, "qubits": list(self.qubits), "noise_arity": self.noise_arity}
