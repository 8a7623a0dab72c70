"""
Single logical qubit process tomography with polynomial entries.

The decoded one-qubit outputs of four runs (inputs |0>, |1>, |+>, |+i>) fix
the channel on every matrix unit |i><j|. Linear inversion then gives the
chi matrix in the operator basis (I, X, Y, Z),

    E(rho) = sum_mn chi_mn s_m rho s_n^dag,

one monomial at a time: the inversion is linear, so it commutes with the
polynomial decomposition.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np
import scipy.linalg

from constants import KRAUS_COMPLETENESS_TOLERANCE, KRAUS_EIGENVALUE_FLOOR
from errors import NonPhysicalMapError, OrderMismatchError
from errpoly import ErrorPoly, PolyMatrix
from statevec import PAULI_MATRICES, PureState
from steane import STEANE

logger = logging.getLogger(__name__)

PAULI_NAMES = ("I", "X", "Y", "Z")
PAULI_BASIS: Tuple[np.ndarray, ...] = tuple(PAULI_MATRICES[k] for k in ("i", "x", "y", "z"))

QPT_LABELS = ("0", "1", "+", "+i")
_SQRT2_INV = 1.0 / math.sqrt(2.0)
_QPT_AMPLITUDES: Dict[str, np.ndarray] = {
    "0": np.array([1.0, 0.0], dtype=complex),
    "1": np.array([0.0, 1.0], dtype=complex),
    "+": np.array([_SQRT2_INV, _SQRT2_INV], dtype=complex),
    "+i": np.array([_SQRT2_INV, 1j * _SQRT2_INV], dtype=complex),
}

Unit = Tuple[int, int]


def qpt_input_amplitudes() -> Dict[str, np.ndarray]:
    """One-qubit amplitudes of the four tomography inputs."""
    return {k: v.copy() for k, v in _QPT_AMPLITUDES.items()}


def qpt_input_states() -> List[PureState]:
    """Encoded |0_L>, |1_L>, |+_L>, |+i_L>."""
    return [PureState(STEANE.encode(_QPT_AMPLITUDES[k])) for k in QPT_LABELS]


# -----------------------------
# Linear extension to any input
# -----------------------------
def matrix_units(outputs: Mapping[str, PolyMatrix]) -> Dict[Unit, PolyMatrix]:
    """Channel outputs on |i><j| from outputs on the four tomography inputs."""
    missing = [k for k in QPT_LABELS if k not in outputs]
    if missing:
        raise ValueError(f"missing tomography outputs for inputs {missing}")
    orders = {outputs[k].max_degree for k in QPT_LABELS}
    if len(orders) != 1:
        raise OrderMismatchError(f"tomography outputs were computed at different orders: {sorted(orders)}")
    o0, o1, plus, plus_i = (outputs[k] for k in QPT_LABELS)
    diagonal = o0 + o1
    return {
        (0, 0): o0,
        (1, 1): o1,
        (1, 0): plus + plus_i.scale(-1j) - diagonal.scale((1 - 1j) / 2),
        (0, 1): plus + plus_i.scale(1j) - diagonal.scale((1 + 1j) / 2),
    }


@dataclass(frozen=True)
class LinearResponse:
    """Unnormalized output of one view as a linear map of the input density matrix."""

    units: Mapping[Unit, PolyMatrix]

    @property
    def max_degree(self) -> int:
        return self.units[(0, 0)].max_degree

    def apply(self, rho: np.ndarray) -> PolyMatrix:
        out = None
        for (i, j), unit in sorted(self.units.items()):
            term = unit.scale(complex(rho[i, j]))
            out = term if out is None else out + term
        return out

    def for_state(self, amplitudes: Sequence[complex]) -> PolyMatrix:
        amps = np.asarray(amplitudes, dtype=complex)
        return self.apply(np.outer(amps, amps.conj()))

    def acceptance(self, amplitudes: Sequence[complex]) -> ErrorPoly:
        """Tr of the output, valid for views that keep the whole trace."""
        return self.for_state(amplitudes).trace()


def process_response(outputs: Mapping[str, PolyMatrix]) -> LinearResponse:
    return LinearResponse(matrix_units(outputs))


# -----------------------------
# Chi matrices
# -----------------------------
def _inversion_matrix() -> np.ndarray:
    """B[(i, j, k, l), (m, n)] = (s_m |i><j| s_n^dag)[k, l]."""
    b = np.zeros((16, 16), dtype=complex)
    for i in range(2):
        for j in range(2):
            unit = np.zeros((2, 2), dtype=complex)
            unit[i, j] = 1.0
            for m, sm in enumerate(PAULI_BASIS):
                for n, sn in enumerate(PAULI_BASIS):
                    image = sm @ unit @ sn.conj().T
                    b[4 * (2 * i + j): 4 * (2 * i + j) + 4, 4 * m + n] = image.reshape(-1)
    return b


_INVERSION = np.linalg.inv(_inversion_matrix())


class ChiMatrix:
    """4x4 process matrix over (I, X, Y, Z) with polynomial entries."""

    def __init__(self, matrix: PolyMatrix):
        if matrix.shape != (4, 4):
            raise ValueError(f"chi matrix must be 4x4, got {matrix.shape}")
        self.matrix = matrix

    @property
    def max_degree(self) -> int:
        return self.matrix.max_degree

    def entry(self, m: int, n: int) -> Tuple[ErrorPoly, ErrorPoly]:
        return self.matrix.entry(m, n)

    def constant(self) -> np.ndarray:
        return self.matrix.constant()

    def evaluate(self, px: float, py: float, pz: float) -> np.ndarray:
        return self.matrix.evaluate(px, py, pz)

    def trace(self) -> ErrorPoly:
        return self.matrix.trace()

    def is_hermitian(self, px: float, py: float, pz: float, tol: float = 1e-9) -> bool:
        chi = self.evaluate(px, py, pz)
        return bool(np.max(np.abs(chi - chi.conj().T)) <= tol)

    def to_json(self) -> dict:
        return {"basis": list(PAULI_NAMES), "order": self.max_degree, "entries": self.matrix.to_json()}

    def __repr__(self) -> str:
        return f"ChiMatrix(K={self.max_degree})"


def chi_from_units(units: Mapping[Unit, PolyMatrix]) -> ChiMatrix:
    order = units[(0, 0)].max_degree
    monomials = set()
    for unit in units.values():
        monomials.update(unit.coeffs)
    coeffs = {}
    for mono in monomials:
        y = np.concatenate([units[(i, j)].coefficient(mono).reshape(-1) for i in range(2) for j in range(2)])
        coeffs[mono] = (_INVERSION @ y).reshape(4, 4)
    return ChiMatrix(PolyMatrix(coeffs, (4, 4), order))


def chi_from_runs(outputs: Mapping[str, PolyMatrix]) -> ChiMatrix:
    """
    Chi matrix from the decoded outputs of the four tomography inputs.

    Each output is normalized to trace 1 first (series division by its own
    acceptance), so chi describes the channel on the post-selected branch.
    """
    normalized = {k: outputs[k].divide_series(outputs[k].trace()) for k in QPT_LABELS if k in outputs}
    return chi_from_units(matrix_units(normalized))


def ideal_chi(unitary: np.ndarray, max_degree: int = 1) -> ChiMatrix:
    """Chi matrix of rho -> U rho U^dag, as a constant polynomial."""
    c = np.array([np.trace(s.conj().T @ unitary) / 2 for s in PAULI_BASIS])
    return ChiMatrix(PolyMatrix.from_numeric(np.outer(c, c.conj()), max_degree))


def gate_fidelity(chi_p: ChiMatrix, chi_0: ChiMatrix) -> ErrorPoly:
    """Tr[chi(p) chi(0)], truncated at chi_p's order."""
    return chi_p.matrix.trace_with(chi_0.constant())


# -----------------------------
# Kraus operators
# -----------------------------
def chi_to_kraus(chi: ChiMatrix, px: float, py: float, pz: float) -> List[np.ndarray]:
    """Kraus operators sqrt(l_k) sum_i v_k[i] s_i of the evaluated chi matrix."""
    value = chi.evaluate(px, py, pz)
    value = (value + value.conj().T) / 2
    evals, evecs = scipy.linalg.eigh(value)
    lowest = float(evals.min())
    if lowest < KRAUS_EIGENVALUE_FLOOR:
        raise NonPhysicalMapError(
            f"chi has eigenvalue {lowest:.3e} below {KRAUS_EIGENVALUE_FLOOR:g} at p=({px}, {py}, {pz})"
        )
    if lowest < 0.0:
        warnings.warn(f"clipping chi eigenvalue {lowest:.3e} to zero", RuntimeWarning, stacklevel=2)
    kraus = []
    for k in range(len(evals)):
        if evals[k] <= 0.0:
            continue
        op = sum(evecs[i, k] * PAULI_BASIS[i] for i in range(4))
        kraus.append(math.sqrt(evals[k]) * op)
    defect = kraus_completeness_defect(kraus)
    if defect > KRAUS_COMPLETENESS_TOLERANCE:
        warnings.warn(f"Kraus completeness defect {defect:.3e}", RuntimeWarning, stacklevel=2)
    logger.debug("%d Kraus operators, completeness defect %.2e", len(kraus), defect)
    return kraus


def kraus_completeness_defect(kraus: Sequence[np.ndarray]) -> float:
    total = sum((k.conj().T @ k for k in kraus), np.zeros((2, 2), dtype=complex))
    return float(np.max(np.abs(total - np.eye(2))))


def chi_to_json(chi: ChiMatrix) -> dict:
    return chi.to_json()


def kraus_to_json(kraus: Sequence[np.ndarray], px: float, py: float, pz: float) -> dict:
    return {
        "p": {"px": px, "py": py, "pz": pz},
        "operators": [{"re": k.real.tolist(), "im": k.imag.tolist()} for k in kraus],
        "completeness_defect": kraus_completeness_defect(kraus),
    }
