"""
Dense pure-state simulation.

Conventions:
- Qubit 0 is the most significant bit of the amplitude index.
- A k-qubit gate matrix is indexed with its first target as the most
  significant bit, so CNOT and CM list the control first.
- Internally amplitudes are handled as tensors of shape (2,) * n so that a
  gate is one tensordot over the target axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
import scipy.linalg

from constants import (
    ENSEMBLE_COMPRESSION_FLOOR,
    ENSEMBLE_RELATIVE_FLOOR,
    MAX_STATEVECTOR_QUBITS,
    NORMALIZATION_TOLERANCE,
    UNITARY_TOLERANCE,
)
from errors import ArityError, QubitIndexError

_SQRT2_INV = 1.0 / math.sqrt(2.0)
_EIGHTH = np.exp(1j * math.pi / 4)

GATE_MATRICES: Dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "T": np.array([[1, 0], [0, _EIGHTH]], dtype=complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
        dtype=complex,
    ),
    # controlled-M: |10> -> e^{-i pi/4}|11>, |11> -> e^{i pi/4}|10>
    "CM": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, _EIGHTH], [0, 0, np.conj(_EIGHTH), 0]],
        dtype=complex,
    ),
}

PAULI_MATRICES: Dict[str, np.ndarray] = {
    "i": GATE_MATRICES["I"],
    "x": GATE_MATRICES["X"],
    "y": GATE_MATRICES["Y"],
    "z": GATE_MATRICES["Z"],
}

# Basis change taking the measured basis to the computational one.
BASIS_ROTATIONS: Dict[str, np.ndarray] = {
    "z": GATE_MATRICES["I"],
    "x": GATE_MATRICES["H"],
}


@dataclass(frozen=True)
class Gate:
    """A named unitary of arity 1 or 2."""

    kind: str
    matrix: np.ndarray = field(compare=False, repr=False)

    @classmethod
    def named(cls, kind: str) -> "Gate":
        try:
            return cls(kind, GATE_MATRICES[kind])
        except KeyError:
            raise ArityError(f"unknown gate kind: {kind}") from None

    @property
    def arity(self) -> int:
        return int(round(math.log2(self.matrix.shape[0])))

    def is_unitary(self, tol: float = UNITARY_TOLERANCE) -> bool:
        m = self.matrix
        return bool(np.allclose(m @ m.conj().T, np.eye(m.shape[0]), atol=tol))


# -----------------------------
# Tensor kernels
# -----------------------------
def _check_targets(n_qubits: int, targets: Sequence[int]) -> None:
    if len(set(targets)) != len(targets):
        raise QubitIndexError(f"repeated target qubits: {tuple(targets)}")
    for q in targets:
        if not 0 <= q < n_qubits:
            raise QubitIndexError(f"qubit {q} out of range for {n_qubits} qubits")


def apply_matrix_tensor(tensor: np.ndarray, matrix: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Apply a 2^k x 2^k matrix to the target axes of a (2,)*n tensor."""
    k = len(targets)
    op = matrix.reshape((2,) * (2 * k))
    moved = np.tensordot(op, tensor, axes=(list(range(k, 2 * k)), list(targets)))
    return np.moveaxis(moved, list(range(k)), list(targets))


def _split_outcomes(tensor: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Matrix whose column c is the rest-of-register vector for outcome bits c."""
    n, m = tensor.ndim, len(qubits)
    moved = np.moveaxis(tensor, list(qubits), list(range(n - m, n)))
    return moved.reshape(-1, 2**m)


def _embed_with_zeros(rest: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    m = len(qubits)
    full = np.zeros((rest.size, 2**m), dtype=complex)
    full[:, 0] = rest
    return np.moveaxis(full.reshape((2,) * n), list(range(n - m, n)), list(qubits))


def compress(
    vectors: List[np.ndarray],
    floor: float = ENSEMBLE_COMPRESSION_FLOOR,
    relative_floor: float = ENSEMBLE_RELATIVE_FLOOR,
) -> List[np.ndarray]:
    """
    Minimal set of vectors with the same sum of outer products.

    The Gram matrix W^dag W of the stacked vectors is diagonalized; W u_k for
    each kept eigenvector u_k has squared norm lambda_k and the outer products
    still sum to W W^dag. Eigenvalues below `relative_floor` times the largest
    one are dropped.
    """
    vectors = [v for v in vectors if np.vdot(v, v).real > floor]
    if len(vectors) <= 1:
        return vectors
    w = np.stack(vectors, axis=1)
    gram = w.conj().T @ w
    evals, evecs = scipy.linalg.eigh(gram)
    cutoff = max(floor, relative_floor * float(evals.max()))
    out = []
    for k in np.argsort(evals)[::-1]:
        if evals[k] > cutoff:
            out.append(w @ evecs[:, k])
    return out


# -----------------------------
# PureState
# -----------------------------
class PureState:
    """Complex amplitude vector over n <= 16 qubits."""

    __slots__ = ("n_qubits", "amplitudes", "normalized")

    def __init__(self, amplitudes: np.ndarray, normalized: bool = True, check: bool = True):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = int(round(math.log2(amps.size))) if amps.size else -1
        if n < 0 or 2**n != amps.size:
            raise ValueError(f"amplitude vector length {amps.size} is not a power of two")
        if n > MAX_STATEVECTOR_QUBITS:
            raise ValueError(f"{n} qubits exceeds the {MAX_STATEVECTOR_QUBITS}-qubit limit")
        if check and normalized:
            norm = float(np.vdot(amps, amps).real)
            if abs(norm - 1.0) > NORMALIZATION_TOLERANCE:
                raise ValueError(f"state flagged normalized has squared norm {norm}")
        self.n_qubits = n
        self.amplitudes = amps
        self.normalized = normalized

    @classmethod
    def zero(cls, n_qubits: int) -> "PureState":
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(amps)

    @classmethod
    def from_bits(cls, bits: str) -> "PureState":
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(amps)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_qubits)

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalized_copy(self) -> "PureState":
        norm = math.sqrt(self.norm_squared)
        if norm == 0.0:
            raise ZeroDivisionError("cannot normalize the zero vector")
        return PureState(self.amplitudes / norm)

    def kron(self, other: "PureState") -> "PureState":
        return PureState(
            np.kron(self.amplitudes, other.amplitudes),
            normalized=self.normalized and other.normalized,
            check=False,
        )

    def __repr__(self) -> str:
        return f"PureState(n_qubits={self.n_qubits}, normalized={self.normalized})"


def apply_gate(state: PureState, gate: Gate, targets: Sequence[int]) -> PureState:
    if len(targets) != gate.arity:
        raise ArityError(f"{gate.kind} acts on {gate.arity} qubit(s), got targets {tuple(targets)}")
    _check_targets(state.n_qubits, targets)
    out = apply_matrix_tensor(state.tensor(), gate.matrix, targets)
    return PureState(out.reshape(-1), normalized=state.normalized, check=False)


def measure_project(state: PureState, qubit: int, basis: str, outcome: int) -> Tuple[PureState, float]:
    """
    Project one qubit onto a measurement outcome.

    Returns the UNNORMALIZED projected state and its squared norm.
    """
    _check_targets(state.n_qubits, [qubit])
    rotation = BASIS_ROTATIONS[basis]
    ket = rotation.conj().T[:, outcome]  # basis vector of the outcome
    projector = np.outer(ket, ket.conj())
    out = apply_matrix_tensor(state.tensor(), projector, [qubit]).reshape(-1)
    projected = PureState(out, normalized=False, check=False)
    return projected, projected.norm_squared


def overlap_fidelity(state: PureState, target: PureState) -> float:
    if state.n_qubits != target.n_qubits:
        raise ValueError(f"dimension mismatch: {state.n_qubits} vs {target.n_qubits} qubits")
    return float(abs(np.vdot(target.amplitudes, state.amplitudes)) ** 2)


def states_equal_up_to_phase(a: PureState, b: PureState, tol: float = 1e-10) -> bool:
    if a.n_qubits != b.n_qubits:
        return False
    return abs(overlap_fidelity(a, b) - a.norm_squared * b.norm_squared) <= tol


# -----------------------------
# Ensembles (mixed states as unnormalized pure members)
# -----------------------------
class Ensemble:
    """
    A density matrix held as a list of unnormalized pure members,
    rho = sum_k |psi_k><psi_k|. Members are (2,)*n tensors.
    """

    __slots__ = ("n_qubits", "members")

    def __init__(self, n_qubits: int, members: List[np.ndarray]):
        self.n_qubits = n_qubits
        self.members = members

    @classmethod
    def zero(cls, n_qubits: int) -> "Ensemble":
        if n_qubits > MAX_STATEVECTOR_QUBITS:
            raise ValueError(f"{n_qubits} qubits exceeds the {MAX_STATEVECTOR_QUBITS}-qubit limit")
        return cls(n_qubits, [PureState.zero(n_qubits).tensor().copy()])

    @classmethod
    def from_state(cls, state: PureState) -> "Ensemble":
        return cls(state.n_qubits, [state.tensor().copy()])

    def copy(self) -> "Ensemble":
        return Ensemble(self.n_qubits, [m.copy() for m in self.members])

    def is_empty(self) -> bool:
        return not self.members

    def mass(self) -> float:
        return float(sum(np.vdot(m, m).real for m in self.members))

    def apply_matrix(self, matrix: np.ndarray, targets: Sequence[int]) -> None:
        self.members = [apply_matrix_tensor(m, matrix, targets) for m in self.members]

    def apply_pauli(self, label: str, qubit: int) -> None:
        if label != "i":
            self.apply_matrix(PAULI_MATRICES[label], [qubit])

    def prepare(self, qubits: Sequence[int], vector: np.ndarray) -> None:
        """Replace qubits that are in |0...0> by the given register state."""
        vector = np.asarray(vector, dtype=complex).reshape(-1)
        n, m = self.n_qubits, len(qubits)
        out = []
        for member in self.members:
            rest = _split_outcomes(member, qubits)[:, 0]
            full = np.outer(rest, vector).reshape((2,) * n)
            out.append(np.moveaxis(full, list(range(n - m, n)), list(qubits)))
        self.members = out

    def post_select(self, qubits: Sequence[int], accepted: np.ndarray) -> None:
        """
        Keep the accepted computational outcomes of `qubits`, then discard
        those qubits and reset them to |0>.

        `accepted` is a boolean vector over the 2^m outcomes with the first
        listed qubit as the most significant bit.
        """
        columns: List[np.ndarray] = []
        for member in self.members:
            split = _split_outcomes(member, qubits)
            for c in np.flatnonzero(accepted):
                columns.append(split[:, c])
        kept = compress(columns)
        self.members = [_embed_with_zeros(v, qubits, self.n_qubits) for v in kept]

    def compress(self) -> None:
        shape = (2,) * self.n_qubits
        kept = compress([m.reshape(-1) for m in self.members])
        self.members = [v.reshape(shape) for v in kept]

    def view_matrix(self, register: Sequence[int], basis: np.ndarray) -> np.ndarray:
        """G_ij = <b_i| Tr_rest(rho) |b_j> for basis rows b_i over `register`."""
        basis = np.asarray(basis, dtype=complex)
        r = len(register)
        gram = np.zeros((basis.shape[0], basis.shape[0]), dtype=complex)
        for member in self.members:
            moved = np.moveaxis(member, list(register), list(range(r))).reshape(2**r, -1)
            v = basis.conj() @ moved
            gram += v @ v.conj().T
        return gram
