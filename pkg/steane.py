"""
[7,1,3] code: logical basis, encoder, Shor-state ancillas, syndrome
fragments, perfect correction and perfect decoding.

Qubits inside a code block are 0-indexed here; GENERATOR_SUPPORTS and the
encoder wiring in constants.py are written 1-indexed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from circuit import NoisyCircuit
from constants import (
    ANCILLA_BLOCK,
    CODE_LENGTH,
    ENCODER_LOGICAL_FANOUT,
    ENCODER_PIVOTS,
    ENSEMBLE_COMPRESSION_FLOOR,
    GENERATOR_SUPPORTS,
    SHOR_VERIFICATION_PAIRS,
    SYNDROME_REPETITIONS,
    THETA_REGISTER,
    VERIFY_QUBIT,
)
from errors import CircuitValidationError
from errpoly import ErrorPoly, PolyMatrix
from ops.base import BaseOp
from ops.gate_ops import GateOp, inverse_ops
from ops.ideal_ops import View
from ops.measure_ops import InitOp, MeasureOp, PostSelectOp
from statevec import PAULI_MATRICES, Ensemble, apply_matrix_tensor

logger = logging.getLogger(__name__)

SYNDROME_KINDS = ("bit-flip", "phase-flip")


# -----------------------------
# Pauli strings on tensors
# -----------------------------
@lru_cache(maxsize=256)
def _z_signs(n: int, axes: Tuple[int, ...]) -> np.ndarray:
    signs = np.ones((2,) * n)
    for axis in axes:
        shape = [1] * n
        shape[axis] = 2
        signs = signs * np.array([1.0, -1.0]).reshape(shape)
    return signs


def apply_pauli_string(tensor: np.ndarray, kind: str, axes: Sequence[int]) -> np.ndarray:
    """X...X or Z...Z on the given axes of a (2,)*n tensor (a new array)."""
    axes = tuple(axes)
    if kind == "X":
        return np.flip(tensor, axis=axes).copy()
    if kind == "Z":
        return tensor * _z_signs(tensor.ndim, axes)
    raise ValueError(f"unsupported Pauli string kind: {kind!r}")


def pauli_label(kind: str, support: Sequence[int], length: int = CODE_LENGTH) -> str:
    """Letter form, e.g. ('X', (3, 4, 5, 6)) -> 'IIIXXXX'."""
    return "".join(kind if q in support else "I" for q in range(length))


def _letters_commute(a: str, b: str) -> bool:
    clashes = sum(1 for x, y in zip(a, b) if x != "I" and y != "I" and x != y)
    return clashes % 2 == 0


# -----------------------------
# CodeSpec
# -----------------------------
@dataclass(frozen=True)
class CodeSpec:
    """Stabilizer generators, logical operators and logical basis states."""

    length: int
    x_supports: Tuple[Tuple[int, ...], ...]
    z_supports: Tuple[Tuple[int, ...], ...]
    zero_l: np.ndarray = field(compare=False, repr=False)
    one_l: np.ndarray = field(compare=False, repr=False)

    @classmethod
    def standard(cls) -> "CodeSpec":
        supports = tuple(tuple(q - 1 for q in s) for s in GENERATOR_SUPPORTS)
        zero = np.zeros((2,) * CODE_LENGTH, dtype=complex)
        zero[(0,) * CODE_LENGTH] = 1.0
        # project |0...0> onto the +1 space of every X-type generator
        for support in supports:
            zero = (zero + apply_pauli_string(zero, "X", support)) / 2
        zero = zero / np.sqrt(np.vdot(zero, zero).real)
        one = apply_pauli_string(zero, "X", range(CODE_LENGTH))
        return cls(CODE_LENGTH, supports, supports, zero.reshape(-1), one.reshape(-1))

    @property
    def generators(self) -> List[Tuple[str, Tuple[int, ...]]]:
        """(kind, support) for the three X-type then the three Z-type generators."""
        return [("X", s) for s in self.x_supports] + [("Z", s) for s in self.z_supports]

    @property
    def generator_labels(self) -> List[str]:
        return [pauli_label(kind, s, self.length) for kind, s in self.generators]

    @property
    def logical_x(self) -> str:
        return "X" * self.length

    @property
    def logical_z(self) -> str:
        return "Z" * self.length

    def commutes(self, a: str, b: str) -> bool:
        return _letters_commute(a, b)

    def basis_rows(self) -> np.ndarray:
        return np.stack([self.zero_l, self.one_l])

    def encode(self, amplitudes: Sequence[complex]) -> np.ndarray:
        """a|0_L> + b|1_L> for a one-qubit amplitude pair (a, b)."""
        a, b = amplitudes
        return a * self.zero_l + b * self.one_l


STEANE = CodeSpec.standard()


def logical_basis() -> Tuple[np.ndarray, np.ndarray]:
    return STEANE.zero_l.copy(), STEANE.one_l.copy()


# -----------------------------
# Encoder
# -----------------------------
def encoder_ops(register: Sequence[int] = THETA_REGISTER, noisy: bool = True) -> Tuple[GateOp, ...]:
    """Gate sequence mapping |x>|000000> to the encoded |x_L>."""
    q = {i + 1: qubit for i, qubit in enumerate(register)}
    ops: List[GateOp] = []
    source, fanout = ENCODER_LOGICAL_FANOUT
    for t in fanout:
        ops.append(GateOp("CNOT", (q[source], q[t]), noisy=noisy))
    for pivot, _ in ENCODER_PIVOTS:
        ops.append(GateOp("H", (q[pivot],), noisy=noisy))
    for pivot, targets in ENCODER_PIVOTS:
        for t in targets:
            ops.append(GateOp("CNOT", (q[pivot], q[t]), noisy=noisy))
    return tuple(ops)


def inverse_encoder_ops(register: Sequence[int] = THETA_REGISTER) -> Tuple[GateOp, ...]:
    return inverse_ops(encoder_ops(register, noisy=False))


def _width(*groups: Sequence[int]) -> int:
    return max(max(g) for g in groups if len(g)) + 1


def build_gate_encoder(register: Sequence[int] = THETA_REGISTER, n_qubits: Optional[int] = None) -> NoisyCircuit:
    """Noisy encoding gates on a live register (no initializations)."""
    register = tuple(register)
    return NoisyCircuit(
        n_qubits or _width(register), encoder_ops(register), inputs=register, name="gate-encoder"
    )


# -----------------------------
# Shor states
# -----------------------------
@dataclass(frozen=True)
class ShorStateSpec:
    size: int
    verifications: int
    ancillas: Tuple[int, ...]
    verify_qubit: int
    with_hadamards: bool
    circuit: NoisyCircuit


def build_shor_state(
    size: int,
    ancillas: Optional[Sequence[int]] = None,
    verify_qubit: int = VERIFY_QUBIT,
    with_hadamards: bool = True,
    n_qubits: Optional[int] = None,
) -> ShorStateSpec:
    """
    Verified GHZ state on `ancillas`, with a Hadamard on every qubit when
    `with_hadamards` (the Shor state proper) or without them (the cat state
    used as a control).
    """
    if size not in SHOR_VERIFICATION_PAIRS:
        raise CircuitValidationError(f"Shor states of size {size} are not supported")
    ancillas = tuple(ancillas if ancillas is not None else ANCILLA_BLOCK[:size])
    if len(ancillas) != size:
        raise CircuitValidationError(f"need {size} ancilla qubits, got {len(ancillas)}")
    if verify_qubit in ancillas:
        raise CircuitValidationError("the verification qubit must not be one of the ancillas")

    ops: List[BaseOp] = [InitOp(a) for a in ancillas]
    ops.append(GateOp("H", (ancillas[0],)))
    for control, target in zip(ancillas, ancillas[1:]):
        ops.append(GateOp("CNOT", (control, target)))
    pairs = SHOR_VERIFICATION_PAIRS[size]
    for i, j in pairs:
        ops.extend([
            InitOp(verify_qubit),
            GateOp("CNOT", (ancillas[i], verify_qubit)),
            GateOp("CNOT", (ancillas[j], verify_qubit)),
            MeasureOp(verify_qubit, "z"),
            PostSelectOp((verify_qubit,), "zero"),
        ])
    if with_hadamards:
        ops.extend(GateOp("H", (a,)) for a in ancillas)
    name = f"shor-{size}" if with_hadamards else f"cat-{size}"
    logger.debug("%s on %s, %d verification(s)", name, ancillas, len(pairs))
    circuit = NoisyCircuit(n_qubits or _width(ancillas, (verify_qubit,)), ops, name=name)
    return ShorStateSpec(size, len(pairs), ancillas, verify_qubit, with_hadamards, circuit)


# -----------------------------
# Syndrome fragments
# -----------------------------
def build_syndrome_measurement(
    kind: str,
    generator_index: int,
    data: Sequence[int] = THETA_REGISTER,
    ancillas: Optional[Sequence[int]] = None,
    verify_qubit: int = VERIFY_QUBIT,
    predicate: str = "even",
    n_qubits: Optional[int] = None,
) -> NoisyCircuit:
    """
    One syndrome bit with a verified four-qubit ancilla, each ancilla qubit
    coupled to exactly one data qubit of the generator's support.

    phase-flip (X-type generator): cat state controls CNOTs onto the data,
    read out in the x basis. bit-flip (Z-type generator): Shor state is the
    CNOT target of the data, read out in the z basis.
    """
    if kind not in SYNDROME_KINDS:
        raise CircuitValidationError(f"unknown syndrome kind {kind!r}; expected one of {SYNDROME_KINDS}")
    if not 1 <= generator_index <= len(GENERATOR_SUPPORTS):
        raise CircuitValidationError(f"generator index must be 1..{len(GENERATOR_SUPPORTS)}, got {generator_index}")
    data = tuple(data)
    ancillas = tuple(ancillas if ancillas is not None else ANCILLA_BLOCK[:4])
    width = n_qubits or _width(data, ancillas, (verify_qubit,))
    support = [data[q] for q in STEANE.x_supports[generator_index - 1]]

    phase_flip = kind == "phase-flip"
    shor = build_shor_state(4, ancillas, verify_qubit, with_hadamards=not phase_flip, n_qubits=width)
    ops: List[BaseOp] = list(shor.circuit.ops)
    for a, d in zip(ancillas, support):
        ops.append(GateOp("CNOT", (a, d) if phase_flip else (d, a)))
    basis = "x" if phase_flip else "z"
    ops.extend(MeasureOp(a, basis) for a in ancillas)
    ops.append(PostSelectOp(ancillas, predicate))
    short = "x" if phase_flip else "z"
    return NoisyCircuit(width, ops, inputs=data, name=f"syndrome-{short}{generator_index}")


def _repeated_syndromes(kind: str, data, ancillas, verify_qubit, width) -> List[NoisyCircuit]:
    parts = []
    for index in range(1, len(GENERATOR_SUPPORTS) + 1):
        for _ in range(SYNDROME_REPETITIONS):
            parts.append(build_syndrome_measurement(kind, index, data, ancillas, verify_qubit, n_qubits=width))
    return parts


def build_ft_zero_encoder(
    data: Sequence[int] = THETA_REGISTER,
    ancillas: Optional[Sequence[int]] = None,
    verify_qubit: int = VERIFY_QUBIT,
    n_qubits: Optional[int] = None,
) -> NoisyCircuit:
    """Noisy |0> on every data qubit, then each phase-flip syndrome twice, all zero."""
    data = tuple(data)
    ancillas = tuple(ancillas if ancillas is not None else ANCILLA_BLOCK[:4])
    width = n_qubits or _width(data, ancillas, (verify_qubit,))
    inits = NoisyCircuit(width, [InitOp(q) for q in data], name="init")
    parts = [inits] + _repeated_syndromes("phase-flip", data, ancillas, verify_qubit, width)
    return NoisyCircuit.compose(width, parts, name="ft-zero-encoder")


def build_noisy_ec(
    data: Sequence[int] = THETA_REGISTER,
    ancillas: Optional[Sequence[int]] = None,
    verify_qubit: int = VERIFY_QUBIT,
    n_qubits: Optional[int] = None,
) -> NoisyCircuit:
    """Bit-flip syndromes then phase-flip syndromes, each twice, on the all-zero branch."""
    data = tuple(data)
    ancillas = tuple(ancillas if ancillas is not None else ANCILLA_BLOCK[:4])
    width = n_qubits or _width(data, ancillas, (verify_qubit,))
    parts = _repeated_syndromes("bit-flip", data, ancillas, verify_qubit, width)
    parts += _repeated_syndromes("phase-flip", data, ancillas, verify_qubit, width)
    ops: List[BaseOp] = []
    for part in parts:
        ops.extend(part.ops)
    logger.debug("noisy-ec: %d syndrome fragments, %d locations", len(parts), len(ops))
    return NoisyCircuit(width, ops, inputs=data, name="noisy-ec")


# -----------------------------
# Perfect correction and decoding
# -----------------------------
def syndrome_branches(
    tensor: np.ndarray, register: Sequence[int], floor: float = ENSEMBLE_COMPRESSION_FLOOR
) -> List[Tuple[Tuple[int, ...], np.ndarray]]:
    """
    Project one member onto every joint eigenspace of the six generators.

    Returns (syndrome bits, projected tensor); bit 1 means eigenvalue -1.
    Branches with vanishing norm are dropped as soon as they appear.
    """
    branches: List[Tuple[Tuple[int, ...], np.ndarray]] = [((), tensor)]
    for kind, support in STEANE.generators:
        axes = [register[q] for q in support]
        grown = []
        for bits, part in branches:
            flipped = apply_pauli_string(part, kind, axes)
            for bit, projected in ((0, (part + flipped) / 2), (1, (part - flipped) / 2)):
                if np.vdot(projected, projected).real > floor:
                    grown.append((bits + (bit,), projected))
        branches = grown
    return branches


def _syndrome_position(bits: Sequence[int]) -> int:
    """1-indexed qubit flagged by three generator bits, 0 for none."""
    return 4 * bits[0] + 2 * bits[1] + bits[2]


def correction_for(bits: Sequence[int]) -> List[Tuple[str, int]]:
    """Minimal-weight recovery (label, 0-indexed code qubit) for six syndrome bits."""
    out = []
    z_position = _syndrome_position(bits[:3])  # X-type generators see Z errors
    x_position = _syndrome_position(bits[3:])
    if x_position:
        out.append(("x", x_position - 1))
    if z_position:
        out.append(("z", z_position - 1))
    return out


def perfect_ec(ensemble: Ensemble, register: Sequence[int] = THETA_REGISTER) -> None:
    """Noiseless syndrome projection and recovery on one code block, in place."""
    corrected: List[np.ndarray] = []
    for member in ensemble.members:
        for bits, part in syndrome_branches(member, register):
            for label, q in correction_for(bits):
                part = apply_matrix_tensor(part, PAULI_MATRICES[label], [register[q]])
            corrected.append(part)
    ensemble.members = corrected
    ensemble.compress()


def recovery_kraus(length: int = CODE_LENGTH) -> List[np.ndarray]:
    """Dense operators C_s P_s of perfect correction, one per syndrome."""
    dim = 2**length
    out = []
    for column in range(dim):
        basis = np.zeros((2,) * length, dtype=complex)
        basis[np.unravel_index(column, (2,) * length)] = 1.0
        for bits, part in syndrome_branches(basis, tuple(range(length)), floor=0.0):
            for label, q in correction_for(bits):
                part = apply_matrix_tensor(part, PAULI_MATRICES[label], [q])
            out.append((bits, column, part.reshape(-1)))
    by_syndrome: Dict[Tuple[int, ...], np.ndarray] = {}
    for bits, column, vector in out:
        matrix = by_syndrome.setdefault(bits, np.zeros((dim, dim), dtype=complex))
        matrix[:, column] = vector
    return [by_syndrome[bits] for bits in sorted(by_syndrome)]


def perfect_decode(
    ensemble: Ensemble, register: Sequence[int] = THETA_REGISTER, weight: Optional[ErrorPoly] = None
) -> PolyMatrix:
    """
    One-qubit matrix after the ideal inverse encoder, rest of the block traced
    out, with every entry multiplied by the branch weight (1 when omitted).
    """
    weight = ErrorPoly.one() if weight is None else weight
    decoded = ensemble.copy()
    for op in inverse_encoder_ops(register):
        op.apply_ideal(decoded)
    matrix = decoded.view_matrix((register[0],), np.eye(2))
    return PolyMatrix.from_numeric(matrix, weight.max_degree).scale(weight)


def decoded_view(label: str, register: Sequence[int] = THETA_REGISTER) -> View:
    return View(label, (register[0],), np.eye(2), inverse_encoder_ops(register))


def logical_view(label: str, register: Sequence[int] = THETA_REGISTER) -> View:
    return View(label, tuple(register), STEANE.basis_rows())
