"""
Dense density-matrix oracle.

Evolves rho through every location with the complete Pauli channel (no
truncation), so its fidelities are exact in (px, py, pz). Only meant for
small circuits: the density matrix is a (2,)*2n tensor, n <= ORACLE_MAX_QUBITS.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from circuit import NoisyCircuit
from constants import (
    ORACLE_BOUND_FACTOR,
    ORACLE_CHECK_ORDERS,
    ORACLE_CHECK_PROBABILITIES,
    ORACLE_MAX_QUBITS,
    ORACLE_ROUNDOFF_FLOOR,
)
from errors import ConfigError, OracleSizeError
from errpoly import poly_eval
from noise_engine import fidelity_polynomial
from ops.base import BaseOp
from ops.gate_ops import GateOp, PrepareOp
from ops.ideal_ops import PerfectCorrectionOp, ProbeOp
from ops.measure_ops import InitOp, MeasureOp, PostSelectOp
from statevec import BASIS_ROTATIONS, GATE_MATRICES, PAULI_MATRICES, apply_matrix_tensor

logger = logging.getLogger(__name__)


def _blocks_of(rho: np.ndarray, n: int, qubits: Sequence[int]) -> Tuple[np.ndarray, List[int], List[int]]:
    """View rho as (rest, rest, 2^m, 2^m) with `qubits` moved last."""
    m = len(qubits)
    source = list(qubits) + [n + q for q in qubits]
    dest = list(range(2 * n - 2 * m, 2 * n))
    moved = np.moveaxis(rho, source, dest)
    rest = 2 ** (n - m)
    return moved.reshape(rest, rest, 2**m, 2**m), source, dest


class DensityMatrix:
    """rho as a (2,)*2n tensor: row axes 0..n-1, column axes n..2n-1."""

    def __init__(self, n_qubits: int):
        if n_qubits > ORACLE_MAX_QUBITS:
            raise OracleSizeError(f"{n_qubits} qubits exceeds the {ORACLE_MAX_QUBITS}-qubit oracle cap")
        self.n = n_qubits
        rho = np.zeros((2,) * (2 * n_qubits), dtype=complex)
        rho[(0,) * (2 * n_qubits)] = 1.0
        self.rho = rho

    def trace(self) -> float:
        dim = 2**self.n
        return float(np.trace(self.rho.reshape(dim, dim)).real)

    def conjugate(self, matrix: np.ndarray, targets: Sequence[int]) -> None:
        """rho -> A rho A^dag."""
        self.rho = self._sandwich(self.rho, matrix, targets)

    def _sandwich(self, rho: np.ndarray, matrix: np.ndarray, targets: Sequence[int]) -> np.ndarray:
        out = apply_matrix_tensor(rho, matrix, list(targets))
        return apply_matrix_tensor(out, matrix.conj(), [self.n + q for q in targets])

    def kraus(self, operators: Iterable[np.ndarray], targets: Sequence[int]) -> None:
        total = np.zeros_like(self.rho)
        for op in operators:
            total = total + self._sandwich(self.rho, op, targets)
        self.rho = total

    def pauli_channel(self, qubit: int, px: float, py: float, pz: float) -> None:
        p0 = 1.0 - px - py - pz
        total = p0 * self.rho
        for label, p in (("x", px), ("y", py), ("z", pz)):
            if p:
                total = total + p * self._sandwich(self.rho, PAULI_MATRICES[label], [qubit])
        self.rho = total

    def _blocks(self, qubits: Sequence[int]) -> Tuple[np.ndarray, List[int], List[int]]:
        return _blocks_of(self.rho, self.n, qubits)

    def _restore(self, blocks: np.ndarray, source: List[int], dest: List[int]) -> None:
        tensor = blocks.reshape((2,) * (2 * self.n))
        self.rho = np.moveaxis(tensor, dest, source)

    def keep_and_reset(self, qubits: Sequence[int], accepted: np.ndarray) -> None:
        """Project onto accepted outcomes, trace the qubits out and put them in |0>."""
        blocks, source, dest = self._blocks(qubits)
        kept = np.flatnonzero(accepted)
        out = np.zeros_like(blocks)
        out[:, :, 0, 0] = blocks[:, :, kept, kept].sum(axis=2)
        self._restore(out, source, dest)

    def prepare(self, qubits: Sequence[int], vector: np.ndarray) -> None:
        blocks, source, dest = self._blocks(qubits)
        rest = blocks[:, :, 0, 0]
        out = rest[:, :, None, None] * np.outer(vector, vector.conj())[None, None, :, :]
        self._restore(out, source, dest)

    def reduced(self, register: Sequence[int]) -> np.ndarray:
        """Tr_rest(rho) as a 2^r x 2^r matrix."""
        rest = [q for q in range(self.n) if q not in register]
        if rest:
            blocks, _, _ = _blocks_of(self.rho, self.n, rest)
            traced = np.einsum("abcc->ab", blocks)
        else:
            traced = self.rho.reshape(2**self.n, 2**self.n)
        # remaining axes keep ascending qubit order, so reorder to `register`
        r = len(register)
        order = sorted(register)
        perm = [order.index(q) for q in register]
        tensor = traced.reshape((2,) * (2 * r))
        tensor = np.transpose(tensor, perm + [r + p for p in perm])
        return tensor.reshape(2**r, 2**r)

    def copy(self) -> "DensityMatrix":
        clone = DensityMatrix.__new__(DensityMatrix)
        clone.n = self.n
        clone.rho = self.rho.copy()
        return clone


def _apply_ideal(dm: DensityMatrix, op: BaseOp) -> None:
    if isinstance(op, GateOp):
        dm.conjugate(GATE_MATRICES[op.kind], op.targets)
    elif isinstance(op, InitOp):
        dm.keep_and_reset((op.qubit,), np.array([True, True]))
    elif isinstance(op, MeasureOp):
        if op.basis != "z":
            dm.conjugate(BASIS_ROTATIONS[op.basis], (op.qubit,))
    elif isinstance(op, PostSelectOp):
        dm.keep_and_reset(op.targets, op.accepted)
    elif isinstance(op, PrepareOp):
        dm.prepare(op.register, op.vector)
    elif isinstance(op, PerfectCorrectionOp):
        from steane import recovery_kraus

        dm.kraus(recovery_kraus(), op.register)
    elif isinstance(op, ProbeOp):
        return
    else:
        raise ConfigError(f"the oracle does not support {type(op).__name__}")


@dataclass(frozen=True)
class OracleResult:
    accept_prob: float
    fidelity: float


def dense_channel_oracle(circuit: NoisyCircuit, px: float, py: float, pz: float) -> OracleResult:
    """Exact acceptance probability and normalized target fidelity."""
    if circuit.target is None:
        raise ConfigError(f"{circuit.name} has no target state")
    dm = DensityMatrix(circuit.n_qubits)
    for op in circuit.ops:
        if op.errors_before:
            for q in op.noise_qubits:
                dm.pauli_channel(q, px, py, pz)
        _apply_ideal(dm, op)
        if not op.errors_before:
            for q in op.noise_qubits:
                dm.pauli_channel(q, px, py, pz)
    accept = dm.trace()
    if accept <= 0.0:
        return OracleResult(0.0, 0.0)
    decoded = dm.copy()
    for op in circuit.target.decode_ops:
        _apply_ideal(decoded, op)
    target = circuit.target.state
    reduced = decoded.reduced(circuit.target.register)
    overlap = float(np.vdot(target, reduced @ target).real)
    return OracleResult(accept, overlap / accept)


# -----------------------------
# Engine vs oracle
# -----------------------------
@dataclass(frozen=True)
class OracleCheck:
    circuit: str
    order: int
    p: float
    engine: float
    oracle: float
    bound: float

    @property
    def difference(self) -> float:
        return abs(self.engine - self.oracle)

    @property
    def scaled_deviation(self) -> float:
        """|difference| / p^(K+1)."""
        return self.difference / self.p ** (self.order + 1) if self.p else 0.0

    @property
    def passed(self) -> bool:
        return self.difference <= self.bound

    def to_record(self) -> dict:
        return {
            "circuit": self.circuit,
            "order": self.order,
            "p": self.p,
            "engine": self.engine,
            "oracle": self.oracle,
            "difference": self.difference,
            "scaled_deviation": self.scaled_deviation,
            "bound": self.bound,
            "pass": self.passed,
        }


def oracle_check(
    circuits: Iterable[NoisyCircuit],
    probabilities: Sequence[float] = ORACLE_CHECK_PROBABILITIES,
    orders: Sequence[int] = ORACLE_CHECK_ORDERS,
) -> List[OracleCheck]:
    """
    Compare truncated engine fidelities with the exact oracle at px = py = pz = p.

    The allowed gap is ORACLE_BOUND_FACTOR * p^(K+1).
    """
    checks = []
    for circuit in circuits:
        for order in orders:
            result = fidelity_polynomial(circuit, order)
            for p in probabilities:
                engine = poly_eval(result.fidelity, p, p, p)
                exact = dense_channel_oracle(circuit, p, p, p).fidelity
                bound = ORACLE_BOUND_FACTOR * p ** (order + 1)
                check = OracleCheck(circuit.name, order, p, engine, exact, bound)
                logger.debug(
                    "%s K=%d p=%g: diff %.3e (scaled %.3g)", circuit.name, order, p,
                    check.difference, check.scaled_deviation,
                )
                checks.append(check)
    return checks


def observed_orders(checks: Iterable[OracleCheck]) -> Dict[Tuple[str, int], Optional[float]]:
    """
    Slope of log|difference| against log p for every (circuit, K), taken
    between its largest and smallest p. A correct truncation gives about
    K + 1; None when a difference is at round-off level (the series is exact).
    """
    by_key: Dict[Tuple[str, int], List[OracleCheck]] = {}
    for check in checks:
        by_key.setdefault((check.circuit, check.order), []).append(check)
    slopes: Dict[Tuple[str, int], Optional[float]] = {}
    for key, group in by_key.items():
        group.sort(key=lambda c: c.p)
        low, high = group[0], group[-1]
        if low.p == high.p or min(low.difference, high.difference) <= ORACLE_ROUNDOFF_FLOOR:
            slopes[key] = None
            continue
        slopes[key] = math.log(high.difference / low.difference) / math.log(high.p / low.p)
    return slopes
