"""Small circuits (at most six qubits) checked against the dense oracle."""

from __future__ import annotations

import cmath
import math
from dataclasses import replace
from typing import Callable, Collection, Dict, List, Sequence

import numpy as np

from circuit import NoisyCircuit, Target
from constants import DEFAULT_ALPHA, DEFAULT_BETA
from ops.base import BaseOp
from ops.gate_ops import GateOp, PrepareOp, ideal
from ops.measure_ops import InitOp, MeasureOp, PostSelectOp
from steane import build_shor_state

_R = 1.0 / math.sqrt(2.0)


def _basis_vector(n_bits: int, *indices: int) -> np.ndarray:
    """Uniform superposition of the listed computational basis states."""
    vec = np.zeros(2**n_bits, dtype=complex)
    vec[list(indices)] = 1.0
    return vec / np.linalg.norm(vec)


def _ghz(n_bits: int) -> np.ndarray:
    return _basis_vector(n_bits, 0, 2**n_bits - 1)


def _inits(*qubits: int) -> List:
    return [InitOp(q) for q in qubits]


def _quiet(*qubits: int) -> List:
    return [InitOp(q, noisy=False) for q in qubits]


def _noisy_only_at(ops: Sequence[BaseOp], keep: Collection[int]) -> List[BaseOp]:
    """Copies of `ops` with the noise switched off everywhere but at positions `keep`."""
    return [op if i in keep or not hasattr(op, "noisy") else replace(op, noisy=False) for i, op in enumerate(ops)]


def idle_gate() -> NoisyCircuit:
    ops = [InitOp(0, noisy=False), GateOp("I", (0,))]
    return NoisyCircuit(1, ops, Target((0,), [1, 0]), name="idle")


def hadamard() -> NoisyCircuit:
    ops = [InitOp(0, noisy=False), GateOp("H", (0,))]
    return NoisyCircuit(1, ops, Target((0,), [_R, _R]), name="hadamard")


def theta_state() -> NoisyCircuit:
    ops = _inits(0) + [GateOp("H", (0,)), GateOp("T", (0,))]
    return NoisyCircuit(1, ops, Target((0,), [_R, _R * cmath.exp(1j * math.pi / 4)]), name="theta")


def bell_pair() -> NoisyCircuit:
    ops = _quiet(0, 1) + [GateOp("H", (0,)), GateOp("CNOT", (0, 1))]
    return NoisyCircuit(2, ops, Target((0, 1), _ghz(2)), name="bell")


def ghz3() -> NoisyCircuit:
    ops = _quiet(0, 1) + _inits(2) + [ideal("H", 0), ideal("CNOT", 0, 1), GateOp("CNOT", (1, 2))]
    return NoisyCircuit(3, ops, Target((0, 1, 2), _ghz(3)), name="ghz3")


def verified_ghz3() -> NoisyCircuit:
    ops = _quiet(0, 1, 2) + [ideal("H", 0), ideal("CNOT", 0, 1), ideal("CNOT", 1, 2)]
    ops += [
        InitOp(3, noisy=False),
        GateOp("CNOT", (0, 3)),
        ideal("CNOT", 2, 3),
        MeasureOp(3, "z"),
        PostSelectOp((3,), "zero"),
    ]
    return NoisyCircuit(4, ops, Target((0, 1, 2), _ghz(3)), name="verified-ghz3")


def shor_state4() -> NoisyCircuit:
    """Shor state with noise on the last chain CNOT and the first verification readout."""
    spec = build_shor_state(4, ancillas=(0, 1, 2, 3), verify_qubit=4, n_qubits=5)
    # 4 inits, H, chain CNOTs at 5..7, then init, CNOT, CNOT, measure per verification
    ops = _noisy_only_at(spec.circuit.ops, keep=(7, 11))
    even = [c for c in range(16) if bin(c).count("1") % 2 == 0]
    return NoisyCircuit(5, ops, Target((0, 1, 2, 3), _basis_vector(4, *even)), name=spec.circuit.name)


def cm_projection() -> NoisyCircuit:
    """Controlled-M on |+>|0>, control read out in x; keeps the +1 eigenvector of M."""
    ops = _quiet(0, 1) + [
        ideal("H", 0),
        GateOp("CM", (0, 1)),
        MeasureOp(0, "x"),
        PostSelectOp((0,), "zero"),
    ]
    target = [_R, _R * cmath.exp(-1j * math.pi / 4)]
    return NoisyCircuit(2, ops, Target((1,), target), name="cm-projection")


def t_teleport() -> NoisyCircuit:
    amps = np.array([math.cos(DEFAULT_ALPHA), cmath.exp(1j * DEFAULT_BETA) * math.sin(DEFAULT_ALPHA)])
    ops = _quiet(0) + [
        ideal("H", 0),
        GateOp("T", (0,)),
        PrepareOp((1,), amps, label="psi"),
        GateOp("CNOT", (0, 1)),
        MeasureOp(1, "z", noisy=False),
        PostSelectOp((1,), "zero"),
    ]
    target = amps * np.array([1.0, cmath.exp(1j * math.pi / 4)])
    return NoisyCircuit(2, ops, Target((0,), target), name="t-teleport")


def x_parity_check() -> NoisyCircuit:
    ops = _quiet(0, 1) + [ideal("H", 0), ideal("H", 1)]
    ops += [
        InitOp(2),
        ideal("H", 2),
        ideal("CNOT", 2, 0),
        GateOp("CNOT", (2, 1)),
        MeasureOp(2, "x", noisy=False),
        PostSelectOp((2,), "zero"),
    ]
    return NoisyCircuit(3, ops, Target((0, 1), _basis_vector(2, 0, 1, 2, 3)), name="x-parity")


def reused_ancilla() -> NoisyCircuit:
    """Two readouts through the same ancilla, outcomes discarded; dephases qubit 0."""
    ops = _quiet(0) + [ideal("H", 0)]
    for first in (True, False):
        ops += [InitOp(1, noisy=first), ideal("CNOT", 0, 1), MeasureOp(1, "z"), PostSelectOp((1,), "any")]
    return NoisyCircuit(2, ops, Target((0,), [_R, _R]), name="reused-ancilla")


def odd_parity() -> NoisyCircuit:
    ops = _quiet(0, 1, 2) + [
        ideal("X", 0),
        GateOp("H", (1,)),
        GateOp("CNOT", (0, 2)),
        MeasureOp(0, "z", noisy=False),
        PostSelectOp((0,), "odd"),
    ]
    return NoisyCircuit(3, ops, Target((1, 2), _basis_vector(2, 1, 3)), name="odd-parity")


def ghz6_x_readout() -> NoisyCircuit:
    """GHZ-6, two qubits read in x with even parity leaves GHZ-4; noise near the readout only."""
    ops = _quiet(*range(6)) + [ideal("H", 0)]
    ops += [ideal("CNOT", q, q + 1) for q in range(3)]
    ops += [GateOp("CNOT", (3, 4)), ideal("CNOT", 4, 5)]
    ops += [MeasureOp(4, "x"), MeasureOp(5, "x", noisy=False), PostSelectOp((4, 5), "even")]
    return NoisyCircuit(6, ops, Target((0, 1, 2, 3), _ghz(4)), name="ghz6-x-readout")


def undone_bell() -> NoisyCircuit:
    """Bell pair undone by ideal gates, so only the noisy half contributes."""
    ops = _quiet(0, 1) + [
        GateOp("H", (0,)),
        GateOp("CNOT", (0, 1)),
        ideal("CNOT", 0, 1),
        ideal("H", 0),
    ]
    return NoisyCircuit(2, ops, Target((0, 1), [1, 0, 0, 0]), name="undone-bell")


CORPUS: Dict[str, Callable[[], NoisyCircuit]] = {
    "idle": idle_gate,
    "hadamard": hadamard,
    "theta": theta_state,
    "bell": bell_pair,
    "ghz3": ghz3,
    "verified-ghz3": verified_ghz3,
    "shor-4": shor_state4,
    "cm-projection": cm_projection,
    "t-teleport": t_teleport,
    "x-parity": x_parity_check,
    "reused-ancilla": reused_ancilla,
    "odd-parity": odd_parity,
    "ghz6-x-readout": ghz6_x_readout,
    "undone-bell": undone_bell,
}


def oracle_corpus() -> List[NoisyCircuit]:
    return [build() for build in CORPUS.values()]
