"""
|Theta> constructions, the teleported T gate and the staged pipelines.

Register layout (15 qubits):
    0..6    |Theta> block, later the T-gate output block
    7..13   ancilla block: cat states, then the input data block
    14      verification qubit

One pipeline circuit carries a probe after each stage, so a single engine
run yields the state, t-gate, t-gate+perfect-ec and t-gate+noisy-ec
observations. Each probe holds two views of the output block: "logical"
(basis |0_L>, |1_L>) and "decoded" (qubit 0 after the ideal inverse encoder).
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from circuit import NoisyCircuit, Target
from constants import (
    ANCILLA_BLOCK,
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    DEFAULT_ORDER,
    DEFAULT_PROJECTION_ROUNDS,
    DEFAULT_WORKERS,
    PIPELINE_QUBITS,
    POLY_VARIABLES,
    THETA_REGISTER,
    USABILITY_TOLERANCE,
    VERIFY_QUBIT,
)
from errors import ConfigError, RankDeficientFitError
from errpoly import ErrorPoly, PolyMatrix, poly_div_series
from noise_engine import EngineResult, check_order, reduced_views
from ops.base import BaseOp
from ops.gate_ops import GateOp, PrepareOp
from ops.ideal_ops import PerfectCorrectionOp, ProbeOp
from ops.measure_ops import InitOp, MeasureOp, PostSelectOp
from statevec import GATE_MATRICES
from steane import (
    STEANE,
    build_ft_zero_encoder,
    build_noisy_ec,
    build_shor_state,
    decoded_view,
    encoder_ops,
    logical_view,
)
from tomography import (
    QPT_LABELS,
    ChiMatrix,
    LinearResponse,
    chi_from_runs,
    gate_fidelity,
    ideal_chi,
    process_response,
    qpt_input_amplitudes,
)
from utils import Stopwatch, angle_grid

logger = logging.getLogger(__name__)

LOGICAL_VIEW = "logical"
DECODED_VIEW = "decoded"

STATE, T_GATE, PERFECT_EC, NOISY_EC = "state", "t-gate", "t-gate+perfect-ec", "t-gate+noisy-ec"
STAGES = (STATE, T_GATE, PERFECT_EC, NOISY_EC)

THETA_AMPLITUDES = np.array([1.0, np.exp(1j * math.pi / 4)], dtype=complex) / math.sqrt(2.0)
_EC_ANCILLAS = ANCILLA_BLOCK[:4]


class MethodId(enum.Enum):
    FT = "FT"    # fault-tolerant |0_L>, then projection onto |Theta>
    GE0 = "GE0"  # gate-encoded |0_L>, then projection onto |Theta>
    GET = "GET"  # gate-encoded |theta>, no projection

    @property
    def projects(self) -> bool:
        return self is not MethodId.GET

    @classmethod
    def parse(cls, value: str) -> "MethodId":
        try:
            return cls(value.upper())
        except ValueError:
            raise ConfigError(f"unknown method {value!r}; expected one of {[m.value for m in cls]}") from None


METHODS = tuple(MethodId)


@dataclass(frozen=True)
class PipelineConfig:
    method: MethodId
    stage: str = T_GATE
    projection_rounds: int = DEFAULT_PROJECTION_ROUNDS
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    order: int = DEFAULT_ORDER
    workers: int = DEFAULT_WORKERS

    def __post_init__(self):
        if not isinstance(self.method, MethodId):
            object.__setattr__(self, "method", MethodId.parse(str(self.method)))
        if self.stage not in STAGES:
            raise ConfigError(f"unknown stage {self.stage!r}; expected one of {STAGES}")
        if self.projection_rounds not in (1, 2):
            raise ConfigError(f"projection rounds must be 1 or 2, got {self.projection_rounds}")
        if self.workers < 1:
            raise ConfigError(f"worker count must be at least 1, got {self.workers}")
        check_order(self.order)

    @property
    def effective_rounds(self) -> Optional[int]:
        return self.projection_rounds if self.method.projects else None

    @property
    def input_amplitudes(self) -> np.ndarray:
        return input_amplitudes(self.alpha, self.beta)

    def describe(self) -> dict:
        return {
            "method": self.method.value,
            "stage": self.stage,
            "projection_rounds": self.effective_rounds,
            "alpha": self.alpha,
            "beta": self.beta,
            "order": self.order,
        }


def input_amplitudes(alpha: float, beta: float) -> np.ndarray:
    """cos(a)|0> + e^{ib} sin(a)|1>."""
    return np.array([math.cos(alpha), np.exp(1j * beta) * math.sin(alpha)], dtype=complex)


def t_gate_amplitudes(amplitudes: Sequence[complex]) -> np.ndarray:
    return GATE_MATRICES["T"] @ np.asarray(amplitudes, dtype=complex)


def stage_target(stage: str, amplitudes: Sequence[complex]) -> np.ndarray:
    """One-qubit (equivalently logical) target amplitudes of a stage."""
    if stage == STATE:
        return THETA_AMPLITUDES.copy()
    return t_gate_amplitudes(amplitudes)


# -----------------------------
# Circuit builders
# -----------------------------
def _projection_round() -> List[BaseOp]:
    cat = build_shor_state(7, ANCILLA_BLOCK, VERIFY_QUBIT, with_hadamards=False, n_qubits=PIPELINE_QUBITS)
    ops: List[BaseOp] = list(cat.circuit.ops)
    for a, d in zip(ANCILLA_BLOCK, THETA_REGISTER):
        ops.append(GateOp("CM", (a, d)))
    ops.extend(MeasureOp(a, "x") for a in ANCILLA_BLOCK)
    ops.append(PostSelectOp(ANCILLA_BLOCK, "even"))
    return ops


def construction_ops(method: MethodId, projection_rounds: int = DEFAULT_PROJECTION_ROUNDS) -> List[BaseOp]:
    if not isinstance(method, MethodId):
        method = MethodId.parse(str(method))
    if method is MethodId.FT:
        ops = list(build_ft_zero_encoder(THETA_REGISTER, _EC_ANCILLAS, VERIFY_QUBIT, PIPELINE_QUBITS).ops)
    else:
        ops = [InitOp(q) for q in THETA_REGISTER]
        if method is MethodId.GET:
            # |+> comes with the init; only the T on the information qubit is a noisy location
            ops += [GateOp("H", (THETA_REGISTER[0],), noisy=False), GateOp("T", (THETA_REGISTER[0],))]
        ops += list(encoder_ops(THETA_REGISTER))
    if method.projects:
        for _ in range(projection_rounds):
            ops += _projection_round()
    return ops


def build_theta_construction(
    method: MethodId, projection_rounds: int = DEFAULT_PROJECTION_ROUNDS
) -> NoisyCircuit:
    """Noisy |Theta> preparation on the output block, targeted at |Theta>."""
    method = method if isinstance(method, MethodId) else MethodId.parse(str(method))
    if projection_rounds not in (1, 2):
        raise ConfigError(f"projection rounds must be 1 or 2, got {projection_rounds}")
    target = Target(THETA_REGISTER, STEANE.encode(THETA_AMPLITUDES))
    return NoisyCircuit(
        PIPELINE_QUBITS, construction_ops(method, projection_rounds), target=target, name=f"{method.value}-theta"
    )


def teleport_ops(amplitudes: Sequence[complex]) -> List[BaseOp]:
    """Ideal |psi_L> on the data block, transversal CNOT, even-parity data readout."""
    ops: List[BaseOp] = [PrepareOp(ANCILLA_BLOCK, STEANE.encode(amplitudes), label="psi")]
    ops += [GateOp("CNOT", (c, t)) for c, t in zip(THETA_REGISTER, ANCILLA_BLOCK)]
    ops += [MeasureOp(q, "z") for q in ANCILLA_BLOCK]
    ops.append(PostSelectOp(ANCILLA_BLOCK, "even"))
    return ops


def _stage_probe(stage: str) -> ProbeOp:
    pre = (PerfectCorrectionOp(THETA_REGISTER),) if stage == PERFECT_EC else ()
    return ProbeOp(stage, (logical_view(LOGICAL_VIEW), decoded_view(DECODED_VIEW)), pre_ops=pre)


def pipeline_circuit(
    method: MethodId,
    projection_rounds: int,
    amplitudes: Sequence[complex],
    last_stage: str = NOISY_EC,
    target: Optional[Target] = None,
) -> NoisyCircuit:
    """Construction and T gate with a probe after each stage up to `last_stage`."""
    method = method if isinstance(method, MethodId) else MethodId.parse(str(method))
    wanted = STAGES[: STAGES.index(last_stage) + 1]
    ops = construction_ops(method, projection_rounds)
    ops.append(_stage_probe(STATE))
    if T_GATE in wanted:
        ops += teleport_ops(amplitudes)
        ops.append(_stage_probe(T_GATE))
    if PERFECT_EC in wanted:
        ops.append(_stage_probe(PERFECT_EC))
    if NOISY_EC in wanted:
        ops += list(build_noisy_ec(THETA_REGISTER, _EC_ANCILLAS, VERIFY_QUBIT, PIPELINE_QUBITS).ops)
        ops.append(_stage_probe(NOISY_EC))
    return NoisyCircuit(PIPELINE_QUBITS, ops, target=target, name=f"{method.value}-{last_stage}")


def build_t_gate_pipeline(config: PipelineConfig) -> NoisyCircuit:
    """The staged circuit for one input, targeted at the encoded T|psi>."""
    if config.stage == STATE:
        return build_theta_construction(config.method, config.projection_rounds)
    amplitudes = config.input_amplitudes
    decode = (PerfectCorrectionOp(THETA_REGISTER),) if config.stage == PERFECT_EC else ()
    target = Target(THETA_REGISTER, STEANE.encode(t_gate_amplitudes(amplitudes)), decode)
    return pipeline_circuit(config.method, config.projection_rounds, amplitudes, config.stage, target)


# -----------------------------
# Reports
# -----------------------------
@dataclass(frozen=True)
class FidelityReport:
    seven_qubit: ErrorPoly
    one_qubit_decoded: ErrorPoly
    metadata: Dict[str, object] = field(default_factory=dict)

    def first_order(self) -> Dict[str, Dict[str, float]]:
        return {"seven_qubit": self.seven_qubit.first_order(), "one_qubit": self.one_qubit_decoded.first_order()}


def stage_fidelities(
    logical: PolyMatrix, decoded: PolyMatrix, target: Sequence[complex]
) -> Tuple[ErrorPoly, ErrorPoly]:
    """Normalized 7-qubit and decoded fidelities from unnormalized views."""
    target = np.asarray(target, dtype=complex)
    denominator = decoded.trace()
    seven = poly_div_series(logical.expectation(target), denominator)
    one = poly_div_series(decoded.expectation(target), denominator)
    return seven, one


def run_fidelity_report(config: PipelineConfig) -> FidelityReport:
    """Direct engine run of one pipeline at the configured angles."""
    watch = Stopwatch()
    amplitudes = config.input_amplitudes
    circuit = pipeline_circuit(config.method, config.projection_rounds, amplitudes, config.stage)
    result = reduced_views(circuit, config.order, config.workers)
    probe = result.probe(config.stage)
    seven, one = stage_fidelities(
        probe.views[LOGICAL_VIEW], probe.views[DECODED_VIEW], stage_target(config.stage, amplitudes)
    )
    metadata = dict(config.describe(), engine=result.metadata, runtime_s=round(watch.elapsed(), 3))
    return FidelityReport(seven, one, metadata)


@dataclass(frozen=True)
class MethodRuns:
    """Engine results of one method for the four tomography inputs."""

    method: MethodId
    projection_rounds: int
    order: int
    results: Mapping[str, EngineResult]

    def outputs(self, stage: str, view: str) -> Dict[str, PolyMatrix]:
        return {label: self.results[label].probe(stage).views[view] for label in QPT_LABELS}

    def response(self, stage: str, view: str) -> LinearResponse:
        return process_response(self.outputs(stage, view))

    def chi(self, stage: str) -> ChiMatrix:
        return chi_from_runs(self.outputs(stage, DECODED_VIEW))

    def report(self, stage: str, alpha: float = DEFAULT_ALPHA, beta: float = DEFAULT_BETA) -> FidelityReport:
        """Fidelities for any input angle by linear extension of the four runs."""
        amplitudes = input_amplitudes(alpha, beta)
        logical = self.response(stage, LOGICAL_VIEW).for_state(amplitudes)
        decoded = self.response(stage, DECODED_VIEW).for_state(amplitudes)
        seven, one = stage_fidelities(logical, decoded, stage_target(stage, amplitudes))
        metadata = {
            "method": self.method.value,
            "stage": stage,
            "projection_rounds": self.projection_rounds if self.method.projects else None,
            "alpha": alpha,
            "beta": beta,
            "order": self.order,
        }
        return FidelityReport(seven, one, metadata)

    def gate_fidelity(self, stage: str) -> ErrorPoly:
        return gate_fidelity(self.chi(stage), ideal_chi(GATE_MATRICES["T"], self.order))

    def metadata(self) -> Dict[str, dict]:
        return {label: result.metadata for label, result in self.results.items()}


def run_method(
    method: MethodId,
    projection_rounds: int = DEFAULT_PROJECTION_ROUNDS,
    order: int = DEFAULT_ORDER,
    workers: int = DEFAULT_WORKERS,
    last_stage: str = NOISY_EC,
) -> MethodRuns:
    """Run the staged pipeline for each tomography input."""
    method = method if isinstance(method, MethodId) else MethodId.parse(str(method))
    results = {}
    for label, amplitudes in qpt_input_amplitudes().items():
        circuit = pipeline_circuit(method, projection_rounds, amplitudes, last_stage)
        logger.info("running %s for input |%s>", circuit.name, label)
        results[label] = reduced_views(circuit, order, workers)
    return MethodRuns(method, projection_rounds, order, results)


# -----------------------------
# Angle sweeps
# -----------------------------
FIT_BASIS = ("1", "cos4a", "sin2(2a)sin2b")


def fit_basis_row(alpha: float, beta: float) -> List[float]:
    return [1.0, math.cos(4 * alpha), math.sin(2 * alpha) ** 2 * math.sin(2 * beta)]


@dataclass(frozen=True)
class CoefficientFit:
    coefficients: Tuple[float, float, float]
    residual: float

    def value(self, alpha: float, beta: float) -> float:
        return float(np.dot(self.coefficients, fit_basis_row(alpha, beta)))


@dataclass(frozen=True)
class SweepResult:
    config: PipelineConfig
    points: List[Tuple[float, float, FidelityReport]]
    fits: Dict[str, Dict[str, CoefficientFit]]  # "seven_qubit" / "one_qubit" -> variable -> fit


def fit_coefficients(samples: Sequence[Tuple[float, float, float]]) -> CoefficientFit:
    """Least squares fit of (alpha, beta, value) samples to the trigonometric basis."""
    design = np.array([fit_basis_row(a, b) for a, b, _ in samples])
    values = np.array([v for _, _, v in samples])
    solution, _, rank, _ = np.linalg.lstsq(design, values, rcond=None)
    if rank < len(FIT_BASIS):
        raise RankDeficientFitError(f"angle grid gives a fit of rank {rank} < {len(FIT_BASIS)}")
    residual = float(np.max(np.abs(design @ solution - values))) if len(values) else 0.0
    return CoefficientFit(tuple(float(c) for c in solution), residual)


def angle_sweep(
    config: PipelineConfig,
    alphas: Sequence[float],
    betas: Sequence[float],
    runs: Optional[MethodRuns] = None,
) -> SweepResult:
    """Reports on the alpha x beta grid plus fits of every first-order coefficient."""
    if not len(alphas) or not len(betas):
        raise ConfigError("angle grids must be nonempty")
    if runs is None:
        runs = run_method(config.method, config.projection_rounds, config.order, config.workers, config.stage)
    points = [(a, b, runs.report(config.stage, a, b)) for a in alphas for b in betas]
    fits: Dict[str, Dict[str, CoefficientFit]] = {}
    for which in ("seven_qubit", "one_qubit"):
        fits[which] = {}
        for var in POLY_VARIABLES:
            samples = [(a, b, report.first_order()[which][var]) for a, b, report in points]
            fits[which][var] = fit_coefficients(samples)
    return SweepResult(config, points, fits)


def default_grid(points: int) -> Tuple[List[float], List[float]]:
    return angle_grid(points, math.pi), angle_grid(points, 2 * math.pi)


# -----------------------------
# Usability
# -----------------------------
@dataclass(frozen=True)
class UsabilityVerdict:
    method: MethodId
    projection_rounds: int
    usable: bool
    largest_first_order: float
    gate_fidelity: ErrorPoly
    worst_point: Tuple[float, float]


def usability_check(
    method: MethodId,
    projection_rounds: int = DEFAULT_PROJECTION_ROUNDS,
    workers: int = DEFAULT_WORKERS,
    grid_points: int = 4,
    runs: Optional[MethodRuns] = None,
) -> UsabilityVerdict:
    """
    A gate is usable when, after perfect correction, neither the gate fidelity
    nor the output fidelities at any grid angle have a first-order term.
    """
    method = method if isinstance(method, MethodId) else MethodId.parse(str(method))
    if runs is None:
        runs = run_method(method, projection_rounds, 1, workers, PERFECT_EC)
    fidelity = runs.gate_fidelity(PERFECT_EC)
    largest = max((abs(v) for v in fidelity.first_order().values()), default=0.0)
    worst = (float("nan"), float("nan"))
    alphas, betas = default_grid(grid_points)
    for a in alphas:
        for b in betas:
            report = runs.report(PERFECT_EC, a, b)
            for poly in (report.seven_qubit, report.one_qubit_decoded):
                biggest = max(abs(v) for v in poly.first_order().values())
                if biggest > largest:
                    largest, worst = biggest, (a, b)
    return UsabilityVerdict(
        method, projection_rounds, largest <= USABILITY_TOLERANCE, largest, fidelity, worst
    )
