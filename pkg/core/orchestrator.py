"""
Command orchestrator.

`main.py` stays thin: parse args -> RunConfig -> orchestrator -> render.
This module owns the wiring between pipelines, tomography, the reference
tables and the oracle, and turns results into a `Report`.
"""

from __future__ import annotations

import contextlib
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from circuit import NoisyCircuit
from constants import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    DEFAULT_ORDER,
    DEFAULT_PROJECTION_ROUNDS,
    DEFAULT_WORKERS,
    JSON_SCHEMA_VERSION,
    ORACLE_CHECK_ORDERS,
    OUTPUT_FORMATS,
    POLY_VARIABLES,
    SWEEP_GRID_POINTS,
)
from errors import ConfigError, SimulationError
from errpoly import ErrorPoly
from noise_engine import check_order
from oracle import OracleCheck, observed_orders, oracle_check
from oracle_corpus import oracle_corpus
from protocols import (
    FIT_BASIS,
    METHODS,
    NOISY_EC,
    PERFECT_EC,
    STAGES,
    STATE,
    T_GATE,
    MethodId,
    MethodRuns,
    PipelineConfig,
    SweepResult,
    angle_sweep,
    build_t_gate_pipeline,
    default_grid,
    run_fidelity_report,
    run_method,
)
from reference import CellComparison, ComputedCell, ReferenceTables, compare_cell
from utils import Stopwatch, csv_text, json_text, markdown_table, rational_string

logger = logging.getLogger(__name__)

COMMANDS = ("table1", "table2", "table3", "sweep", "oracle-check", "dump-circuit")
GATE_STAGES = (T_GATE, PERFECT_EC, NOISY_EC)
STATE_TARGETS = ("seven_qubit", "one_qubit")
_SINGLE_METHOD_COMMANDS = ("sweep", "dump-circuit")
_FIT_ZERO = 1e-9


# -----------------------------
# Configuration
# -----------------------------
@dataclass(frozen=True)
class RunConfig:
    """Validated command configuration; built once from argparse."""

    command: str
    methods: Tuple[MethodId, ...] = ()
    stages: Tuple[str, ...] = ()
    order: Optional[int] = None
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    grid: int = SWEEP_GRID_POINTS
    rounds: Optional[int] = None
    compare: bool = False
    output_format: str = "json"
    workers: int = DEFAULT_WORKERS
    out: Optional[str] = None
    plot: Optional[str] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; expected one of {COMMANDS}")
        object.__setattr__(
            self, "methods",
            tuple(m if isinstance(m, MethodId) else MethodId.parse(str(m)) for m in self.methods),
        )
        object.__setattr__(self, "stages", tuple(self.stages))
        for stage in self.stages:
            if stage not in STAGES:
                raise ConfigError(f"unknown stage {stage!r}; expected one of {STAGES}")
        if self.command in ("table2", "table3") and STATE in self.stages:
            raise ConfigError(f"{self.command} reports T-gate stages only; drop --stage {STATE}")
        if self.command == "table1" and any(s != STATE for s in self.stages):
            raise ConfigError("table1 reports the |Theta> state only; --stage must be 'state' or omitted")
        if self.command in _SINGLE_METHOD_COMMANDS and (len(self.methods) > 1 or len(self.stages) > 1):
            raise ConfigError(f"{self.command} takes a single --method and a single --stage")
        if self.order is not None:
            check_order(self.order)
        if self.rounds is not None:
            if self.rounds not in (1, 2):
                raise ConfigError(f"--rounds must be 1 or 2, got {self.rounds}")
            if self.methods and all(not m.projects for m in self.methods):
                raise ConfigError("--rounds has no effect on GET, which does not project onto |Theta>")
        if self.grid < 1:
            raise ConfigError(f"--grid must be at least 1, got {self.grid}")
        if self.workers < 1:
            raise ConfigError(f"--workers must be at least 1, got {self.workers}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"unknown format {self.output_format!r}; expected one of {OUTPUT_FORMATS}")
        if self.compare and self.effective_order == 0:
            raise ConfigError("--compare checks first-order coefficients; use --order 1 or 2")

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        return cls(
            command=args.command,
            methods=tuple(args.method or ()),
            stages=tuple(args.stage or ()),
            order=args.order,
            alpha=args.alpha,
            beta=args.beta,
            grid=args.grid,
            rounds=args.rounds,
            compare=args.compare,
            output_format=args.format,
            workers=args.workers,
            out=args.out,
            plot=getattr(args, "plot", None),
        )

    @property
    def effective_order(self) -> int:
        return DEFAULT_ORDER if self.order is None else self.order

    @property
    def projection_rounds(self) -> int:
        return DEFAULT_PROJECTION_ROUNDS if self.rounds is None else self.rounds

    @property
    def selected_methods(self) -> Tuple[MethodId, ...]:
        if self.methods:
            return self.methods
        return (MethodId.FT,) if self.command in _SINGLE_METHOD_COMMANDS else METHODS

    @property
    def selected_stages(self) -> Tuple[str, ...]:
        if self.stages:
            return self.stages
        if self.command == "table1":
            return (STATE,)
        if self.command in _SINGLE_METHOD_COMMANDS:
            return (T_GATE,)
        return GATE_STAGES

    def pipeline(self, method: MethodId, stage: str) -> PipelineConfig:
        return PipelineConfig(
            method, stage, self.projection_rounds, self.alpha, self.beta, self.effective_order, self.workers
        )

    def describe(self) -> dict:
        return {
            "methods": [m.value for m in self.selected_methods],
            "stages": list(self.selected_stages),
            "order": self.effective_order,
            "projection_rounds": self.projection_rounds,
            "alpha": self.alpha,
            "beta": self.beta,
            "grid": self.grid,
            "workers": self.workers,
            "compare": self.compare,
        }


# -----------------------------
# Reports
# -----------------------------
@dataclass(frozen=True)
class TableCell:
    """One printed table entry: the polynomial plus its first-order fit."""

    computed: ComputedCell
    polynomial: ErrorPoly
    comparison: Optional[CellComparison] = None

    @property
    def passed(self) -> bool:
        return self.comparison is None or self.comparison.passed

    def first_order_text(self) -> str:
        return "; ".join(f"{v}: {fit_text(self.computed.coefficients[v])}" for v in POLY_VARIABLES)

    def to_record(self) -> dict:
        cell = self.computed
        record = {
            "table": cell.table,
            "method": cell.method,
            "stage": cell.stage,
            "target": cell.target,
            "polynomial": self.polynomial.format(),
            "terms": self.polynomial.to_json(),
            "computed": {v: list(c) for v, c in cell.coefficients.items()},
        }
        if self.comparison is not None:
            record["reference"] = {v: list(c) for v, c in self.comparison.reference.coefficients.items()}
            record["max_difference"] = self.comparison.max_difference
            record["pass"] = self.comparison.passed
        return record


def fit_text(coefficients: Sequence[float]) -> str:
    """'-9/4 - 3/4 cos4a' style rendering of basis coefficients."""
    pieces: List[str] = []
    for value, name in zip(coefficients, FIT_BASIS):
        if abs(value) <= _FIT_ZERO:
            continue
        magnitude = rational_string(abs(value))
        body = magnitude if name == "1" else f"{magnitude} {name}"
        if not pieces:
            pieces.append(body if value > 0 else f"-{body}")
        else:
            pieces.append(f"{'-' if value < 0 else '+'} {body}")
    return " ".join(pieces) if pieces else "0"


@dataclass
class Report:
    command: str
    order: int
    cells: List[dict]
    columns: List[str]
    rows: List[List[object]]
    metadata: Dict[str, object] = field(default_factory=dict)
    passed: bool = True
    title: str = ""

    def to_json(self) -> dict:
        return {
            "schema": JSON_SCHEMA_VERSION,
            "command": self.command,
            "order": self.order,
            "cells": self.cells,
            "metadata": self.metadata,
        }


def render(report: Report, output_format: str) -> str:
    if output_format == "json":
        return json_text(report.to_json())
    if output_format == "csv":
        return csv_text(report.columns, report.rows).rstrip("\n")
    heading = f"## {report.title or report.command} (order {report.order})"
    return f"{heading}\n\n{markdown_table(report.columns, report.rows)}"


# -----------------------------
# Orchestrator
# -----------------------------
class SimulationOrchestrator:
    """Runs one command and collects its report."""

    def __init__(self, config: RunConfig):
        self.config = config
        self._runs: Dict[MethodId, MethodRuns] = {}
        self._reference: Optional[ReferenceTables] = None

    @property
    def reference(self) -> ReferenceTables:
        if self._reference is None:
            self._reference = ReferenceTables.load()
        return self._reference

    def run(self) -> Report:
        cfg = self.config
        if cfg.effective_order >= 2 and cfg.command not in ("oracle-check", "dump-circuit"):
            warnings.warn(
                "order-2 pipeline runs enumerate every pair of errors and can take hours",
                RuntimeWarning,
                stacklevel=2,
            )
        handler = {
            "table1": self.cmd_table1,
            "table2": self.cmd_table2,
            "table3": self.cmd_table3,
            "sweep": self.cmd_sweep,
            "oracle-check": self.cmd_oracle_check,
            "dump-circuit": self.cmd_dump_circuit,
        }[cfg.command]
        watch = Stopwatch()
        report = handler()
        report.metadata.setdefault("config", cfg.describe())
        report.metadata["runtime_s"] = round(watch.elapsed(), 3)
        logger.info("%s finished in %.1fs", cfg.command, watch.elapsed())
        return report

    @contextlib.contextmanager
    def _pipeline(self, name: str) -> Iterator[None]:
        """Re-raise engine errors with the failing pipeline named."""
        try:
            yield
        except SimulationError as exc:
            raise type(exc)(f"pipeline {name}: {exc}") from exc

    def _method_runs(self, method: MethodId) -> MethodRuns:
        if method not in self._runs:
            cfg = self.config
            with self._pipeline(f"{method.value}-{NOISY_EC}"):
                self._runs[method] = run_method(
                    method, cfg.projection_rounds, cfg.effective_order, cfg.workers, NOISY_EC
                )
        return self._runs[method]

    def _table_cell(self, computed: ComputedCell, polynomial: ErrorPoly) -> TableCell:
        comparison = None
        if self.config.compare:
            comparison = compare_cell(computed, self.reference.get(*computed.key))
            if not comparison.passed:
                logger.warning("%s differs from the reference by %.3g", computed.key, comparison.max_difference)
        return TableCell(computed, polynomial, comparison)

    def _table_report(self, table: str, cells: List[TableCell], metadata: dict) -> Report:
        columns = ["method", "stage", "target", "polynomial", "first order"]
        if self.config.compare:
            columns.append("pass")
        rows = []
        for cell in cells:
            row = [cell.computed.method, cell.computed.stage, cell.computed.target,
                   cell.polynomial.format(), cell.first_order_text()]
            if self.config.compare:
                row.append("pass" if cell.passed else "FAIL")
            rows.append(row)
        if self.config.output_format == "csv":
            columns, rows = _csv_columns(self.config.compare), _csv_rows(cells)
        if self.config.compare:
            metadata["reference"] = self.reference.source
            metadata["passed_cells"] = sum(c.passed for c in cells)
        return Report(
            table, self.config.effective_order, [c.to_record() for c in cells], columns, rows,
            metadata, all(c.passed for c in cells), title=table,
        )

    # ----- commands -----
    def cmd_table1(self) -> Report:
        """Fidelity of the constructed |Theta> and of its decoded |theta>."""
        cfg = self.config
        cells: List[TableCell] = []
        metadata: Dict[str, object] = {"pipelines": {}}
        for method in cfg.selected_methods:
            with self._pipeline(f"{method.value}-{STATE}"):
                report = run_fidelity_report(cfg.pipeline(method, STATE))
            metadata["pipelines"][method.value] = report.metadata
            for target, poly in zip(STATE_TARGETS, (report.seven_qubit, report.one_qubit_decoded)):
                computed = ComputedCell.constant("table1", method.value, STATE, target, poly.first_order())
                cells.append(self._table_cell(computed, poly))
        return self._table_report("table1", cells, metadata)

    def cmd_table2(self) -> Report:
        """Output fidelities after the T gate, fitted over the angle grid."""
        cfg = self.config
        alphas, betas = default_grid(cfg.grid)
        cells: List[TableCell] = []
        metadata: Dict[str, object] = {"pipelines": {}, "grid": {"alpha": alphas, "beta": betas}}
        for method in cfg.selected_methods:
            runs = self._method_runs(method)
            metadata["pipelines"][method.value] = runs.metadata()
            for stage in cfg.selected_stages:
                with self._pipeline(f"{method.value}-{stage}"):
                    sweep = angle_sweep(cfg.pipeline(method, stage), alphas, betas, runs=runs)
                    headline = runs.report(stage, cfg.alpha, cfg.beta)
                for target, poly in zip(STATE_TARGETS, (headline.seven_qubit, headline.one_qubit_decoded)):
                    cells.append(self._table_cell(_swept_cell("table2", sweep, target), poly))
        return self._table_report("table2", cells, metadata)

    def cmd_table3(self) -> Report:
        """Gate fidelity Tr[chi(p) chi(0)] of the logical T gate."""
        cfg = self.config
        cells: List[TableCell] = []
        metadata: Dict[str, object] = {"pipelines": {}}
        for method in cfg.selected_methods:
            runs = self._method_runs(method)
            metadata["pipelines"][method.value] = runs.metadata()
            for stage in cfg.selected_stages:
                with self._pipeline(f"{method.value}-{stage}"):
                    fidelity = runs.gate_fidelity(stage)
                computed = ComputedCell.constant("table3", method.value, stage, "gate", fidelity.first_order())
                cells.append(self._table_cell(computed, fidelity))
        return self._table_report("table3", cells, metadata)

    def cmd_sweep(self) -> Report:
        """Fit coefficients of one method and stage over the angle grid."""
        cfg = self.config
        method, stage = cfg.selected_methods[0], cfg.selected_stages[0]
        if stage == STATE:
            raise ConfigError("the |Theta> state does not depend on the input angles; sweep a T-gate stage")
        alphas, betas = default_grid(cfg.grid)
        runs = self._method_runs(method)
        with self._pipeline(f"{method.value}-{stage}"):
            sweep = angle_sweep(cfg.pipeline(method, stage), alphas, betas, runs=runs)
        cells = [_swept_cell("table2", sweep, target) for target in STATE_TARGETS]
        comparisons = [compare_cell(c, self.reference.get(*c.key)) for c in cells] if cfg.compare else []

        records, rows = [], []
        for target in STATE_TARGETS:
            for var in POLY_VARIABLES:
                fit = sweep.fits[target][var]
                records.append({
                    "method": method.value,
                    "stage": stage,
                    "target": target,
                    "variable": var,
                    "basis": list(FIT_BASIS),
                    "coefficients": list(fit.coefficients),
                    "residual": fit.residual,
                })
                rows.append([target, var, fit_text(fit.coefficients), f"{fit.residual:.2e}"])
        for comparison in comparisons:
            for record in records:
                if record["target"] == comparison.computed.target:
                    record["pass"] = comparison.passed
        metadata: Dict[str, object] = {
            "pipeline": runs.metadata(),
            "grid": {"alpha": alphas, "beta": betas},
            "samples": [
                {"alpha": a, "beta": b, "first_order": r.first_order()} for a, b, r in sweep.points
            ],
        }
        if cfg.plot:
            save_sweep_plot(sweep, cfg.plot)
            metadata["plot"] = cfg.plot
        return Report(
            "sweep", cfg.effective_order, records, ["target", "variable", "fit", "residual"], rows,
            metadata, all(c.passed for c in comparisons), title=f"sweep {method.value} {stage}",
        )

    def cmd_oracle_check(self) -> Report:
        """Engine against the exact oracle on the bundled corpus."""
        cfg = self.config
        orders = (cfg.order,) if cfg.order is not None else ORACLE_CHECK_ORDERS
        checks: List[OracleCheck] = oracle_check(oracle_corpus(), orders=orders)
        failed = [c for c in checks if not c.passed]
        for check in failed:
            logger.warning(
                "%s K=%d p=%g: |difference| %.3e exceeds %.3e",
                check.circuit, check.order, check.p, check.difference, check.bound,
            )
        rows = [
            [c.circuit, c.order, f"{c.p:g}", f"{c.difference:.3e}", f"{c.scaled_deviation:.3g}",
             f"{c.bound:.3e}", "pass" if c.passed else "FAIL"]
            for c in checks
        ]
        metadata = {
            "circuits": len({c.circuit for c in checks}),
            "orders": list(orders),
            "max_difference": max((c.difference for c in checks), default=0.0),
            "max_scaled_deviation": max((c.scaled_deviation for c in checks), default=0.0),
            "failed": len(failed),
            "observed_orders": {
                f"{name} K={order}": None if slope is None else round(slope, 3)
                for (name, order), slope in observed_orders(checks).items()
            },
        }
        return Report(
            "oracle-check", max(orders), [c.to_record() for c in checks],
            ["circuit", "order", "p", "difference", "scaled", "bound", "pass"], rows,
            metadata, not failed,
        )

    def cmd_dump_circuit(self) -> Report:
        """Location records of one pipeline circuit."""
        cfg = self.config
        method, stage = cfg.selected_methods[0], cfg.selected_stages[0]
        with self._pipeline(f"{method.value}-{stage}"):
            circuit: NoisyCircuit = build_t_gate_pipeline(cfg.pipeline(method, stage))
        records = circuit.to_records()
        rows = [
            [r["index"], r["op"], " ".join(str(q) for q in r["qubits"]), r["noise_arity"]] for r in records
        ]
        metadata = {"name": circuit.name, "n_qubits": circuit.n_qubits, "stats": circuit.stats()}
        return Report(
            "dump-circuit", cfg.effective_order, records, ["index", "op", "qubits", "noise_arity"], rows,
            metadata, title=f"circuit {circuit.name}",
        )


def _swept_cell(table: str, sweep: SweepResult, target: str) -> ComputedCell:
    cfg = sweep.config
    coefficients = {v: sweep.fits[target][v].coefficients for v in POLY_VARIABLES}
    samples = {
        v: [(a, b, report.first_order()[target][v]) for a, b, report in sweep.points] for v in POLY_VARIABLES
    }
    return ComputedCell(table, cfg.method.value, cfg.stage, target, coefficients, samples)


def _csv_columns(compare: bool) -> List[str]:
    columns = ["table", "method", "stage", "target", "variable"] + [f"c_{b}" for b in FIT_BASIS]
    if compare:
        columns += [f"ref_{b}" for b in FIT_BASIS] + ["pass"]
    return columns


def _csv_rows(cells: Sequence[TableCell]) -> List[List[object]]:
    rows = []
    for cell in cells:
        c = cell.computed
        for var in POLY_VARIABLES:
            row: List[object] = [c.table, c.method, c.stage, c.target, var, *c.coefficients[var]]
            if cell.comparison is not None:
                row += [*cell.comparison.reference.coefficients[var], cell.comparison.passed]
            rows.append(row)
    return rows


def save_sweep_plot(sweep: SweepResult, path: str) -> None:
    """Heat map of the decoded p_z coefficient over the (alpha, beta) grid."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    alphas = sorted({a for a, _, _ in sweep.points})
    betas = sorted({b for _, b, _ in sweep.points})
    grid = [[math.nan] * len(betas) for _ in alphas]
    for a, b, report in sweep.points:
        grid[alphas.index(a)][betas.index(b)] = report.first_order()["one_qubit"]["pz"]

    fig, ax = plt.subplots(figsize=(7, 5))
    image = ax.imshow(
        grid, origin="lower", aspect="auto",
        extent=(betas[0], betas[-1], alphas[0], alphas[-1]),
    )
    fig.colorbar(image, ax=ax, label="p_z coefficient")
    ax.set_xlabel("beta")
    ax.set_ylabel("alpha")
    ax.set_title(f"{sweep.config.method.value} {sweep.config.stage}: decoded fidelity")
    plt.tight_layout()
    plt.savefig(path, bbox_inches="tight")
    plt.close(fig)
    logger.info("wrote sweep plot to %s", path)
