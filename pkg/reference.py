"""
Bundled reference coefficients and cell-by-cell comparison.

Every cell lists, per variable, its first-order coefficient on the basis
(1, cos4a, sin^2(2a) sin(2b)). Angle-independent cells only carry the
constant entry.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from constants import COMPARISON_TOLERANCE, POLY_VARIABLES, REFERENCE_TABLES_FILE
from errors import ConfigError

logger = logging.getLogger(__name__)

Coefficients = Tuple[float, float, float]
CellKey = Tuple[str, str, str, str]  # (table, method, stage, target)

_REPO_ROOT = Path(__file__).resolve().parent


def _basis_row(alpha: float, beta: float) -> Coefficients:
    return (1.0, math.cos(4 * alpha), math.sin(2 * alpha) ** 2 * math.sin(2 * beta))


def _padded(values: Sequence[str]) -> Coefficients:
    numbers = [float(Fraction(v)) for v in values] + [0.0, 0.0, 0.0]
    return (numbers[0], numbers[1], numbers[2])


@dataclass(frozen=True)
class ReferenceCell:
    table: str
    method: str
    stage: str
    target: str
    coefficients: Dict[str, Coefficients]

    @property
    def key(self) -> CellKey:
        return (self.table, self.method, self.stage, self.target)

    @property
    def angle_dependent(self) -> bool:
        return any(c[1] or c[2] for c in self.coefficients.values())

    def value(self, variable: str, alpha: float = 0.0, beta: float = 0.0) -> float:
        c = self.coefficients[variable]
        row = _basis_row(alpha, beta)
        return c[0] * row[0] + c[1] * row[1] + c[2] * row[2]


class ReferenceTables:
    """All bundled cells, indexed by (table, method, stage, target)."""

    def __init__(self, cells: Iterable[ReferenceCell], source: str = ""):
        self.cells: Dict[CellKey, ReferenceCell] = {c.key: c for c in cells}
        self.source = source

    @classmethod
    def load(cls, path: Optional[str] = None) -> "ReferenceTables":
        file_path = Path(path) if path else _REPO_ROOT / REFERENCE_TABLES_FILE
        try:
            payload = json.loads(file_path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read reference tables from {file_path}: {exc}") from exc
        cells = []
        for table in ("table1", "table2", "table3"):
            for raw in payload.get(table, {}).get("cells", []):
                coefficients = {v: _padded(raw.get(v, ["0"])) for v in POLY_VARIABLES}
                cells.append(ReferenceCell(table, raw["method"], raw["stage"], raw["target"], coefficients))
        logger.debug("loaded %d reference cells from %s", len(cells), file_path)
        return cls(cells, str(file_path))

    def get(self, table: str, method: str, stage: str, target: str) -> ReferenceCell:
        try:
            return self.cells[(table, method, stage, target)]
        except KeyError:
            raise ConfigError(f"no reference cell for {(table, method, stage, target)}") from None

    def table(self, name: str) -> List[ReferenceCell]:
        return [c for c in self.cells.values() if c.table == name]


@dataclass(frozen=True)
class ComputedCell:
    """Computed first-order coefficients, fitted to the basis when angle dependent."""

    table: str
    method: str
    stage: str
    target: str
    coefficients: Dict[str, Coefficients]
    # (alpha, beta, value) samples per variable, for pointwise checks
    samples: Dict[str, List[Tuple[float, float, float]]] = field(default_factory=dict)

    @property
    def key(self) -> CellKey:
        return (self.table, self.method, self.stage, self.target)

    @classmethod
    def constant(cls, table: str, method: str, stage: str, target: str, first_order: Dict[str, float]) -> "ComputedCell":
        return cls(table, method, stage, target, {v: (first_order.get(v, 0.0), 0.0, 0.0) for v in POLY_VARIABLES})


@dataclass(frozen=True)
class CellComparison:
    computed: ComputedCell
    reference: ReferenceCell
    max_difference: float
    passed: bool

    def to_record(self) -> dict:
        return {
            "table": self.computed.table,
            "method": self.computed.method,
            "stage": self.computed.stage,
            "target": self.computed.target,
            "computed": {v: list(c) for v, c in self.computed.coefficients.items()},
            "reference": {v: list(c) for v, c in self.reference.coefficients.items()},
            "max_difference": self.max_difference,
            "pass": self.passed,
        }


def compare_cell(computed: ComputedCell, reference: ReferenceCell, tolerance: float = COMPARISON_TOLERANCE) -> CellComparison:
    diffs = [0.0]
    for var in POLY_VARIABLES:
        diffs.extend(abs(a - b) for a, b in zip(computed.coefficients[var], reference.coefficients[var]))
        for alpha, beta, value in computed.samples.get(var, []):
            diffs.append(abs(value - reference.value(var, alpha, beta)))
    worst = max(diffs)
    return CellComparison(computed, reference, worst, worst <= tolerance)


def compare_cells(
    computed: Iterable[ComputedCell],
    reference: ReferenceTables,
    tolerance: float = COMPARISON_TOLERANCE,
) -> List[CellComparison]:
    """Compare every computed cell with its bundled counterpart."""
    out = []
    for cell in computed:
        result = compare_cell(cell, reference.get(*cell.key), tolerance)
        if not result.passed:
            logger.warning("%s differs from the reference by %.3g", cell.key, result.max_difference)
        out.append(result)
    return out
