"""
Utility functions shared by the reports and the CLI.
"""
import csv
import io
import json
import time
from fractions import Fraction
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np

from constants import RATIONAL_MATCH_TOLERANCE, RATIONAL_MAX_DENOMINATOR


def rational_string(value: float, max_denominator: int = RATIONAL_MAX_DENOMINATOR) -> str:
    """Best continued-fraction approximation, or a decimal if none is close."""
    frac = Fraction(value).limit_denominator(max_denominator)
    if abs(float(frac) - value) > RATIONAL_MATCH_TOLERANCE:
        return f"{value:.6g}"
    if frac.denominator == 1:
        return str(frac.numerator)
    return f"{frac.numerator}/{frac.denominator}"


def markdown_table(headers: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Render a GitHub-flavoured markdown table."""
    lines = ["| " + " | ".join(headers) + " |", "|" + "|".join("---" for _ in headers) + "|"]
    for row in rows:
        lines.append("| " + " | ".join(str(c) for c in row) + " |")
    return "\n".join(lines)


def csv_text(headers: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(headers)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": obj.real.tolist(), "im": obj.imag.tolist()}
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def json_text(payload: Any) -> str:
    return json.dumps(payload, indent=2, default=_json_default)


def emit(text: str, out_path: Optional[str] = None) -> None:
    """Write one complete report to a file or stdout in a single call."""
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def angle_grid(points: int, period: float) -> List[float]:
    """Uniform grid over [0, period)."""
    return [period * k / points for k in range(points)]


class Stopwatch:
    """Wall-clock timer for run metadata."""

    def __init__(self):
        self._start = time.perf_counter()

    def elapsed(self) -> float:
        return time.perf_counter() - self._start

    def restart(self) -> None:
        self._start = time.perf_counter()
