"""
Truncated polynomials in the error probabilities px, py, pz.

Coefficients are stored sparsely, keyed by the exponent triple (ex, ey, ez):

    ErrorPoly({(0, 0, 0): 1.0, (1, 0, 0): -83.5}, max_degree=1)

reads 1 - 83.5 px. Every product drops monomials above the truncation degree
K and every constructor prunes coefficients below POLY_PRUNE_EPSILON, so a
value never carries terms the run did not ask for. Instances are immutable.

PolyMatrix is the matrix-valued sibling: each monomial maps to a complex
numpy array. It carries reduced density matrices and chi matrices, where the
linear algebra is done monomial by monomial.
"""

from __future__ import annotations

import itertools
from types import MappingProxyType
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np

from constants import MAX_ORDER, POLY_PRUNE_EPSILON, POLY_VARIABLES, RATIONAL_MAX_DENOMINATOR
from errors import OrderMismatchError, VanishingSeriesError
from utils import rational_string

Monomial = Tuple[int, int, int]
Number = Union[int, float]

CONSTANT: Monomial = (0, 0, 0)
UNIT_MONOMIALS: Dict[str, Monomial] = {
    "px": (1, 0, 0),
    "py": (0, 1, 0),
    "pz": (0, 0, 1),
}


def monomials_up_to(max_degree: int) -> List[Monomial]:
    """All exponent triples of total degree <= max_degree, in print order."""
    out: List[Monomial] = []
    for degree in range(max_degree + 1):
        for ex in range(degree, -1, -1):
            for ey in range(degree - ex, -1, -1):
                out.append((ex, ey, degree - ex - ey))
    return out


def _degree(m: Monomial) -> int:
    return m[0] + m[1] + m[2]


def _times(a: Monomial, b: Monomial) -> Monomial:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def _monomial_value(m: Monomial, px: float, py: float, pz: float) -> float:
    return (px ** m[0]) * (py ** m[1]) * (pz ** m[2])


def _monomial_name(m: Monomial) -> str:
    parts = []
    for name, exp in zip(POLY_VARIABLES, m):
        if exp == 1:
            parts.append(name)
        elif exp > 1:
            parts.append(f"{name}^{exp}")
    return " ".join(parts)


class ErrorPoly:
    """Real polynomial in (px, py, pz) truncated at total degree max_degree."""

    __slots__ = ("max_degree", "_coeffs")

    def __init__(
        self,
        coeffs: Optional[Mapping[Monomial, Number]] = None,
        max_degree: int = 1,
        epsilon: float = POLY_PRUNE_EPSILON,
    ):
        if not 0 <= max_degree <= MAX_ORDER:
            raise ValueError(f"max_degree must be in 0..{MAX_ORDER}, got {max_degree}")
        kept: Dict[Monomial, float] = {}
        for mono, value in (coeffs or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != 3 or min(mono) < 0:
                raise ValueError(f"bad monomial exponent triple: {mono}")
            if _degree(mono) > max_degree:
                continue
            value = float(value)
            if abs(value) >= epsilon:
                kept[mono] = kept.get(mono, 0.0) + value
        self.max_degree = max_degree
        self._coeffs = MappingProxyType(kept)

    # ----- constructors -----
    @classmethod
    def constant(cls, value: Number, max_degree: int = 1) -> "ErrorPoly":
        return cls({CONSTANT: value}, max_degree)

    @classmethod
    def variable(cls, name: str, max_degree: int = 1) -> "ErrorPoly":
        return cls({UNIT_MONOMIALS[name]: 1.0}, max_degree)

    @classmethod
    def zero(cls, max_degree: int = 1) -> "ErrorPoly":
        return cls({}, max_degree)

    @classmethod
    def one(cls, max_degree: int = 1) -> "ErrorPoly":
        return cls.constant(1.0, max_degree)

    @classmethod
    def p_identity(cls, max_degree: int = 1) -> "ErrorPoly":
        """p0 = 1 - px - py - pz, the no-error probability of one qubit slot."""
        return cls({CONSTANT: 1.0, (1, 0, 0): -1.0, (0, 1, 0): -1.0, (0, 0, 1): -1.0}, max_degree)

    @classmethod
    def pauli_probability(cls, label: str, max_degree: int = 1) -> "ErrorPoly":
        if label == "i":
            return cls.p_identity(max_degree)
        return cls.variable("p" + label, max_degree)

    # ----- access -----
    @property
    def coeffs(self) -> Mapping[Monomial, float]:
        return self._coeffs

    def coefficient(self, monomial: Union[Monomial, str]) -> float:
        if isinstance(monomial, str):
            monomial = UNIT_MONOMIALS[monomial]
        return self._coeffs.get(tuple(monomial), 0.0)

    @property
    def constant_term(self) -> float:
        return self._coeffs.get(CONSTANT, 0.0)

    def first_order(self) -> Dict[str, float]:
        """The px, py, pz coefficients (the form the fidelity tables print)."""
        return {name: self.coefficient(m) for name, m in UNIT_MONOMIALS.items()}

    def terms(self) -> Iterator[Tuple[Monomial, float]]:
        for mono in monomials_up_to(self.max_degree):
            if mono in self._coeffs:
                yield mono, self._coeffs[mono]

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(v) <= tol for v in self._coeffs.values())

    def almost_equal(self, other: "ErrorPoly", tol: float = 1e-9) -> bool:
        self._check(other)
        keys = set(self._coeffs) | set(other._coeffs)
        return all(abs(self.coefficient(k) - other.coefficient(k)) <= tol for k in keys)

    def truncate(self, max_degree: int) -> "ErrorPoly":
        return ErrorPoly(self._coeffs, max_degree)

    # ----- arithmetic -----
    def _check(self, other: "ErrorPoly") -> None:
        if self.max_degree != other.max_degree:
            raise OrderMismatchError(
                f"cannot combine polynomials truncated at K={self.max_degree} and K={other.max_degree}"
            )

    def _coerce(self, other) -> "ErrorPoly":
        if isinstance(other, ErrorPoly):
            self._check(other)
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return ErrorPoly.constant(float(other), self.max_degree)
        return NotImplemented

    def __add__(self, other) -> "ErrorPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._coeffs)
        for k, v in other._coeffs.items():
            out[k] = out.get(k, 0.0) + v
        return ErrorPoly(out, self.max_degree)

    __radd__ = __add__

    def __neg__(self) -> "ErrorPoly":
        return ErrorPoly({k: -v for k, v in self._coeffs.items()}, self.max_degree)

    def __sub__(self, other) -> "ErrorPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "ErrorPoly":
        return (-self) + other

    def __mul__(self, other) -> "ErrorPoly":
        if isinstance(other, (int, float, np.floating, np.integer)):
            return ErrorPoly({k: v * float(other) for k, v in self._coeffs.items()}, self.max_degree)
        if not isinstance(other, ErrorPoly):
            return NotImplemented
        self._check(other)
        out: Dict[Monomial, float] = {}
        for (ma, va), (mb, vb) in itertools.product(self._coeffs.items(), other._coeffs.items()):
            if _degree(ma) + _degree(mb) > self.max_degree:
                continue
            key = _times(ma, mb)
            out[key] = out.get(key, 0.0) + va * vb
        return ErrorPoly(out, self.max_degree)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ErrorPoly":
        if isinstance(other, ErrorPoly):
            return poly_div_series(self, other)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self * (1.0 / float(other))
        return NotImplemented

    def __pow__(self, exponent: int) -> "ErrorPoly":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = ErrorPoly.one(self.max_degree)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def reciprocal(self) -> "ErrorPoly":
        """Formal power series 1/self truncated at max_degree."""
        c0 = self.constant_term
        if c0 == 0.0:
            raise VanishingSeriesError("series division by a polynomial with zero constant term")
        # 1/(c0 (1 + u)) = (1/c0) * sum_j (-u)^j, u has no constant term
        u = ErrorPoly({k: v / c0 for k, v in self._coeffs.items() if k != CONSTANT}, self.max_degree)
        total = ErrorPoly.one(self.max_degree)
        term = ErrorPoly.one(self.max_degree)
        for _ in range(self.max_degree):
            term = term * (-u)
            total = total + term
        return total * (1.0 / c0)

    # ----- evaluation / io -----
    def evaluate(self, px: float, py: float, pz: float) -> float:
        return float(sum(v * _monomial_value(m, px, py, pz) for m, v in self._coeffs.items()))

    def to_json(self) -> List[dict]:
        return [{"exponents": list(m), "coeff": v} for m, v in self.terms()]

    @classmethod
    def from_json(cls, records: Iterable[dict], max_degree: int) -> "ErrorPoly":
        return cls({tuple(r["exponents"]): r["coeff"] for r in records}, max_degree)

    def format(self, max_denominator: int = RATIONAL_MAX_DENOMINATOR) -> str:
        """Render like "1 - 167/2 px - 71/2 py - 19 pz"."""
        pieces: List[str] = []
        for mono, value in self.terms():
            magnitude = rational_string(abs(value), max_denominator)
            name = _monomial_name(mono)
            if name:
                body = name if magnitude == "1" else f"{magnitude} {name}"
            else:
                body = magnitude
            sign = "-" if value < 0 else "+"
            if not pieces:
                pieces.append(body if sign == "+" else f"-{body}")
            else:
                pieces.append(f"{sign} {body}")
        return " ".join(pieces) if pieces else "0"

    def __repr__(self) -> str:
        return f"ErrorPoly({self.format()}, K={self.max_degree})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, ErrorPoly):
            return NotImplemented
        return self.max_degree == other.max_degree and dict(self._coeffs) == dict(other._coeffs)

    def __hash__(self) -> int:
        return hash((self.max_degree, tuple(sorted(self._coeffs.items()))))


def poly_add(a: ErrorPoly, b: ErrorPoly) -> ErrorPoly:
    return a + b


def poly_mul(a: ErrorPoly, b: ErrorPoly) -> ErrorPoly:
    return a * b


def poly_div_series(num: ErrorPoly, den: ErrorPoly) -> ErrorPoly:
    """num/den as a formal power series, truncated at the shared order."""
    num._check(den)
    return num * den.reciprocal()


def poly_eval(a: ErrorPoly, px: float, py: float, pz: float) -> float:
    if min(px, py, pz) < 0.0 or px + py + pz > 1.0:
        raise ValueError(f"probabilities out of range: ({px}, {py}, {pz})")
    return a.evaluate(px, py, pz)


class PolyMatrix:
    """Matrix whose entries are complex polynomials, stored per monomial."""

    __slots__ = ("max_degree", "shape", "_coeffs")

    def __init__(
        self,
        coeffs: Optional[Mapping[Monomial, np.ndarray]] = None,
        shape: Tuple[int, ...] = (2, 2),
        max_degree: int = 1,
        epsilon: float = POLY_PRUNE_EPSILON,
    ):
        kept: Dict[Monomial, np.ndarray] = {}
        for mono, arr in (coeffs or {}).items():
            mono = tuple(int(e) for e in mono)
            if _degree(mono) > max_degree:
                continue
            arr = np.array(arr, dtype=complex).reshape(shape)
            arr = np.where(np.abs(arr) < epsilon, 0.0, arr)
            if np.any(arr != 0):
                kept[mono] = arr
        self.max_degree = max_degree
        self.shape = tuple(shape)
        self._coeffs = kept

    @classmethod
    def from_numeric(cls, matrix: np.ndarray, max_degree: int = 1) -> "PolyMatrix":
        matrix = np.asarray(matrix, dtype=complex)
        return cls({CONSTANT: matrix}, matrix.shape, max_degree)

    @classmethod
    def zeros(cls, shape: Tuple[int, ...], max_degree: int = 1) -> "PolyMatrix":
        return cls({}, shape, max_degree)

    @property
    def coeffs(self) -> Mapping[Monomial, np.ndarray]:
        return MappingProxyType(self._coeffs)

    def coefficient(self, monomial: Monomial) -> np.ndarray:
        return self._coeffs.get(tuple(monomial), np.zeros(self.shape, dtype=complex)).copy()

    def constant(self) -> np.ndarray:
        return self.coefficient(CONSTANT)

    def _check(self, other: "PolyMatrix") -> None:
        if self.max_degree != other.max_degree:
            raise OrderMismatchError(
                f"cannot combine matrices truncated at K={self.max_degree} and K={other.max_degree}"
            )

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        self._check(other)
        out = {k: v.copy() for k, v in self._coeffs.items()}
        for k, v in other._coeffs.items():
            out[k] = out[k] + v if k in out else v.copy()
        return PolyMatrix(out, self.shape, self.max_degree)

    def __neg__(self) -> "PolyMatrix":
        return PolyMatrix({k: -v for k, v in self._coeffs.items()}, self.shape, self.max_degree)

    def __sub__(self, other: "PolyMatrix") -> "PolyMatrix":
        return self + (-other)

    def scale(self, factor: Union[complex, ErrorPoly]) -> "PolyMatrix":
        """Multiply by a complex number or by a real polynomial."""
        if isinstance(factor, ErrorPoly):
            if factor.max_degree != self.max_degree:
                raise OrderMismatchError("scaling polynomial has a different order")
            out: Dict[Monomial, np.ndarray] = {}
            for (ma, arr), (mb, v) in itertools.product(self._coeffs.items(), factor.coeffs.items()):
                if _degree(ma) + _degree(mb) > self.max_degree:
                    continue
                key = _times(ma, mb)
                out[key] = out[key] + arr * v if key in out else arr * v
            return PolyMatrix(out, self.shape, self.max_degree)
        return PolyMatrix({k: v * factor for k, v in self._coeffs.items()}, self.shape, self.max_degree)

    def divide_series(self, den: ErrorPoly) -> "PolyMatrix":
        return self.scale(den.reciprocal())

    def map_numeric(self, fn: Callable[[np.ndarray], np.ndarray], shape: Tuple[int, ...]) -> "PolyMatrix":
        """Apply a linear map to every monomial coefficient."""
        return PolyMatrix({k: fn(v) for k, v in self._coeffs.items()}, shape, self.max_degree)

    def trace(self) -> ErrorPoly:
        return ErrorPoly({k: float(np.trace(v).real) for k, v in self._coeffs.items()}, self.max_degree)

    def trace_with(self, matrix: np.ndarray) -> ErrorPoly:
        """Real part of Tr[self * matrix] as a polynomial."""
        return ErrorPoly(
            {k: float(np.trace(v @ matrix).real) for k, v in self._coeffs.items()}, self.max_degree
        )

    def expectation(self, vector: np.ndarray) -> ErrorPoly:
        """<v| self |v>, real part."""
        vector = np.asarray(vector, dtype=complex)
        return ErrorPoly(
            {k: float(np.vdot(vector, v @ vector).real) for k, v in self._coeffs.items()}, self.max_degree
        )

    def entry(self, i: int, j: int) -> Tuple[ErrorPoly, ErrorPoly]:
        """(real part, imaginary part) of one entry."""
        re = ErrorPoly({k: v[i, j].real for k, v in self._coeffs.items()}, self.max_degree)
        im = ErrorPoly({k: v[i, j].imag for k, v in self._coeffs.items()}, self.max_degree)
        return re, im

    def evaluate(self, px: float, py: float, pz: float) -> np.ndarray:
        out = np.zeros(self.shape, dtype=complex)
        for m, arr in self._coeffs.items():
            out = out + arr * _monomial_value(m, px, py, pz)
        return out

    def almost_equal(self, other: "PolyMatrix", tol: float = 1e-9) -> bool:
        self._check(other)
        keys = set(self._coeffs) | set(other._coeffs)
        return all(np.max(np.abs(self.coefficient(k) - other.coefficient(k))) <= tol for k in keys)

    def to_json(self) -> List[List[dict]]:
        rows = []
        for i in range(self.shape[0]):
            row = []
            for j in range(self.shape[1]):
                re, im = self.entry(i, j)
                row.append({"re": re.to_json(), "im": im.to_json()})
            rows.append(row)
        return rows

    def __repr__(self) -> str:
        return f"PolyMatrix(shape={self.shape}, K={self.max_degree}, monomials={sorted(self._coeffs)})"
