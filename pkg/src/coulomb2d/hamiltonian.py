"""Coordinates, distances and the physical operators of the regularized problem.

All operators are first written as polynomials in the four oscillator
coordinates (x_p, y_p, x_m, y_m) and their derivatives, with coordinates to
the left of derivatives, and then converted to normal-ordered ladder form.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Tuple

import numpy as np

from .algebra import Coefficient, CoordinateTerm, OperatorPolynomial, combine, from_coordinate_polynomial

_ZERO4 = (0, 0, 0, 0)
_NAMES = ("xp", "yp", "xm", "ym")


class CoordPoly:
    """Polynomial in coordinates times (right-acting) derivatives.

    Keys are ``(coords, derivs)`` exponent 4-tuples, values Fractions.
    Products are only formed with a derivative-free left factor, which keeps
    the coordinates-left-of-derivatives convention exact.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], Fraction] = {}
        for k, v in (terms or {}).items():
            v = Fraction(v)
            if v:
                self.terms[k] = v

    @classmethod
    def const(cls, value) -> "CoordPoly":
        return cls({(_ZERO4, _ZERO4): value})

    @classmethod
    def var(cls, name: str) -> "CoordPoly":
        e = [0, 0, 0, 0]
        e[_NAMES.index(name)] = 1
        return cls({(tuple(e), _ZERO4): 1})

    @classmethod
    def d(cls, *names: str) -> "CoordPoly":
        e = [0, 0, 0, 0]
        for n in names:
            e[_NAMES.index(n)] += 1
        return cls({(_ZERO4, tuple(e)): 1})

    def _coerce(self, other) -> "CoordPoly":
        return other if isinstance(other, CoordPoly) else CoordPoly.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return CoordPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return CoordPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if any(d != _ZERO4 for _, d in self.terms):
            if any(c != _ZERO4 or d != _ZERO4 for c, d in other.terms):
                raise ValueError("left factor carries derivatives; ordering would be lost")
        out: Dict = {}
        for (c1, d1), v1 in self.terms.items():
            for (c2, d2), v2 in other.terms.items():
                key = (tuple(a + b for a, b in zip(c1, c2)), tuple(a + b for a, b in zip(d1, d2)))
                out[key] = out.get(key, 0) + v1 * v2
        return CoordPoly(out)

    def __rmul__(self, other):
        return self._coerce(other) * self

    def __pow__(self, n: int):
        out = CoordPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def to_terms(self):
        return [CoordinateTerm(v, c, d) for (c, d), v in self.terms.items()]

    def evaluate(self, q) -> float:
        """Value at a point; only for derivative-free polynomials."""
        total = 0.0
        for (c, d), v in self.terms.items():
            if d != _ZERO4:
                raise ValueError("cannot evaluate a differential operator pointwise")
            total += float(v) * q[0] ** c[0] * q[1] ** c[1] * q[2] ** c[2] * q[3] ** c[3]
        return total

    def partial(self, name: str) -> "CoordPoly":
        """Exact partial derivative of a derivative-free polynomial."""
        i = _NAMES.index(name)
        out = {}
        for (c, d), v in self.terms.items():
            if c[i]:
                e = list(c)
                e[i] -= 1
                out[(tuple(e), d)] = out.get((tuple(e), d), 0) + v * c[i]
        return CoordPoly(out)


xp, yp, xm, ym = (CoordPoly.var(n) for n in _NAMES)
_half = Fraction(1, 2)


def _coordinate_maps():
    x1 = Fraction(1, 16) * (xp**2 - yp**2 - 2 * xp * yp + xm**2 - ym**2 - 2 * xm * ym) \
        * (xp**2 - yp**2 + 2 * xp * yp + xm**2 - ym**2 + 2 * xm * ym)
    y1 = Fraction(1, 4) * (xp**2 - yp**2 + xm**2 - ym**2) * (xp * yp + xm * ym)
    x2 = Fraction(1, 16) * (xp**2 - yp**2 + 2 * xp * yp - xm**2 + ym**2 - 2 * xm * ym) \
        * (xp**2 - yp**2 - 2 * xp * yp - xm**2 + ym**2 + 2 * xm * ym)
    y2 = Fraction(1, 4) * (xp**2 - yp**2 - xm**2 + ym**2) * (xp * yp - xm * ym)
    return x1, y1, x2, y2


def _distance_polys():
    r1 = Fraction(1, 16) * ((xp - ym) ** 2 + (yp + xm) ** 2) * ((xp + ym) ** 2 + (yp - xm) ** 2)
    r2 = Fraction(1, 16) * ((xp + xm) ** 2 + (yp + ym) ** 2) * ((xp - xm) ** 2 + (yp - ym) ** 2)
    r12 = Fraction(1, 4) * (xp**2 + yp**2) * (xm**2 + ym**2)
    return r1, r2, r12


X1, Y1, X2, Y2 = _coordinate_maps()
R1, R2, R12 = _distance_polys()


@dataclass(frozen=True)
class QPoint:
    x_p: float
    y_p: float
    x_m: float
    y_m: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x_p, self.y_p, self.x_m, self.y_m], dtype=float)


def _as_vec(q):
    if isinstance(q, QPoint):
        return q.as_array()
    return np.asarray(q, dtype=float)


def to_cartesian(q) -> Tuple[float, float, float, float]:
    """(x1, y1, x2, y2) of particles 1, 2 relative to particle 3."""
    v = _as_vec(q)
    return tuple(p.evaluate(v) for p in (X1, Y1, X2, Y2))


def distances(q) -> Tuple[float, float, float]:
    """(r1, r2, r12), evaluated in factored form so each is exactly ≥ 0."""
    a, b, c, d = _as_vec(q)
    r1 = ((a - d) ** 2 + (b + c) ** 2) * ((a + d) ** 2 + (b - c) ** 2) / 16
    r2 = ((a + c) ** 2 + (b + d) ** 2) * ((a - c) ** 2 + (b - d) ** 2) / 16
    r12 = (a * a + b * b) * (c * c + d * d) / 4
    return float(r1), float(r2), float(r12)


_JACOBIAN = [[p.partial(n) for n in _NAMES] for p in (X1, Y1, X2, Y2)]


def jacobian_det(q) -> float:
    """Determinant of ∂(x1, y1, x2, y2)/∂(x_p, y_p, x_m, y_m)."""
    v = _as_vec(q)
    J = np.array([[entry.evaluate(v) for entry in row] for row in _JACOBIAN])
    return float(np.linalg.det(J))


# --- operators ---------------------------------------------------------------

class OperatorKind(enum.Enum):
    T1 = "T1"
    T2 = "T2"
    T12 = "T12"
    T1_PLUS_T2 = "T1_plus_T2"
    R1R12 = "R1R12"
    R2R12 = "R2R12"
    R1R12_PLUS_R2R12 = "R1R12_plus_R2R12"
    R1R2 = "R1R2"
    B = "B"
    LZ4 = "LZ4"
    STARK_X1_PLUS_X2 = "STARK_X1_plus_X2"

    @classmethod
    def parse(cls, name: str) -> "OperatorKind":
        for k in cls:
            if name.lower() in (k.value.lower(), k.name.lower()):
                return k
        raise ValueError(f"unknown operator kind {name!r}")


def _laplacian(a: str, b: str) -> CoordPoly:
    return CoordPoly.d(a, a) + CoordPoly.d(b, b)


def _kinetic_braces(sign: int) -> CoordPoly:
    rho_m2 = xm**2 + ym**2
    rho_p2 = xp**2 + yp**2
    dot = xp * xm + yp * ym
    cross = xp * ym - yp * xm
    return (rho_m2 * _laplacian("xp", "yp")
            + rho_p2 * _laplacian("xm", "ym")
            + sign * 2 * dot * (CoordPoly.d("xp", "xm") + CoordPoly.d("yp", "ym"))
            - sign * 2 * cross * (CoordPoly.d("xp", "ym") - CoordPoly.d("yp", "xm")))


def coordinate_form(kind: OperatorKind) -> CoordPoly:
    """The operator as printed, in coordinate/derivative form.

    LZ4 is returned without its overall factor -i (applied after conversion).
    """
    if kind is OperatorKind.T1:
        return -1 * R2 * _kinetic_braces(+1)
    if kind is OperatorKind.T2:
        return -1 * R1 * _kinetic_braces(-1)
    if kind is OperatorKind.T1_PLUS_T2:
        return coordinate_form(OperatorKind.T1) + coordinate_form(OperatorKind.T2)
    if kind is OperatorKind.T12:
        rho_p2 = xp**2 + yp**2
        rho_m2 = xm**2 + ym**2
        dot = xp * xm + yp * ym
        cross = xp * ym - yp * xm
        first = Fraction(-1, 16) * (rho_p2**2 - rho_m2**2) * (
            rho_m2 * _laplacian("xp", "yp") - rho_p2 * _laplacian("xm", "ym"))
        second = -_half * dot * cross * (
            dot * (CoordPoly.d("yp", "xm") - CoordPoly.d("xp", "ym"))
            - cross * (CoordPoly.d("xp", "xm") + CoordPoly.d("yp", "ym")))
        return first + second
    if kind is OperatorKind.R1R12:
        return R1 * R12
    if kind is OperatorKind.R2R12:
        return R2 * R12
    if kind is OperatorKind.R1R12_PLUS_R2R12:
        return (R1 + R2) * R12
    if kind is OperatorKind.R1R2:
        return R1 * R2
    if kind is OperatorKind.B:
        return 16 * R1 * R2 * R12
    if kind is OperatorKind.LZ4:
        return (xp * CoordPoly.d("yp") - yp * CoordPoly.d("xp")
                + xm * CoordPoly.d("ym") - ym * CoordPoly.d("xm"))
    if kind is OperatorKind.STARK_X1_PLUS_X2:
        return 16 * R1 * R2 * R12 * (X1 + X2)
    raise ValueError(kind)


_cache: Dict[OperatorKind, OperatorPolynomial] = {}
_cache_lock = threading.Lock()


def build_operator(kind: OperatorKind | str) -> OperatorPolynomial:
    """Normal-ordered ladder form of ``kind``; built once and cached."""
    if isinstance(kind, str):
        kind = OperatorKind.parse(kind)
    op = _cache.get(kind)
    if op is not None:
        return op
    with _cache_lock:
        op = _cache.get(kind)
        if op is None:
            op = from_coordinate_polynomial(coordinate_form(kind).to_terms())
            if kind is OperatorKind.LZ4:
                op = combine([op], [Coefficient(0, -1)])
            _cache[kind] = op
    return op


# --- system parameters -----------------------------------------------------

@dataclass(frozen=True)
class SystemParams:
    """Masses (electron masses; ``m3=math.inf`` for a fixed nucleus) and charges."""

    m1: float = 1.0
    m2: float = 1.0
    m3: float = math.inf
    Q1: float = -1.0
    Q2: float = -1.0
    Q3: float = 2.0

    def __post_init__(self):
        for name in ("m1", "m2", "m3"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def mu13(self) -> float:
        return self.m1 if math.isinf(self.m3) else self.m1 * self.m3 / (self.m1 + self.m3)

    @property
    def mu23(self) -> float:
        return self.m2 if math.isinf(self.m3) else self.m2 * self.m3 / (self.m2 + self.m3)

    @property
    def inverse_m3(self) -> float:
        return 0.0 if math.isinf(self.m3) else 1.0 / self.m3

    @property
    def exchange_symmetric(self) -> bool:
        return self.m1 == self.m2 and self.Q1 == self.Q2

    @classmethod
    def helium(cls) -> "SystemParams":
        return cls(1.0, 1.0, math.inf, -1.0, -1.0, 2.0)

    @classmethod
    def hminus(cls) -> "SystemParams":
        return cls(1.0, 1.0, math.inf, -1.0, -1.0, 1.0)


def potential_weights(params: SystemParams, epsilon: float = 1.0) -> Dict[OperatorKind, float]:
    """Weights of r2·r12, r1·r12 and r1·r2 in the regularized potential.

    ``epsilon`` scales the 1-2 interaction only.
    """
    return {
        OperatorKind.R2R12: 16 * params.Q1 * params.Q3,
        OperatorKind.R1R12: 16 * params.Q2 * params.Q3,
        OperatorKind.R1R2: 16 * epsilon * params.Q1 * params.Q2,
    }


def potential_polynomial(params: SystemParams, epsilon: float = 1.0):
    """Potential weights as ``(r1r12, r2r12, r1r2)`` tuple (helium: -32, -32, 16)."""
    w = potential_weights(params, epsilon)
    return (w[OperatorKind.R1R12], w[OperatorKind.R2R12], w[OperatorKind.R1R2])
