"""Exact normal-ordered polynomials in the ladder operators of four oscillators.

Modes are the circular modes 1..4 (indices 0..3 here).  A monomial is stored
as the 8-tuple ``(p1, p2, p3, p4, q1, q2, q3, q4)`` meaning

    a1†^p1 a2†^p2 a3†^p3 a4†^p4 a1^q1 a2^q2 a3^q3 a4^q4

and coefficients are exact Gaussian rationals.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Iterator, List, Mapping, NamedTuple, Sequence, Tuple

NMODES = 4

Key = Tuple[int, ...]


class Coefficient:
    """Exact complex number ``re + i*im`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, value) -> "Coefficient":
        if isinstance(value, Coefficient):
            return value
        if isinstance(value, complex):
            raise TypeError("floating complex values are not exact; pass Coefficient(re, im)")
        return cls(value, 0)

    def __add__(self, other):
        other = Coefficient.coerce(other)
        return Coefficient(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return Coefficient(-self.re, -self.im)

    def __sub__(self, other):
        other = Coefficient.coerce(other)
        return Coefficient(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return Coefficient.coerce(other) - self

    def __mul__(self, other):
        other = Coefficient.coerce(other)
        return Coefficient(self.re * other.re - self.im * other.im,
                           self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def conjugate(self) -> "Coefficient":
        return Coefficient(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            other = Coefficient.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if not self.im:
            return f"Coefficient({self.re})"
        return f"Coefficient({self.re}, {self.im})"

    def serialize(self) -> str:
        return (f"{self.re.numerator}/{self.re.denominator} "
                f"{self.im.numerator}/{self.im.denominator}")


I = Coefficient(0, 1)


class LadderMonomial(NamedTuple):
    """Creation exponents ``p`` and annihilation exponents ``q`` (normal order)."""

    p: Tuple[int, int, int, int]
    q: Tuple[int, int, int, int]

    @property
    def key(self) -> Key:
        return tuple(self.p) + tuple(self.q)

    @classmethod
    def from_key(cls, key: Key) -> "LadderMonomial":
        return cls(tuple(key[:NMODES]), tuple(key[NMODES:]))

    @property
    def degree(self) -> int:
        return sum(self.p) + sum(self.q)

    @property
    def shift(self) -> Tuple[int, int, int, int]:
        return tuple(pi - qi for pi, qi in zip(self.p, self.q))


class FockKet(NamedTuple):
    n1: int
    n2: int
    n3: int
    n4: int


def _sort_key(key: Key):
    # graded lexicographic on (p, q)
    return (sum(key), key)


class OperatorPolynomial:
    """Canonical normal-ordered operator; immutable after construction.

    ``terms`` maps monomial keys (8-tuples) to nonzero Coefficients.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Key, Coefficient] | None = None):
        clean: Dict[Key, Coefficient] = {}
        if terms:
            for key, c in terms.items():
                key = tuple(int(k) for k in key)
                if len(key) != 2 * NMODES or min(key) < 0:
                    raise ValueError(f"invalid monomial {key}")
                c = Coefficient.coerce(c)
                if c:
                    clean[key] = c
        self._terms = clean
        self._hash = None

    @classmethod
    def _trusted(cls, terms: Dict[Key, Coefficient]) -> "OperatorPolynomial":
        obj = cls.__new__(cls)
        obj._terms = {k: c for k, c in terms.items() if c}
        obj._hash = None
        return obj

    @classmethod
    def identity(cls) -> "OperatorPolynomial":
        return cls._trusted({(0,) * (2 * NMODES): Coefficient(1)})

    @classmethod
    def annihilator(cls, mode: int) -> "OperatorPolynomial":
        key = [0] * (2 * NMODES)
        key[NMODES + mode] = 1
        return cls._trusted({tuple(key): Coefficient(1)})

    @classmethod
    def creator(cls, mode: int) -> "OperatorPolynomial":
        key = [0] * (2 * NMODES)
        key[mode] = 1
        return cls._trusted({tuple(key): Coefficient(1)})

    @classmethod
    def number(cls, mode: int) -> "OperatorPolynomial":
        key = [0] * (2 * NMODES)
        key[mode] = key[NMODES + mode] = 1
        return cls._trusted({tuple(key): Coefficient(1)})

    @property
    def terms(self) -> Dict[Key, Coefficient]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[LadderMonomial, Coefficient]]:
        for key in sorted(self._terms, key=_sort_key):
            yield LadderMonomial.from_key(key), self._terms[key]

    def raw_items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if not isinstance(other, OperatorPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __add__(self, other):
        return combine([self, other], [1, 1])

    def __sub__(self, other):
        return combine([self, other], [1, -1])

    def __neg__(self):
        return combine([self], [-1])

    def __mul__(self, other):
        if isinstance(other, OperatorPolynomial):
            return multiply(self, other)
        return combine([self], [other])

    def __rmul__(self, other):
        return combine([self], [other])

    @property
    def degree(self) -> int:
        return max((sum(k) for k in self._terms), default=0)

    def __repr__(self):
        return f"<OperatorPolynomial with {len(self)} terms, degree {self.degree}>"


def combine(ops: Sequence[OperatorPolynomial], weights: Sequence) -> OperatorPolynomial:
    """Linear combination ``sum(w * op)``; cancelled terms are dropped."""
    if len(ops) != len(weights):
        raise ValueError(f"{len(ops)} operators but {len(weights)} weights")
    acc: Dict[Key, Coefficient] = {}
    for op, w in zip(ops, weights):
        w = Coefficient.coerce(w)
        if not w:
            continue
        for key, c in op._terms.items():
            prev = acc.get(key)
            acc[key] = c * w if prev is None else prev + c * w
    return OperatorPolynomial._trusted(acc)


@lru_cache(maxsize=None)
def _reorder(q: int, r: int) -> Tuple[Tuple[int, int], ...]:
    """Single-mode a^q a†^r = sum_j j! C(q,j) C(r,j) a†^(r-j) a^(q-j)."""
    return tuple((j, math.factorial(j) * math.comb(q, j) * math.comb(r, j))
                 for j in range(min(q, r) + 1))


def _multiply_keys(ka: Key, kb: Key) -> List[Tuple[Key, int]]:
    pa, qa = ka[:NMODES], ka[NMODES:]
    pb, qb = kb[:NMODES], kb[NMODES:]
    out = [((), (), 1)]
    for i in range(NMODES):
        nxt = []
        for j, w in _reorder(qa[i], pb[i]):
            for pp, qq, ww in out:
                nxt.append((pp + (pa[i] + pb[i] - j,), qq + (qa[i] + qb[i] - j,), ww * w))
        out = nxt
    return [(pp + qq, ww) for pp, qq, ww in out]


def multiply(A: OperatorPolynomial, B: OperatorPolynomial) -> OperatorPolynomial:
    """Normal-ordered product A·B using [a_i, a_j†] = δ_ij."""
    acc: Dict[Key, Coefficient] = {}
    for ka, ca in A._terms.items():
        for kb, cb in B._terms.items():
            cab = ca * cb
            for key, w in _multiply_keys(ka, kb):
                term = cab * w
                prev = acc.get(key)
                acc[key] = term if prev is None else prev + term
    return OperatorPolynomial._trusted(acc)


def adjoint(A: OperatorPolynomial) -> OperatorPolynomial:
    """Hermitian adjoint; (a†^p a^q)† = a†^q a^p is already normal ordered."""
    return OperatorPolynomial._trusted(
        {k[NMODES:] + k[:NMODES]: c.conjugate() for k, c in A._terms.items()})


def term_count(A: OperatorPolynomial) -> int:
    return len(A)


def shift_signature(A: OperatorPolynomial) -> set:
    """All occupation shifts p - q produced by the monomials of ``A``."""
    return {tuple(k[i] - k[NMODES + i] for i in range(NMODES)) for k in A._terms}


# --- coordinate representation -------------------------------------------
#
# Per plane (x, y) with circular modes (u, v):
#   x  = (a_u + a_v + a_u† + a_v†) / 2
#   y  = i (a_u - a_v - a_u† + a_v†) / 2
#   dx = (a_u + a_v - a_u† - a_v†) / 2
#   dy = i (a_u - a_v + a_u† - a_v†) / 2
# Each linear form is stored times 2 as Gaussian-integer pairs
# (ann_u, ann_v, cre_u, cre_v), every entry an (re, im) int pair.

_LINEAR_FORMS = {
    "x": ((1, 0), (1, 0), (1, 0), (1, 0)),
    "y": ((0, 1), (0, -1), (0, -1), (0, 1)),
    "dx": ((1, 0), (1, 0), (-1, 0), (-1, 0)),
    "dy": ((0, 1), (0, -1), (0, 1), (0, -1)),
}


def _gmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _right_multiply_linear(poly: Dict[Key, Tuple[int, int]], form) -> Dict[Key, Tuple[int, int]]:
    """Two-mode poly (key = (p_u, p_v, q_u, q_v)) times a linear form on the right."""
    out: Dict[Key, Tuple[int, int]] = {}

    def add(key, c):
        prev = out.get(key)
        out[key] = c if prev is None else (prev[0] + c[0], prev[1] + c[1])

    ann_u, ann_v, cre_u, cre_v = form
    for (pu, pv, qu, qv), c in poly.items():
        add((pu, pv, qu + 1, qv), _gmul(c, ann_u))
        add((pu, pv, qu, qv + 1), _gmul(c, ann_v))
        # a_u^qu a_u† = a_u† a_u^qu + qu a_u^(qu-1)
        add((pu + 1, pv, qu, qv), _gmul(c, cre_u))
        if qu:
            add((pu, pv, qu - 1, qv), _gmul(c, (cre_u[0] * qu, cre_u[1] * qu)))
        add((pu, pv + 1, qu, qv), _gmul(c, cre_v))
        if qv:
            add((pu, pv, qu, qv - 1), _gmul(c, (cre_v[0] * qv, cre_v[1] * qv)))
    return {k: c for k, c in out.items() if c != (0, 0)}


@lru_cache(maxsize=None)
def _plane_operator(x: int, y: int, dx: int, dy: int) -> Tuple[Tuple[Key, Tuple[int, int]], ...]:
    """2^(x+y+dx+dy) · x^x y^y ∂x^dx ∂y^dy in normal order on one plane."""
    # build left to right: x^x then y^y then dx^dx then dy^dy
    factors = ["x"] * x + ["y"] * y + ["dx"] * dx + ["dy"] * dy
    if not factors:
        return (((0, 0, 0, 0), (1, 0)),)
    head = factors[:-1]
    counts = (head.count("x"), head.count("y"), head.count("dx"), head.count("dy"))
    base = dict(_plane_operator(*counts))
    return tuple(_right_multiply_linear(base, _LINEAR_FORMS[factors[-1]]).items())


class CoordinateTerm(NamedTuple):
    """``coef · x_p^a y_p^b x_m^c y_m^d ∂x_p^e ∂y_p^f ∂x_m^g ∂y_m^h``.

    Coordinates act to the left of derivatives.
    """

    coef: Fraction
    coords: Tuple[int, int, int, int]
    derivs: Tuple[int, int, int, int]


def from_coordinate_polynomial(terms: Iterable) -> OperatorPolynomial:
    """Convert a polynomial in (x_p, y_p, x_m, y_m) and their derivatives.

    ``terms`` yields ``(coef, coords, derivs)`` triples.  Coefficients must be
    rational (or Coefficient); the circular-mode substitution then stays
    inside the Gaussian rationals.
    """
    acc: Dict[Key, Tuple[int, int]] = {}
    denominators: Dict[Key, int] = {}
    # accumulate as Gaussian integers over a common power-of-two denominator
    collected = []
    for coef, coords, derivs in terms:
        coef = Coefficient.coerce(coef)
        if not coef:
            continue
        xp, yp, xm, ym = coords
        dxp, dyp, dxm, dym = derivs
        degree = sum(coords) + sum(derivs)
        plane_p = _plane_operator(xp, yp, dxp, dyp)
        plane_m = _plane_operator(xm, ym, dxm, dym)
        collected.append((coef, degree, plane_p, plane_m))
    if not collected:
        return OperatorPolynomial()
    max_degree = max(d for _, d, _, _ in collected)
    den = 1
    for coef, _, _, _ in collected:
        den = math.lcm(den, coef.re.denominator, coef.im.denominator)
    for coef, degree, plane_p, plane_m in collected:
        scale = 2 ** (max_degree - degree) * den
        cr = coef.re * scale
        ci = coef.im * scale
        assert cr.denominator == 1 and ci.denominator == 1
        c0 = (int(cr), int(ci))
        for (pu, pv, qu, qv), cp in plane_p:
            cpc = _gmul(c0, cp)
            for (ru, rv, su, sv), cm in plane_m:
                c = _gmul(cpc, cm)
                key = (pu, pv, ru, rv, qu, qv, su, sv)
                prev = acc.get(key)
                acc[key] = c if prev is None else (prev[0] + c[0], prev[1] + c[1])
    total_den = den * 2 ** max_degree
    out = {}
    for key, (re, im) in acc.items():
        if re or im:
            out[key] = Coefficient(Fraction(re, total_den), Fraction(im, total_den))
    return OperatorPolynomial._trusted(out)


# --- Fock matrix elements ----------------------------------------------------

def _falling(n: int, q: int) -> int:
    out = 1
    for k in range(q):
        out *= n - k
    return out


def _squarefree_split(x: int) -> Tuple[int, int]:
    """Return (s, r) with x = s^2 * r and r squarefree."""
    s, r = 1, 1
    d = 2
    while d * d <= x:
        while x % (d * d) == 0:
            x //= d * d
            s *= d
        if x % d == 0:
            x //= d
            r *= d
        d += 1
    return s, r * x


class MatrixElement(NamedTuple):
    """Exact value ``coef * sqrt(radicand)`` with squarefree integer radicand."""

    coef: Coefficient
    radicand: int

    def __complex__(self):
        return complex(self.coef) * math.sqrt(self.radicand)

    def __float__(self):
        z = complex(self)
        if z.imag:
            raise ValueError("matrix element is not real")
        return z.real


def matrix_element(A: OperatorPolynomial, bra: Sequence[int], ket: Sequence[int]) -> MatrixElement:
    """Exact ⟨bra|A|ket⟩ over unsymmetrized Fock kets.

    ⟨n+p-q| a†^p a^q |n⟩ = ∏ n!/(n-q)! · sqrt(m!/n!) with m = n+p-q, so every
    matching monomial shares the radical sqrt(∏ m_i!/n_i!).
    """
    bra = tuple(bra)
    ket = tuple(ket)
    shift = tuple(m - n for m, n in zip(bra, ket))
    if min(bra) < 0 or min(ket) < 0:
        return MatrixElement(Coefficient(0), 1)
    total = Coefficient(0)
    for key, c in A._terms.items():
        p, q = key[:NMODES], key[NMODES:]
        if any(p[i] - q[i] != shift[i] for i in range(NMODES)):
            continue
        w = 1
        for i in range(NMODES):
            w *= _falling(ket[i], q[i])
            if not w:
                break
        if w:
            total = total + c * w
    if not total:
        return MatrixElement(Coefficient(0), 1)
    # radical sqrt(∏ m!/n!) = sqrt(num/den); rationalize as sqrt(num*den)/den
    num = den = 1
    for m, n in zip(bra, ket):
        if m >= n:
            num *= math.factorial(m) // math.factorial(n)
        else:
            den *= math.factorial(n) // math.factorial(m)
    s, r = _squarefree_split(num * den)
    return MatrixElement(total * Fraction(s, den), r)


def apply(A: OperatorPolynomial, ket_vector: Mapping[Tuple[int, ...], complex]) -> Dict[Tuple[int, ...], complex]:
    """Apply ``A`` to a sparse Fock vector (floating point), no truncation."""
    out: Dict[Tuple[int, ...], complex] = {}
    for n, amp in ket_vector.items():
        for key, c in A._terms.items():
            p, q = key[:NMODES], key[NMODES:]
            w = 1.0
            ok = True
            for i in range(NMODES):
                if n[i] < q[i]:
                    ok = False
                    break
                w *= math.sqrt(math.factorial(n[i]) / math.factorial(n[i] - q[i])
                               * math.factorial(n[i] - q[i] + p[i]) / math.factorial(n[i] - q[i]))
            if not ok:
                continue
            m = tuple(n[i] - q[i] + p[i] for i in range(NMODES))
            out[m] = out.get(m, 0.0) + complex(c) * w * amp
    return out


# --- text serialization ----------------------------------------------------

def serialize(A: OperatorPolynomial) -> str:
    """Line format ``p1 p2 p3 p4 q1 q2 q3 q4 re_num/re_den im_num/im_den``."""
    lines = []
    for key in sorted(A._terms, key=_sort_key):
        lines.append(" ".join(str(k) for k in key) + " " + A._terms[key].serialize())
    return "\n".join(lines) + ("\n" if lines else "")


def deserialize(text: str) -> OperatorPolynomial:
    terms = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2 * NMODES + 2:
            raise ValueError(f"malformed operator line: {line!r}")
        key = tuple(int(f) for f in fields[:2 * NMODES])
        terms[key] = Coefficient(Fraction(fields[-2]), Fraction(fields[-1]))
    return OperatorPolynomial(terms)
