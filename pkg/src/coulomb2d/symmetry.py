"""Discrete symmetry group of the transformed equation and its characters.

Every generator permutes, up to sign, the sixteen linear functionals

    ±x_p, ±y_p, ±x_m, ±y_m, ±(x_p±y_p)/√2, ±(x_m±y_m)/√2

so group elements are stored as permutations of those sixteen symbols.
Characters live in Z[√2] and are stored exactly as integer pairs (a, b)
meaning a + b√2.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

SQRT2 = math.sqrt(2.0)
_H = 1.0 / SQRT2

# symbol k < 8 is the functional _SYMBOLS[k]; symbol k + 8 is its negative
_SYMBOLS = np.array([
    [1, 0, 0, 0],
    [0, 1, 0, 0],
    [0, 0, 1, 0],
    [0, 0, 0, 1],
    [_H, _H, 0, 0],
    [_H, -_H, 0, 0],
    [0, 0, _H, _H],
    [0, 0, _H, -_H],
])
SYMBOL_NAMES = ["x_p", "y_p", "x_m", "y_m", "(x_p+y_p)/√2", "(x_p-y_p)/√2",
                "(x_m+y_m)/√2", "(x_m-y_m)/√2"]

# coordinate substitutions: row i gives the image of coordinate i
GENERATOR_MATRICES = {
    "Pi_x": np.array([[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]], float),
    "Pi_y": np.array([[_H, _H, 0, 0], [_H, -_H, 0, 0], [0, 0, _H, _H], [0, 0, _H, -_H]]),
    "P12": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], float),
    "Pi_1": np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, -1, 0, 0], [1, 0, 0, 0]], float),
    "Pi_2": np.array([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]], float),
    "Pi_p": np.array([[-1, 0, 0, 0], [0, -1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], float),
    "Pi_m": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]], float),
}
PHYSICAL = ("Pi_x", "Pi_y", "P12")
ADDITIONAL = ("Pi_1", "Pi_2", "Pi_p", "Pi_m")

# one element per class, written as products of generators (leftmost acts first)
CLASS_WORDS = [
    "E", "Pi_y", "Pi_x", "Pi_y Pi_x", "P12", "Pi_y P12", "Pi_x P12", "Pi_y Pi_x P12",
    "Pi_p Pi_m", "Pi_2 Pi_x Pi_m", "Pi_2 P12", "Pi_1 Pi_2", "Pi_2 Pi_x P12",
    "Pi_p Pi_y Pi_x P12", "Pi_p P12", "Pi_2 Pi_x", "Pi_2 Pi_y", "Pi_2 Pi_y Pi_x",
    "Pi_1 Pi_2 Pi_m", "Pi_2 Pi_y Pi_m", "Pi_2 Pi_y Pi_x P12", "Pi_2 Pi_y P12",
    "Pi_y Pi_x Pi_m", "Pi_p Pi_y Pi_x Pi_m", "Pi_1 Pi_y Pi_x P12", "Pi_y Pi_x P12^-1",
    "Pi_2", "Pi_1", "Pi_p",
]


class GroupError(RuntimeError):
    pass


def _symbol_index(vec: np.ndarray) -> int:
    for k, s in enumerate(_SYMBOLS):
        if np.allclose(vec, s, atol=1e-12):
            return k
        if np.allclose(vec, -s, atol=1e-12):
            return k + 8
    raise GroupError(f"functional {vec} is not one of the sixteen symbols")


@dataclass(frozen=True)
class GroupElement:
    """Signed permutation of the sixteen symbols plus its 4x4 coordinate matrix."""

    perm: Tuple[int, ...]

    @classmethod
    def from_matrix(cls, R: np.ndarray) -> "GroupElement":
        perm = []
        for k in range(16):
            s = _SYMBOLS[k % 8] * (1 if k < 8 else -1)
            perm.append(_symbol_index(s @ R))
        p = tuple(perm)
        for k in range(8):
            if p[k + 8] != (p[k] + 8) % 16:
                raise GroupError("permutation is not sign consistent")
        return cls(p)

    @property
    def matrix(self) -> np.ndarray:
        # rows of the substitution are the images of x_p, y_p, x_m, y_m
        rows = []
        for k in range(4):
            j = self.perm[k]
            rows.append(_SYMBOLS[j % 8] * (1 if j < 8 else -1))
        return np.array(rows)

    def compose(self, other: "GroupElement") -> "GroupElement":
        """Substitution ``self`` applied after ``other`` (matrix self @ other)."""
        # image of symbol s under (self∘other) is ℓ_s · R_self · R_other
        return GroupElement(tuple(other.perm[j % 8] if j < 8 else (other.perm[j % 8] + 8) % 16
                                  for j in self.perm))

    def __matmul__(self, other):
        return self.compose(other)

    def inverse(self) -> "GroupElement":
        inv = [0] * 16
        for k, j in enumerate(self.perm):
            inv[j] = k
        return GroupElement(tuple(inv))

    def order(self) -> int:
        e = identity()
        g = self
        n = 1
        while g != e:
            g = g @ self
            n += 1
        return n


def identity() -> GroupElement:
    return GroupElement(tuple(range(16)))


def generator(name: str) -> GroupElement:
    return GroupElement.from_matrix(GENERATOR_MATRICES[name])


def apply_symmetry(g: GroupElement, q) -> np.ndarray:
    """New coordinates of point ``q``: coordinate i becomes its image functional."""
    return g.matrix @ np.asarray(q, dtype=float)


def word(text: str) -> GroupElement:
    """Evaluate a space-separated product such as ``"Pi_y Pi_x P12^-1"``.

    The leftmost factor is applied first, i.e. ``"A B"`` is ``B @ A``.
    """
    g = identity()
    for tok in reversed(text.split()):
        if tok == "E":
            continue
        inv = tok.endswith("^-1")
        h = generator(tok[:-3] if inv else tok)
        g = g @ (h.inverse() if inv else h)
    return g


@dataclass
class Group:
    elements: List[GroupElement]
    table: np.ndarray                     # table[i, j] = index of elements[i] @ elements[j]
    identity_index: int
    _index: Dict[GroupElement, int] = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.elements)

    def index(self, g: GroupElement) -> int:
        return self._index[g]

    def inverse_index(self, i: int) -> int:
        return int(np.flatnonzero(self.table[i] == self.identity_index)[0])


def generate_group(generators: Sequence[str] = PHYSICAL + ADDITIONAL, max_order: int = 4096) -> Group:
    """Breadth-first closure of the named generators."""
    gens = [generator(n) for n in generators]
    e = identity()
    seen = {e: 0}
    elements = [e]
    queue = deque([e])
    while queue:
        g = queue.popleft()
        for h in gens:
            gh = g @ h
            if gh not in seen:
                seen[gh] = len(elements)
                elements.append(gh)
                queue.append(gh)
                if len(elements) > max_order:
                    raise GroupError("closure exceeded the safety bound; check generators")
    n = len(elements)
    table = np.empty((n, n), dtype=np.int64)
    for i, a in enumerate(elements):
        for j, b in enumerate(elements):
            table[i, j] = seen[a @ b]
    return Group(elements, table, 0, seen)


@dataclass
class ConjugacyClasses:
    members: List[List[int]]              # element indices per class
    class_of: np.ndarray                  # element index -> class index

    @property
    def sizes(self) -> List[int]:
        return [len(m) for m in self.members]

    def __len__(self):
        return len(self.members)


def conjugacy_classes(G: Group, order_words: Optional[Sequence[str]] = None) -> ConjugacyClasses:
    """Partition into classes, ordered by ``order_words`` when given."""
    n = len(G)
    inv = [G.inverse_index(i) for i in range(n)]
    class_of = -np.ones(n, dtype=np.int64)
    members: List[List[int]] = []
    for x in range(n):
        if class_of[x] >= 0:
            continue
        orbit = sorted({int(G.table[G.table[g, x], inv[g]]) for g in range(n)})
        for y in orbit:
            class_of[y] = len(members)
        members.append(orbit)
    if order_words is not None:
        wanted = [int(class_of[G.index(word(w))]) for w in order_words]
        if sorted(wanted) != list(range(len(members))):
            raise GroupError("representative words do not hit every class exactly once")
        members = [members[c] for c in wanted]
        for c, m in enumerate(members):
            class_of[m] = c
    return ConjugacyClasses(members, class_of)


def class_constants(G: Group, classes: ConjugacyClasses) -> np.ndarray:
    """c[i, j, l]: occurrences of class l in the class product K_i K_j."""
    k = len(classes)
    c = np.zeros((k, k, k), dtype=np.int64)
    sizes = classes.sizes
    for i, Ki in enumerate(classes.members):
        for j, Kj in enumerate(classes.members):
            counts = np.bincount(classes.class_of[G.table[np.ix_(Ki, Kj)].ravel()], minlength=k)
            # each element of K_l appears counts[l] / g_l times
            for l in range(k):
                q, r = divmod(int(counts[l]), sizes[l])
                if r:
                    raise GroupError("class product is not a union of classes")
                c[i, j, l] = q
    return c


# --- exact arithmetic in Z[√2] ---------------------------------------------

Zr2 = Tuple[int, int]


def zmul(a: Zr2, b: Zr2) -> Zr2:
    return (a[0] * b[0] + 2 * a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def zadd(a: Zr2, b: Zr2) -> Zr2:
    return (a[0] + b[0], a[1] + b[1])


def zscale(k: int, a: Zr2) -> Zr2:
    return (k * a[0], k * a[1])


def zfloat(a: Zr2) -> float:
    return a[0] + a[1] * SQRT2


def zformat(a: Zr2) -> str:
    if a[1] == 0:
        return str(a[0])
    if a[0] == 0:
        # b√2 = ±√(2b²)
        return ("-" if a[1] < 0 else "") + f"√{2 * a[1] * a[1]}"
    return f"{a[0]}{'+' if a[1] > 0 else '-'}{abs(a[1])}√2"


def _snap(x: float, bound: int) -> Zr2:
    best = None
    for b in range(-bound, bound + 1):
        a = round(x - b * SQRT2)
        err = abs(x - a - b * SQRT2)
        if best is None or err < best[0]:
            best = (err, (int(a), b))
    if best[0] > 1e-6:
        raise GroupError(f"character value {x} is not in Z[√2]")
    return best[1]


@dataclass
class CharacterTable:
    class_sizes: List[int]
    class_words: List[str]
    rows: List[List[Zr2]]                 # rows[R][i] = χ_i^(R)

    @property
    def dimensions(self) -> List[int]:
        return [r[0][0] for r in self.rows]

    @property
    def order(self) -> int:
        return sum(self.class_sizes)

    def as_float(self) -> np.ndarray:
        return np.array([[zfloat(v) for v in r] for r in self.rows])

    def format(self) -> str:
        head = " ".join(f"{g:>5d}" for g in self.class_sizes)
        lines = ["class sizes: " + head]
        for r in self.rows:
            lines.append(" ".join(f"{zformat(v):>5s}" for v in r))
        return "\n".join(lines)


def _burnside_characters(c: np.ndarray, sizes: Sequence[int], seed: int = 7) -> np.ndarray:
    """Simultaneous eigenvectors of the class-multiplication matrices."""
    k = len(sizes)
    rng = np.random.default_rng(seed)
    for _ in range(20):
        weights = rng.integers(1, 1000, size=k).astype(float)
        M = np.tensordot(weights, c.astype(float), axes=(0, 0))   # M[j, l]
        vals, vecs = np.linalg.eig(M)
        if np.min(np.abs(np.subtract.outer(vals, vals)) + np.eye(k) * 1e9) > 1e-6:
            break
    else:
        raise GroupError("could not separate the class-multiplication eigenvalues")
    order = sum(sizes)
    chars = []
    for v in vecs.T:
        omega = v / v[0]                          # ω_j = g_j χ_j / χ_E
        dim = math.sqrt(order / np.sum(np.abs(omega) ** 2 / np.asarray(sizes)))
        chars.append(np.real_if_close(dim * omega / np.asarray(sizes)))
    return np.array(chars)


def character_table(G: Group, classes: Optional[ConjugacyClasses] = None,
                    class_words: Sequence[str] = CLASS_WORDS) -> CharacterTable:
    """Irreducible characters, exact in Z[√2].

    Rows are ordered: one-dimensional rows trivial on the additional
    symmetries first, then the remaining rows by dimension.
    """
    if classes is None:
        classes = conjugacy_classes(G, class_words)
    sizes = classes.sizes
    c = class_constants(G, classes)
    raw = _burnside_characters(c, sizes)
    if np.abs(np.imag(raw)).max() > 1e-8:
        raise GroupError("complex characters are not expected for this group")
    rows = [[_snap(float(np.real(x)), 8) for x in r] for r in raw]
    if len(rows) != len(sizes):
        raise GroupError("number of irreducible characters differs from number of classes")
    table = CharacterTable(list(sizes), list(class_words), rows)
    verify_character_table(table, c)
    phys_cols = [class_words.index(w) for w in ("Pi_2", "Pi_1", "Pi_p")]

    def sort_key(r):
        physical = r[0] == (1, 0) and all(r[i] == (1, 0) for i in phys_cols)
        return (not physical, r[0][0], [-zfloat(v) for v in r])

    table.rows.sort(key=sort_key)
    return table


def verify_character_table(table: CharacterTable, c: Optional[np.ndarray] = None) -> None:
    """Exact orthogonality (rows and columns) and, with ``c``, the product relations."""
    g = table.class_sizes
    order = table.order
    k = len(g)
    rows = table.rows
    if sum(r[0][0] ** 2 for r in rows) != order:
        raise GroupError("sum of squared dimensions differs from the group order")
    for R, S in itertools.combinations_with_replacement(range(k), 2):
        acc = (0, 0)
        for i in range(k):
            acc = zadd(acc, zscale(g[i], zmul(rows[R][i], rows[S][i])))
        if acc != ((order, 0) if R == S else (0, 0)):
            raise GroupError(f"row orthogonality fails for rows {R}, {S}")
    for i, j in itertools.combinations_with_replacement(range(k), 2):
        acc = (0, 0)
        for r in rows:
            acc = zadd(acc, zmul(r[i], r[j]))
        expected = (order // g[i], 0) if i == j else (0, 0)
        if acc != expected:
            raise GroupError(f"column orthogonality fails for classes {i}, {j}")
    if c is not None:
        for r in rows:
            dim = r[0][0]
            for i in range(k):
                for j in range(k):
                    lhs = zscale(g[i] * g[j], zmul(r[i], r[j]))
                    rhs = (0, 0)
                    for l in range(k):
                        if c[i, j, l]:
                            rhs = zadd(rhs, zscale(int(c[i, j, l]) * g[l], r[l]))
                    if lhs != zscale(dim, rhs):
                        raise GroupError("character product relation fails")


def physical_representations(table: CharacterTable) -> List[Dict[str, int]]:
    """One-dimensional rows equal to 1 on Π1, Π2 and Πp (hence Πm).

    Each entry carries the signs on Πx, Πy and P12 and the row index.
    """
    cols = {w: table.class_words.index(w) for w in ("Pi_1", "Pi_2", "Pi_p", "Pi_x", "Pi_y", "P12")}
    out = []
    for idx, r in enumerate(table.rows):
        if r[0] != (1, 0):
            continue
        if all(r[cols[w]] == (1, 0) for w in ("Pi_1", "Pi_2", "Pi_p")):
            out.append({"row": idx, "Pi_x": r[cols["Pi_x"]][0], "Pi_y": r[cols["Pi_y"]][0],
                        "P12": r[cols["P12"]][0]})
    if len(out) != 8:
        raise GroupError(f"expected 8 physical representations, found {len(out)}")
    return out


def quotient_order(G: Group, normal_generators: Sequence[str] = ADDITIONAL) -> int:
    """Order of G modulo the normal closure of ``normal_generators``."""
    n = len(G)
    inv = [G.inverse_index(i) for i in range(n)]
    N = {G.identity_index}
    frontier = [G.index(generator(w)) for w in normal_generators]
    while frontier:
        x = frontier.pop()
        if x in N:
            continue
        N.add(x)
        for g in range(n):
            frontier.append(int(G.table[G.table[g, x], inv[g]]))
        for y in list(N):
            frontier.append(int(G.table[x, y]))
    return n // len(N)
