"""Symmetry-adapted truncated Fock bases.

A basis vector is the symmetrized ket ``sum_h sign(h) |h·n⟩`` over a small
group ``H`` of mode permutations, labelled by its representative ``n`` (the
lexicographically largest member of the orbit).  For the field-free problem
``H`` is {identity, (1,2,3,4)->(3,4,1,2)} with both signs +1; the Stark
basis adds the (1,2,3,4)->(2,1,4,3) pairing with sign ±1.  Kets are kept
unnormalized; A and B are built with the same convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

SINGLET = "singlet"
TRIPLET = "triplet"
NO_EXCHANGE = "none"
SYMMETRIES = (SINGLET, TRIPLET, NO_EXCHANGE)

IDENTITY = (0, 1, 2, 3)
SWAP = (2, 3, 0, 1)        # |n1 n2 n3 n4> -> |n3 n4 n1 n2>
MIRROR = (1, 0, 3, 2)      # |n1 n2 n3 n4> -> |n2 n1 n4 n3>
SWAP_MIRROR = (3, 2, 1, 0)

FIELD_FREE_GROUP = ((IDENTITY, 1), (SWAP, 1))


def stark_group(parity: int):
    if parity not in (1, -1):
        raise ValueError("parity must be +1 or -1")
    return ((IDENTITY, 1), (SWAP, 1), (MIRROR, parity), (SWAP_MIRROR, parity))


@dataclass(frozen=True)
class BasisState:
    n: Tuple[int, int, int, int]
    self_symmetric: bool
    M_L: int
    C12: int


def angular_momentum(n: Sequence[int]) -> Fraction:
    """(n1 - n2 + n3 - n4) / 4."""
    return Fraction(n[0] - n[1] + n[2] - n[3], 4)


def exchange_class(n: Sequence[int]) -> int:
    return (n[0] - n[1]) % 4


def _check_symmetry(symmetry: str) -> str:
    if symmetry not in SYMMETRIES:
        raise ValueError(f"symmetry must be one of {SYMMETRIES}, got {symmetry!r}")
    return symmetry


def encode(states: np.ndarray, radix: int) -> np.ndarray:
    s = states.astype(np.int64)
    return ((s[:, 0] * radix + s[:, 1]) * radix + s[:, 2]) * radix + s[:, 3]


@dataclass
class SymBasis:
    """Ordered representatives plus lookup; immutable by convention."""

    states: np.ndarray                     # (size, 4) int64
    N_base: int
    symmetry: str
    M_L: Optional[int]                     # None when M_L is mixed (Stark basis)
    group: tuple = FIELD_FREE_GROUP
    _keys: np.ndarray = field(init=False, repr=False)
    _order: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.states = np.ascontiguousarray(self.states, dtype=np.int64).reshape(-1, 4)
        keys = encode(self.states, self.radix)
        self._order = np.argsort(keys, kind="stable")
        self._keys = keys[self._order]
        if len(self._keys) > 1 and np.any(np.diff(self._keys) == 0):
            raise ValueError("duplicate basis states")

    @property
    def radix(self) -> int:
        return self.N_base + 1

    def __len__(self):
        return len(self.states)

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def total_quanta(self) -> np.ndarray:
        return self.states.sum(axis=1)

    def lookup(self, kets: np.ndarray) -> np.ndarray:
        """Index of each ket among the representatives, -1 if absent."""
        kets = np.asarray(kets, dtype=np.int64).reshape(-1, 4)
        out = np.full(len(kets), -1, dtype=np.int64)
        ok = (kets >= 0).all(axis=1) & (kets.sum(axis=1) <= self.N_base)
        if not ok.any() or not len(self._keys):
            return out
        keys = encode(kets[ok], self.radix)
        pos = np.searchsorted(self._keys, keys)
        pos = np.minimum(pos, len(self._keys) - 1)
        hit = self._keys[pos] == keys
        idx = np.where(hit, self._order[pos], -1)
        out[np.flatnonzero(ok)] = idx
        return out

    def index(self, n: Sequence[int]) -> int:
        i = int(self.lookup(np.array([n]))[0])
        if i < 0:
            raise KeyError(tuple(n))
        return i

    def __getitem__(self, i: int) -> BasisState:
        n = tuple(int(v) for v in self.states[i])
        return BasisState(n, n == (n[2], n[3], n[0], n[1]),
                          int(angular_momentum(n)), exchange_class(n))

    def __iter__(self) -> Iterator[BasisState]:
        for i in range(len(self)):
            yield self[i]

    def self_symmetric(self) -> np.ndarray:
        s = self.states
        return (s[:, 0] == s[:, 2]) & (s[:, 1] == s[:, 3])

    def to_csv(self) -> str:
        lines = ["n1,n2,n3,n4,self_symmetric"]
        flags = self.self_symmetric()
        for row, f in zip(self.states, flags):
            lines.append(f"{row[0]},{row[1]},{row[2]},{row[3]},{int(f)}")
        return "\n".join(lines) + "\n"


def order_basis(states: np.ndarray) -> np.ndarray:
    """Sort by total quanta, then lexicographically on (n1, n2, n3, n4)."""
    states = np.asarray(states, dtype=np.int64).reshape(-1, 4)
    if not len(states):
        return states
    order = np.lexsort((states[:, 3], states[:, 2], states[:, 1], states[:, 0], states.sum(axis=1)))
    return states[order]


def _candidates(M_L: Optional[int], N_base: int) -> Iterator[np.ndarray]:
    """All quadruplets with even n1+n2, even n3+n4, fixed (or any) M_L."""
    for n1 in range(N_base + 1):
        n2 = np.arange(0, N_base - n1 + 1)
        n2 = n2[(n1 + n2) % 2 == 0]
        if M_L is None:
            rest = N_base - n1 - n2
            for a, r in zip(n2, rest):
                n3 = np.arange(0, r + 1)
                n4 = np.arange(0, r + 1)
                g3, g4 = np.meshgrid(n3, n4, indexing="ij")
                g3, g4 = g3.ravel(), g4.ravel()
                keep = (g3 + g4 <= r) & ((g3 + g4) % 2 == 0) & ((n1 - a - g3 + g4) % 4 == 0)
                if keep.any():
                    k = keep.sum()
                    yield np.column_stack([np.full(k, n1), np.full(k, a), g3[keep], g4[keep]])
        else:
            if not len(n2):
                continue
            n3 = np.arange(0, N_base + 1)
            g2, g3 = np.meshgrid(n2, n3, indexing="ij")
            g2, g3 = g2.ravel(), g3.ravel()
            g4 = n1 - g2 + g3 - 4 * M_L
            keep = (g4 >= 0) & (n1 + g2 + g3 + g4 <= N_base) & ((g3 + g4) % 2 == 0)
            if keep.any():
                k = keep.sum()
                yield np.column_stack([np.full(k, n1), g2[keep], g3[keep], g4[keep]])


def _filter_exchange(states: np.ndarray, symmetry: str) -> np.ndarray:
    c12 = (states[:, 0] - states[:, 1]) % 4
    if symmetry == SINGLET:
        return states[c12 == 0]
    if symmetry == TRIPLET:
        return states[c12 == 2]
    return states


def _is_field_free_representative(states: np.ndarray) -> np.ndarray:
    # Self-symmetric kets are kept in both exchange classes: for odd M_L the
    # C12 = 2 ones carry part of the triplet spectrum.
    n1, n2, n3, n4 = states.T
    return (n1 > n3) | ((n1 == n3) & (n2 >= n4))


def enumerate_basis(M_L: Optional[int], symmetry: str, N_base: int) -> SymBasis:
    """Representatives with n1+n2+n3+n4 ≤ N_base, ordered by total quanta.

    ``M_L=None`` keeps every angular momentum (input for :func:`stark_symmetrize`).
    ``symmetry='none'`` keeps both exchange classes, for unequal particles.
    """
    _check_symmetry(symmetry)
    if N_base < 0:
        raise ValueError("N_base must be non-negative")
    chunks = []
    for cand in _candidates(M_L, N_base):
        cand = _filter_exchange(cand, symmetry)
        cand = cand[_is_field_free_representative(cand)]
        if len(cand):
            chunks.append(cand)
    states = np.concatenate(chunks) if chunks else np.zeros((0, 4), dtype=np.int64)
    return SymBasis(order_basis(states), N_base, symmetry, M_L)


def brute_force_basis(M_L: int, symmetry: str, N_base: int) -> List[Tuple[int, int, int, int]]:
    """Plain-loop filter over all quadruplets; test oracle for enumerate_basis."""
    out = []
    for n1 in range(N_base + 1):
        for n2 in range(N_base + 1 - n1):
            for n3 in range(N_base + 1 - n1 - n2):
                for n4 in range(N_base + 1 - n1 - n2 - n3):
                    if (n1 + n2) % 2 or (n3 + n4) % 2:
                        continue
                    if n1 - n2 + n3 - n4 != 4 * M_L:
                        continue
                    c12 = (n1 - n2) % 4
                    if c12 != (n3 - n4) % 4:
                        continue
                    if symmetry == SINGLET and c12 != 0 or symmetry == TRIPLET and c12 != 2:
                        continue
                    if n1 > n3 or (n1 == n3 and n2 >= n4):
                        out.append((n1, n2, n3, n4))
    return out


def stark_symmetrize(basis: SymBasis, parity: int) -> SymBasis:
    """Pair |n1 n2 n3 n4⟩⁺ with |n2 n1 n4 n3⟩⁺, even (+1) or odd (-1) under Πx.

    Representatives are the lexicographic maxima of the 4-element orbits;
    orbits whose combination vanishes for the requested parity are dropped.
    """
    group = stark_group(parity)
    s = basis.states
    orbit = np.stack([s[:, list(perm)] for perm, _ in group], axis=1)   # (n, 4, 4)
    keys = np.stack([encode(orbit[:, k], basis.radix) for k in range(len(group))], axis=1)
    is_rep = keys[:, 0] == keys.max(axis=1)
    vanishes = np.zeros(len(s), dtype=bool)
    for k, (_, sign) in enumerate(group):
        # a stabilizing element with sign -1 annihilates the combination
        if sign < 0:
            vanishes |= keys[:, k] == keys[:, 0]
    keep = is_rep & ~vanishes
    return SymBasis(order_basis(s[keep]), basis.N_base, basis.symmetry, None, group=group)


def enumerate_stark_basis(symmetry: str, N_base: int, parity: int) -> SymBasis:
    return stark_symmetrize(enumerate_basis(None, symmetry, N_base), parity)
