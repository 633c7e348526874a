"""Sparse matrices of ladder polynomials over symmetrized Fock bases.

For a representative ``n'`` and basis vector ``|s⟩ = Σ_h sign(h)|h·n⟩`` the
stored entry is ``⟨n'|A|s⟩``.  Since A commutes with every h this equals
``⟨s'|A|s⟩ / |H|``; the common factor cancels in A c = E B c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .algebra import NMODES, OperatorPolynomial
from .basis import SymBasis
from .hamiltonian import OperatorKind, SystemParams, build_operator, potential_weights


class AssemblyError(ValueError):
    pass


@dataclass
class SparseSymMatrix:
    """Symmetric sparse matrix; ``upper`` keeps the row ≤ col entries."""

    upper: sp.coo_matrix
    asymmetry: float = 0.0

    @property
    def shape(self):
        return self.upper.shape

    @property
    def dimension(self) -> int:
        return self.upper.shape[0]

    def full(self) -> sp.csr_matrix:
        u = self.upper.tocsr()
        return (u + sp.triu(u, k=1).T).tocsr()

    def toarray(self) -> np.ndarray:
        return self.full().toarray()

    def diagonal(self) -> np.ndarray:
        return self.upper.tocsr().diagonal()

    def dump(self) -> str:
        """Sorted ``row col value`` lines (upper triangle)."""
        u = self.upper.tocoo()
        order = np.lexsort((u.col, u.row))
        return "".join(f"{u.row[i]} {u.col[i]} {u.data[i]:.17g}\n" for i in order)


def _shift_tables(A: OperatorPolynomial):
    """Group monomials by shift δ = p - q: δ -> (q exponents, coefficients)."""
    groups: Dict[Tuple[int, ...], List] = {}
    is_complex = False
    for key, c in A.raw_items():
        p, q = key[:NMODES], key[NMODES:]
        delta = tuple(p[i] - q[i] for i in range(NMODES))
        groups.setdefault(delta, []).append((q, complex(c)))
        if c.im:
            is_complex = True
    dtype = complex if is_complex else float
    tables = {}
    for delta, items in groups.items():
        qs = np.array([q for q, _ in items], dtype=np.int64)
        cs = np.array([c if is_complex else c.real for _, c in items], dtype=dtype)
        tables[delta] = (qs, cs)
    return tables, dtype


def _falling_table(col: np.ndarray, qmax: int) -> np.ndarray:
    """ff[k] = col (col-1) ... (col-k+1) as floats, k = 0..qmax."""
    out = np.ones((qmax + 1, len(col)))
    c = col.astype(float)
    for k in range(1, qmax + 1):
        out[k] = out[k - 1] * (c - (k - 1))
    return out


def _sqrt_ratio(src: np.ndarray, delta) -> np.ndarray:
    """sqrt(∏_i (src_i + δ_i)! / src_i!) evaluated by finite products."""
    ratio = np.ones(len(src))
    for i, d in enumerate(delta):
        col = src[:, i].astype(float)
        if d > 0:
            for k in range(1, d + 1):
                ratio *= col + k
        elif d < 0:
            for k in range(0, -d):
                ratio /= col - k
    return np.sqrt(ratio)


def raw_matrix(A: OperatorPolynomial, basis: SymBasis, rows: Optional[np.ndarray] = None) -> sp.csr_matrix:
    """Unsymmetrized-storage matrix M[i, j] = ⟨n_i| A |s_j⟩ (all rows)."""
    tables, dtype = _shift_tables(A)
    states = basis.states
    cols_all = np.arange(len(states)) if rows is None else np.asarray(rows)
    qmax = max((int(qs.max()) for qs, _ in tables.values()), default=0)
    R, C, V = [], [], []
    for perm, sign in basis.group:
        src = states[cols_all][:, list(perm)]
        ff = [_falling_table(src[:, i], qmax) for i in range(NMODES)]
        for delta, (qs, cs) in tables.items():
            tgt = src + np.array(delta)
            idx = basis.lookup(tgt)
            hit = idx >= 0
            if not hit.any():
                continue
            sub = np.flatnonzero(hit)
            poly = np.zeros(len(sub), dtype=dtype)
            for q, c in zip(qs, cs):
                poly += c * (ff[0][q[0], sub] * ff[1][q[1], sub] * ff[2][q[2], sub] * ff[3][q[3], sub])
            vals = sign * poly * _sqrt_ratio(src[sub], delta)
            R.append(idx[sub])
            C.append(cols_all[sub])
            V.append(vals)
    n = len(states)
    if not R:
        return sp.csr_matrix((n, n), dtype=dtype)
    M = sp.coo_matrix((np.concatenate(V), (np.concatenate(R), np.concatenate(C))), shape=(n, n))
    M = M.tocsr()
    M.sum_duplicates()
    M.eliminate_zeros()
    return M


def assemble(A: OperatorPolynomial, basis: SymBasis, check_tol: float = 1e-12) -> SparseSymMatrix:
    """Symmetric matrix of ``A`` over ``basis``.

    Raises AssemblyError when the raw matrix is not symmetric to ``check_tol``
    relative to its largest entry (operator and basis symmetry mismatch).
    """
    M = raw_matrix(A, basis)
    if np.iscomplexobj(M.data) and M.nnz and np.abs(M.data.imag).max() == 0:
        M = M.real.tocsr()
    diff = (M - M.T).tocsr()
    scale = np.abs(M.data).max() if M.nnz else 0.0
    asym = (np.abs(diff.data).max() / scale) if diff.nnz and scale else 0.0
    if asym > check_tol:
        raise AssemblyError(f"assembled matrix not symmetric: relative asymmetry {asym:.3e}")
    Msym = ((M + M.T) * 0.5).tocoo()
    keep = Msym.row <= Msym.col
    upper = sp.coo_matrix((Msym.data[keep], (Msym.row[keep], Msym.col[keep])), shape=M.shape)
    return SparseSymMatrix(upper, asym)


@dataclass
class ProblemMatrices:
    """Kinetic, potential pieces and metric over one basis."""

    basis: SymBasis
    params: SystemParams
    T: sp.csr_matrix
    V_r1r12: sp.csr_matrix
    V_r2r12: sp.csr_matrix
    V_r1r2: sp.csr_matrix
    B: sp.csr_matrix
    stark: Optional[sp.csr_matrix] = None
    metadata: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.B.shape[0]

    def pieces(self) -> Dict[str, sp.csr_matrix]:
        out = {"T": self.T, "V_r1r12": self.V_r1r12, "V_r2r12": self.V_r2r12,
               "V_r1r2": self.V_r1r2, "B": self.B}
        if self.stark is not None:
            out["S"] = self.stark
        return out

    def dump(self, directory) -> List[Path]:
        """Write every piece as sorted ``row col value`` text, one file each."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for name, m in self.pieces().items():
            path = directory / f"{name}.txt"
            path.write_text(SparseSymMatrix(sp.triu(m).tocoo()).dump())
            written.append(path)
        return written


def build_problem(params: SystemParams, basis: SymBasis, with_stark: bool = False) -> ProblemMatrices:
    """Assemble all pieces of {T/2μ + T12/m3 + V} c = E B c."""
    if basis.symmetry != "none" and not params.exchange_symmetric:
        raise AssemblyError("exchange-adapted basis requires m1 = m2 and Q1 = Q2")
    if with_stark and basis.M_L is not None:
        raise AssemblyError("the field mixes M_L; use a Stark-adapted basis")

    def mat(kind):
        return assemble(build_operator(kind), basis).full()

    if params.exchange_symmetric:
        T = mat(OperatorKind.T1_PLUS_T2) * (1.0 / (2.0 * params.mu13))
    else:
        T = (mat(OperatorKind.T1) * (1.0 / (2.0 * params.mu13))
             + mat(OperatorKind.T2) * (1.0 / (2.0 * params.mu23)))
    if params.inverse_m3:
        T = T + mat(OperatorKind.T12) * params.inverse_m3
    return ProblemMatrices(
        basis=basis,
        params=params,
        T=T.tocsr(),
        V_r1r12=mat(OperatorKind.R1R12),
        V_r2r12=mat(OperatorKind.R2R12),
        V_r1r2=mat(OperatorKind.R1R2),
        B=mat(OperatorKind.B),
        stark=mat(OperatorKind.STARK_X1_PLUS_X2) if with_stark else None,
        metadata={"N_base": basis.N_base, "M_L": basis.M_L, "symmetry": basis.symmetry,
                  "size": len(basis)},
    )


def potential_matrix(P: ProblemMatrices, epsilon: float = 1.0) -> sp.csr_matrix:
    w = potential_weights(P.params, epsilon)
    return (w[OperatorKind.R1R12] * P.V_r1r12 + w[OperatorKind.R2R12] * P.V_r2r12
            + w[OperatorKind.R1R2] * P.V_r1r2).tocsr()


def combine_problem(P: ProblemMatrices, alpha: complex, epsilon: float = 1.0,
                    F: float = 0.0) -> Tuple[sp.csr_matrix, sp.csr_matrix]:
    """(A, M) of A c = E M c for scale ``alpha`` (complex for rotation).

    A = α⁴ T + α⁸ V + α¹⁶ F·S,  M = α¹² B.
    """
    if F and P.stark is None:
        raise AssemblyError("field requested but Stark matrix not assembled")
    a = complex(alpha)
    if a.imag == 0:
        a = a.real
    A = a**4 * P.T + a**8 * potential_matrix(P, epsilon)
    if F:
        A = A + (a**16 * F) * P.stark
    M = a**12 * P.B
    return A.tocsr(), M.tocsr()
