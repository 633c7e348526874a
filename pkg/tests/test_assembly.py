import cmath

import numpy as np
import pytest
import scipy.linalg as sl

from coulomb2d.algebra import apply
from coulomb2d.assembly import (
    AssemblyError, assemble, build_problem, combine_problem, potential_matrix, raw_matrix,
)
from coulomb2d.basis import IDENTITY, SINGLET, TRIPLET, SymBasis, enumerate_basis, enumerate_stark_basis
from coulomb2d.hamiltonian import OperatorKind, SystemParams, build_operator


def oracle_matrix(A, basis):
    """⟨n_i| A |s_j⟩ by applying A to explicit Fock expansions of the kets."""
    n = len(basis)
    out = np.zeros((n, n), dtype=complex)
    for j, rep in enumerate(basis.states):
        ket = {}
        for perm, sign in basis.group:
            m = tuple(int(rep[p]) for p in perm)
            ket[m] = ket.get(m, 0) + sign
        image = apply(A, ket)
        for i, rep_i in enumerate(basis.states):
            out[i, j] = image.get(tuple(int(v) for v in rep_i), 0)
    return out


@pytest.mark.parametrize("kind", ["T1_plus_T2", "T12", "R1R12", "R2R12", "R1R2", "B"])
@pytest.mark.parametrize("M_L,symmetry", [(0, SINGLET), (1, TRIPLET), (1, SINGLET)])
def test_dense_oracle(kind, M_L, symmetry):
    basis = enumerate_basis(M_L, symmetry, 12 if kind != "B" else 10)
    A = build_operator(kind)
    got = assemble(A, basis).toarray()
    want = oracle_matrix(A, basis)
    assert np.abs(want.imag).max() < 1e-9
    assert np.allclose(got, want.real, rtol=1e-12, atol=1e-9 * np.abs(want).max())


def test_dense_oracle_stark_basis():
    basis = enumerate_stark_basis(SINGLET, 6, -1)
    A = build_operator(OperatorKind.STARK_X1_PLUS_X2)
    got = assemble(A, basis).toarray()
    want = oracle_matrix(A, basis).real
    assert np.allclose(got, want, atol=1e-9 * np.abs(want).max())


def test_single_state_kinetic_entry():
    basis = enumerate_basis(0, SINGLET, 0)
    M = assemble(build_operator("T1_plus_T2"), basis).toarray()
    # ⟨0000|T1+T2|0000⟩ = 2, doubled by the self-symmetric ket weight
    assert M.tolist() == [[4.0]]


def test_angular_momentum_matrix_is_diagonal():
    for M_L in (0, 1, 2):
        basis = enumerate_basis(M_L, SINGLET, 16)
        L = assemble(build_operator(OperatorKind.LZ4), basis).toarray()
        weight = np.where(basis.self_symmetric(), 2.0, 1.0)
        assert np.allclose(L, np.diag(4 * M_L * weight))


def test_block_band_structure():
    basis = enumerate_basis(0, SINGLET, 30)
    N = basis.total_quanta
    for kind in ("T1_plus_T2", "R1R12_plus_R2R12", "R1R2", "B"):
        M = assemble(build_operator(kind), basis).upper
        assert np.abs(N[M.row] - N[M.col]).max() <= 12
    sb = enumerate_stark_basis(SINGLET, 16, 1)
    S = assemble(build_operator(OperatorKind.STARK_X1_PLUS_X2), sb).upper
    assert np.abs(sb.total_quanta[S.row] - sb.total_quanta[S.col]).max() <= 16


def test_sparsity_pattern_within_shift_signature():
    from coulomb2d.algebra import shift_signature
    basis = enumerate_basis(0, SINGLET, 20)
    A = build_operator("R1R2")
    sig = shift_signature(A)
    M = raw_matrix(A, basis).tocoo()
    for r, c in zip(M.row, M.col):
        src = basis.states[c]
        tgt = basis.states[r]
        # reachable from the ket or its swapped partner
        assert (tuple(tgt - src) in sig) or (tuple(tgt - src[[2, 3, 0, 1]]) in sig)


def test_non_hermitian_operator_rejected():
    from coulomb2d.algebra import OperatorPolynomial, multiply
    basis = enumerate_basis(0, SINGLET, 10)
    raising = multiply(OperatorPolynomial.creator(0), OperatorPolynomial.creator(1))
    with pytest.raises(AssemblyError):
        assemble(raising, basis)


def test_one_electron_pieces_are_symmetric_in_exchange_basis():
    # on exchange-adapted kets T1 and T2 have identical matrices
    basis = enumerate_basis(0, SINGLET, 12)
    T1 = assemble(build_operator("T1"), basis).toarray()
    T2 = assemble(build_operator("T2"), basis).toarray()
    assert np.allclose(T1, T2, atol=1e-9)


def test_build_problem_preconditions():
    basis = enumerate_basis(0, SINGLET, 6)
    with pytest.raises(AssemblyError):
        build_problem(SystemParams(1.0, 2.0), basis)
    with pytest.raises(AssemblyError):
        build_problem(SystemParams.helium(), basis, with_stark=True)


def test_problem_pieces():
    basis = enumerate_basis(0, SINGLET, 12)
    P = build_problem(SystemParams.helium(), basis)
    T = assemble(build_operator("T1_plus_T2"), basis).full() * 0.5
    assert abs(P.T - T).max() == 0
    assert (P.B.diagonal() > 0).all()
    V = potential_matrix(P, 0.0)
    assert abs(V - (-32) * (P.V_r1r12 + P.V_r2r12)).max() < 1e-12
    finite = build_problem(SystemParams(1.0, 1.0, 4.0, -1, -1, 2), basis)
    T12 = assemble(build_operator("T12"), basis).full()
    mu = 4.0 / 5.0
    assert abs(finite.T - (T / mu + T12 / 4.0)).max() < 1e-10


def test_unsymmetrized_basis_for_unequal_masses():
    states = enumerate_basis(0, "none", 8).states
    full = np.unique(np.vstack([states, states[:, [2, 3, 0, 1]]]), axis=0)
    basis = SymBasis(full, 8, "none", 0, group=((IDENTITY, 1),))
    P = build_problem(SystemParams(1.0, 3.0, np.inf, -1, -1, 2), basis)
    A, M = combine_problem(P, 0.5)
    assert abs(A - A.T).max() < 1e-12


def _dense_eigs(P, alpha):
    A, M = combine_problem(P, alpha)
    w = sl.eigvals(A.toarray(), M.toarray())
    return np.sort_complex(w)


def test_conjugate_rotation_gives_conjugate_spectrum():
    P = build_problem(SystemParams.helium(), enumerate_basis(0, SINGLET, 14))
    a = 0.4 * cmath.exp(0.05j)
    w_plus = _dense_eigs(P, a)
    w_minus = _dense_eigs(P, a.conjugate())
    assert np.allclose(np.sort_complex(w_plus.conj()), w_minus, atol=1e-8)


def test_real_alpha_gives_real_symmetric_pencil():
    P = build_problem(SystemParams.helium(), enumerate_basis(0, SINGLET, 10))
    A, M = combine_problem(P, 0.4)
    assert not np.iscomplexobj(A.data)
    assert abs(A - A.T).max() == 0 and abs(M - M.T).max() == 0


def test_ket_rescaling_leaves_spectrum_unchanged():
    P = build_problem(SystemParams.helium(), enumerate_basis(0, SINGLET, 12))
    A, M = (m.toarray() for m in combine_problem(P, 0.4))
    D = np.diag(np.random.default_rng(0).uniform(0.5, 2.0, len(A)))
    assert np.allclose(sl.eigh(A, M, eigvals_only=True), sl.eigh(D @ A @ D, D @ M @ D, eigvals_only=True))


def test_matrix_dump_format():
    basis = enumerate_basis(0, SINGLET, 4)
    text = assemble(build_operator("B"), basis).dump().splitlines()
    r, c, v = text[0].split()
    assert (int(r), int(c)) == (0, 0) and float(v) > 0
    rows = [tuple(map(int, l.split()[:2])) for l in text]
    assert rows == sorted(rows) and all(a <= b for a, b in rows)
