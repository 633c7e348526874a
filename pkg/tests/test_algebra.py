import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from coulomb2d.algebra import (
    Coefficient, I, LadderMonomial, OperatorPolynomial, adjoint, apply, combine,
    deserialize, from_coordinate_polynomial, matrix_element, multiply, serialize,
    shift_signature, term_count,
)
from coulomb2d.hamiltonian import OperatorKind, build_operator

a1, a2 = OperatorPolynomial.annihilator(0), OperatorPolynomial.annihilator(1)
c1, c2 = OperatorPolynomial.creator(0), OperatorPolynomial.creator(1)
ONE = OperatorPolynomial.identity()


def key(p=(0, 0, 0, 0), q=(0, 0, 0, 0)):
    return tuple(p) + tuple(q)


def test_canonical_commutator():
    assert multiply(a1, c1) == OperatorPolynomial({key((1, 0, 0, 0), (1, 0, 0, 0)): 1, key(): 1})


def test_distinct_modes_commute():
    assert multiply(a1, c2) == OperatorPolynomial({key((0, 1, 0, 0), (1, 0, 0, 0)): 1})


def test_number_squared():
    N = OperatorPolynomial.number(0)
    expected = OperatorPolynomial({key((2, 0, 0, 0), (2, 0, 0, 0)): 1, key((1, 0, 0, 0), (1, 0, 0, 0)): 1})
    assert multiply(N, N) == expected
    for n in range(4):
        v = apply(expected, {(n, 0, 0, 0): 1.0})
        assert v.get((n, 0, 0, 0), 0) == pytest.approx(n * n)


def test_combine_identity_and_cancellation():
    A = multiply(c1, a2) + ONE
    assert combine([A], [1]) == A
    assert len(combine([A, A], [1, -1])) == 0
    with pytest.raises(ValueError):
        combine([A, A], [1])


def test_adjoint_examples():
    assert adjoint(a1) == c1
    A = combine([multiply(c1, a2)], [I])
    assert adjoint(A) == combine([multiply(c2, a1)], [Coefficient(0, -1)])


def test_term_count_of_empty():
    assert term_count(OperatorPolynomial()) == 0


def test_shift_signature_number_operator():
    assert shift_signature(OperatorPolynomial.number(2)) == {(0, 0, 0, 0)}


def test_monomial_helpers():
    m = LadderMonomial((1, 0, 2, 0), (0, 1, 0, 0))
    assert m.degree == 4
    assert m.shift == (1, -1, 2, 0)
    assert LadderMonomial.from_key(m.key) == m


def test_coordinate_conversion_radial_square():
    # x_p² + y_p² = a1†a2† + a1 a2 + a1†a1 + a2†a2 + 1
    P = from_coordinate_polynomial([(1, (2, 0, 0, 0), (0,) * 4), (1, (0, 2, 0, 0), (0,) * 4)])
    expected = OperatorPolynomial({
        key((1, 1, 0, 0)): 1, key(q=(1, 1, 0, 0)): 1,
        key((1, 0, 0, 0), (1, 0, 0, 0)): 1, key((0, 1, 0, 0), (0, 1, 0, 0)): 1, key(): 1,
    })
    assert P == expected
    assert complex(matrix_element(P, (0,) * 4, (0,) * 4)) == 1


def test_matrix_element_examples():
    T = build_operator(OperatorKind.T1_PLUS_T2)
    assert complex(matrix_element(T, (0, 0, 0, 0), (0, 0, 0, 0))) == 2
    assert complex(matrix_element(T, (1, 1, 1, 1), (0, 0, 0, 0))) == -3
    assert complex(matrix_element(T, (1, 0, 0, 0), (1, 0, 0, 0))) == 6


def test_matrix_element_radical_is_squarefree():
    me = matrix_element(c1, (1, 0, 0, 0), (0, 0, 0, 0))
    assert me.radicand == 1 and me.coef == 1
    me = matrix_element(multiply(c1, c1), (2, 0, 0, 0), (0, 0, 0, 0))
    assert me.radicand == 2 and me.coef == 1


def test_serialize_roundtrip():
    A = combine([multiply(c1, a2), ONE, multiply(c2, c2)], [Coefficient(Fraction(1, 3), 2), -1, I])
    text = serialize(A)
    assert deserialize(text) == A
    first = text.splitlines()[0].split()
    assert first == ["0", "0", "0", "0", "0", "0", "0", "0", "-1/1", "0/1"]


# --- property tests ---------------------------------------------------------

small_exps = st.tuples(*[st.integers(0, 2)] * 8)
coefs = st.tuples(st.integers(-3, 3), st.integers(-3, 3)).filter(lambda c: c != (0, 0))
polys = st.dictionaries(small_exps, coefs, min_size=1, max_size=3).map(
    lambda d: OperatorPolynomial({k: Coefficient(*v) for k, v in d.items()}))


def _max_shift(A):
    return max(max(k[i] for k in A.terms) for i in range(4))


@settings(max_examples=25, deadline=None)
@given(polys, polys, st.tuples(*[st.integers(0, 2)] * 4))
def test_product_matches_matrix_product(A, B, n):
    """⟨m|AB|n⟩ = Σ_k ⟨m|A|k⟩⟨k|B|n⟩ over intermediate kets."""
    AB = multiply(A, B)
    vec_B = apply(B, {n: 1.0})
    vec_AB = apply(A, vec_B)
    for m in set(vec_AB) | set(apply(AB, {n: 1.0})):
        direct = complex(matrix_element(AB, m, n))
        via = sum(complex(matrix_element(A, m, k)) * complex(matrix_element(B, k, n)) for k in vec_B)
        assert direct == pytest.approx(via, abs=1e-9)
        assert direct == pytest.approx(vec_AB.get(m, 0), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(polys, polys)
def test_adjoint_is_antihomomorphism(A, B):
    assert adjoint(multiply(A, B)) == multiply(adjoint(B), adjoint(A))
    assert adjoint(adjoint(A)) == A


@settings(max_examples=30, deadline=None)
@given(polys, polys, polys)
def test_product_is_associative(A, B, C):
    assert multiply(multiply(A, B), C) == multiply(A, multiply(B, C))


@settings(max_examples=30, deadline=None)
@given(polys, st.tuples(*[st.integers(0, 3)] * 4), st.tuples(*[st.integers(0, 3)] * 4))
def test_matrix_element_adjoint_symmetry(A, m, n):
    lhs = complex(matrix_element(adjoint(A), m, n))
    rhs = complex(matrix_element(A, n, m)).conjugate()
    assert lhs == pytest.approx(rhs, abs=1e-9)


@pytest.mark.parametrize("kind", [OperatorKind.T1_PLUS_T2, OperatorKind.T12, OperatorKind.R1R12_PLUS_R2R12,
                                  OperatorKind.R1R2, OperatorKind.B, OperatorKind.LZ4,
                                  OperatorKind.T1, OperatorKind.R1R12])
def test_built_operators_are_hermitian(kind):
    A = build_operator(kind)
    assert adjoint(A) == A


@pytest.mark.parametrize("kind", [k for k in OperatorKind if k is not OperatorKind.STARK_X1_PLUS_X2])
def test_shifts_conserve_angular_momentum_and_parity(kind):
    A = build_operator(kind)
    for d in shift_signature(A):
        assert d[0] - d[1] + d[2] - d[3] == 0
    for k in A.terms:
        assert (k[0] + k[1] + k[4] + k[5]) % 2 == 0
        assert (k[2] + k[3] + k[6] + k[7]) % 2 == 0
