import numpy as np
import pytest
from hypothesis import given, strategies as st

from latticetft import exactlin as el
from latticetft.algebra import (Algebra, AlgebraMap, InvalidAlgebra, NotFrobenius, change_basis, direct_sum,
                                matrix_algebra, standard_library, tensor_product, upper_triangular)

import oracles

LIB = standard_library()
FROBENIUS = {
    "M1": LIB["k"], "M2": LIB["M2"], "M3": LIB["M3"], "Z2": LIB["Z2"], "Z3": LIB["Z3"], "S3": LIB["S3"],
    "kk": LIB["kk"], "M2+k": direct_sum(LIB["M2"], LIB["k"]), "Z2+M2": direct_sum(LIB["Z2"], LIB["M2"]),
}
ALL = {**FROBENIUS, "T2": LIB["T2"], "T2+k": direct_sum(LIB["T2"], LIB["k"])}


@pytest.mark.parametrize("name", sorted(ALL))
def test_centre_and_quotient_against_oracle(name):
    A = ALL[name]
    assert A.centre().dim == oracles.centre_dim(A)
    assert A.commutator_quotient()[0] == oracles.commutator_quotient_dim(A)
    assert A.is_frobenius() == oracles.is_frobenius(A)


def test_upper_triangular_values():
    T2 = upper_triangular()
    e22 = el.unit_vector(3, 2)
    assert np.trace(T2.left_matrix(e22)) == 1 == oracles.trace_left(T2, e22)
    assert np.trace(T2.right_matrix(e22)) == 2 == oracles.trace_right(T2, e22)
    assert T2.centre().dim == 1
    assert T2.commutator_quotient()[0] == 2
    with pytest.raises(NotFrobenius):
        T2.frobenius()


def test_known_centre_dimensions():
    assert [LIB[k].centre().dim for k in ("k", "M2", "M3", "Z3", "S3")] == [1, 1, 1, 3, 3]


def _copairing_vec(A):
    return A.frobenius().copairing.reshape(-1)


@pytest.mark.parametrize("name", sorted(FROBENIUS))
def test_dual_basis_sums_to_one(name):
    A = FROBENIUS[name]
    fd = A.frobenius()
    total = sum((A.mul(A.basis(i), fd.dual_basis[i]) for i in range(A.dim)), el.zeros(A.dim))
    assert el.equal(total, A.one())


@pytest.mark.parametrize("name", sorted(FROBENIUS))
def test_copairing_symmetric_balanced_idempotent(name):
    A = FROBENIUS[name]
    C = A.frobenius().copairing
    assert el.equal(C, C.T)
    E = tensor_product(A.opposite(), A)
    beta = C.reshape(-1)
    assert el.equal(E.mul(beta, beta), beta)
    for i in range(A.dim):
        a = A.basis(i)
        a1, one_a = el.kron(a, A.one()), el.kron(A.one(), a)
        assert el.equal(E.mul(beta, a1), E.mul(beta, one_a))
        assert el.equal(E.mul(a1, beta), E.mul(one_a, beta))


@pytest.mark.parametrize("name", sorted(FROBENIUS))
def test_pairing_symmetric_and_invariant(name):
    A = FROBENIUS[name]
    fd = A.frobenius()
    G = fd.pairing
    assert el.equal(G, G.T)
    eps = fd.counit
    n = A.dim
    for i in range(n):
        for j in range(n):
            bc = A.mul(A.basis(i), A.basis(j))
            for k in range(n):
                lhs = np.dot(eps, A.mul(A.basis(k), bc))
                rhs = np.dot(eps, A.mul(A.mul(A.basis(k), A.basis(i)), A.basis(j)))
                assert lhs == rhs


@pytest.mark.parametrize("name", sorted(FROBENIUS))
def test_centre_projector(name):
    A = FROBENIUS[name]
    P = A.centre_projector()
    assert el.equal(np.dot(P, P), P)
    assert el.rank(P) == A.centre().dim == A.commutator_quotient()[0]
    assert el.same_subspace(el.column_space(P), A.centre().embed)


invertible_3x3 = st.lists(st.integers(-2, 2), min_size=9, max_size=9).map(
    lambda xs: el.array(np.array(xs, dtype=object).reshape(3, 3))).filter(el.is_invertible)


@given(invertible_3x3)
def test_invariants_under_change_of_basis(P):
    for A in (LIB["T2"], LIB["Z3"]):
        B = change_basis(A, P)
        assert not B.violations()
        assert B.centre().dim == A.centre().dim
        assert B.commutator_quotient()[0] == A.commutator_quotient()[0]
        assert B.is_frobenius() == A.is_frobenius()


def test_invalid_structure_constants_rejected():
    A = matrix_algebra(2)
    mult = A.mult.copy()
    mult[1, 2, 0] = el.QQ(2)
    assert Algebra(mult, A.unit).violations()
    with pytest.raises(InvalidAlgebra):
        Algebra(mult[:, :, :3], A.unit)


def test_algebra_map_validation():
    kk, T2 = LIB["kk"], LIB["T2"]
    good = AlgebraMap(kk, T2, el.array([[1, 0], [0, 0], [0, 1]]))
    bad = AlgebraMap(kk, T2, el.array([[1, 0], [1, 0], [0, 1]]))
    assert not good.violations()
    assert bad.violations()


@pytest.mark.parametrize("p", [2, 3, 5])
def test_prime_fields(p):
    F = el.PrimeField(p)
    M2 = standard_library(F)["M2"]
    # trace form on M_2 is 2·tr(xy), degenerate exactly in characteristic 2
    assert M2.is_frobenius() == (p != 2)
    assert M2.centre().dim == 1
