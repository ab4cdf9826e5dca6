import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from latticetft import exactlin as el
from latticetft.algebra import AlgebraMap, NotFrobenius, identity_map, standard_library
from latticetft.bimodule import (AlgebraMismatch, Bimodule, balancing_relations, cyclic_tensor, direct_sum,
                                 find_isomorphism, hom_space, module_from_map, multi_tensor,
                                 multi_tensor_idempotent, phi_iso, regular, tensor_bimodule, tensor_over,
                                 tensor_quotient, twist)
from latticetft.library import augmentation, sign_map, swap_map, unit_map

import oracles

LIB = standard_library()
k, kk, M2, Z2, Z3, T2 = (LIB[n] for n in ("k", "kk", "M2", "Z2", "Z3", "T2"))


def conj_map(A, P):
    """x ↦ P x P⁻¹ on M2 in the E_ij basis."""
    Pi = el.inverse(P)
    cols = []
    for i in range(4):
        E = A.basis(i).reshape(2, 2)
        cols.append(el.matmul(P, E, Pi).reshape(-1))
    return AlgebraMap(A, A, np.array(cols, dtype=object).T.copy())


def bimodule_pool():
    """Pairs (M, N) composable over a Frobenius middle algebra."""
    u = unit_map(k, M2)
    aug = augmentation(Z2, k)
    uk = unit_map(k, kk)
    rM2, rZ2, rkk = regular(M2), regular(Z2), regular(kk)
    P = el.array([[1, 1], [0, 1]])
    mods = {
        "M2": rM2, "M2_u": module_from_map(u), "v": twist(rM2, left=u), "M2^c": twist(rM2, right=conj_map(M2, P)),
        "M2+M2": direct_sum(rM2, rM2), "Z2": rZ2, "Z2^s": twist(rZ2, right=sign_map(Z2)),
        "Z2+Z2": direct_sum(rZ2, rZ2), "g": module_from_map(aug), "g*": module_from_map(aug).dual,
        "kk": rkk, "kk^sw": twist(rkk, right=swap_map(kk)), "d": module_from_map(uk), "d*": module_from_map(uk).dual,
        "M2_u*": module_from_map(u).dual, "k": regular(k),
    }
    pairs = []
    for (a, X), (b, Y) in itertools.product(mods.items(), repeat=2):
        if X.right.same_as(Y.left) and X.right.is_frobenius() and X.dim * Y.dim <= 32:
            pairs.append((f"{a}|{b}", X, Y))
    return mods, pairs


MODS, PAIRS = bimodule_pool()


def test_pool_is_large_enough():
    assert len(MODS) >= 15
    assert len(PAIRS) >= 20


@pytest.mark.parametrize("name,X,Y", PAIRS, ids=[p[0] for p in PAIRS])
def test_tensor_idempotent_matches_cokernel(name, X, Y):
    p = multi_tensor_idempotent([X, Y])
    assert el.equal(np.dot(p, p), p)
    I = el.identity(p.shape[0])
    rel = balancing_relations([X, Y])
    # ker p⊗ is exactly the span of the balancing relations
    assert el.same_subspace(el.column_space(I - p), el.column_space(rel))
    assert el.rank(p) == oracles.tensor_over_dim(X, Y) == tensor_quotient([X, Y]).dim
    assert el.same_subspace(tensor_over(X, Y).embed, el.column_space(p))


@pytest.mark.parametrize("name,X,Y", PAIRS[:8], ids=[p[0] for p in PAIRS[:8]])
def test_tensor_is_balanced(name, X, Y):
    s = tensor_over(X, Y)
    for i in range(X.right.dim):
        a = X.right.basis(i)
        lhs = np.dot(el.kron(X.right_matrix(a), el.identity(Y.dim)), s.embed)
        rhs = np.dot(el.kron(el.identity(X.dim), Y.left_matrix(a)), s.embed)
        assert el.equal(np.dot(s.project, lhs), np.dot(s.project, rhs))


@pytest.mark.parametrize("name", sorted(MODS))
def test_cyclic_tensor_and_hom_against_oracle(name):
    X = MODS[name]
    assert len(hom_space(X, X)) == oracles.hom_dim(X, X)
    if X.left.same_as(X.right):
        assert cyclic_tensor(X).dim == oracles.cyclic_tensor_dim(X)


def _rotation_matrix(dims, shift):
    n = len(dims)
    N = int(np.prod(dims))
    R = el.zeros((N, N))
    for idx in itertools.product(*[range(d) for d in dims]):
        src = np.ravel_multi_index(idx, dims)
        rot = idx[shift:] + idx[:shift]
        dst = np.ravel_multi_index(rot, dims[shift:] + dims[:shift])
        R[dst, src] = el.QQ(1)
    return R


@pytest.mark.parametrize("word", [("Z2", "Z2^s", "Z2+Z2"), ("M2_u", "M2_u*", "M2"), ("d", "d*", "kk^sw")])
def test_cyclic_image_rotation_invariant(word):
    chain = [MODS[w] for w in word]
    s = multi_tensor(chain, cyclic=True)
    rotated = multi_tensor(chain[1:] + chain[:1], cyclic=True)
    R = _rotation_matrix([X.dim for X in chain], 1)
    assert el.same_subspace(np.dot(R, s.embed), rotated.embed) if s.dim else rotated.dim == 0


@pytest.mark.parametrize("a,b", [("M2", "M2"), ("M2_u", "M2_u"), ("Z2", "Z2^s"), ("Z2+Z2", "Z2"), ("d", "d"),
                                 ("kk", "kk^sw"), ("v", "v")])
def test_phi_iso(a, b):
    X, Y = MODS[a], MODS[b]
    phi = phi_iso(Y, X)
    assert phi.splitting.dim == len(hom_space(X, Y)) == oracles.hom_dim(X, Y)
    if phi.hom_basis:
        assert el.equal(np.dot(phi.matrix, phi.inverse()), el.identity(len(phi.hom_basis)))


def test_centraliser_dimension_from_cyclic_pair():
    f = unit_map(k, M2)
    X = module_from_map(f)
    assert multi_tensor([X, X.dual], cyclic=True).dim == oracles.centraliser_dim(f) == 4


def test_triple_regular_collapses_to_centre():
    for A in (M2, Z3, kk):
        R = regular(A)
        assert multi_tensor([R, R, R], cyclic=True).dim == A.centre().dim


@pytest.mark.parametrize("P", [[[1, 1], [0, 1]], [[0, 1], [1, 0]], [[2, 0], [0, 1]]])
def test_inner_automorphisms_give_isomorphic_modules(P):
    f = conj_map(M2, el.array(P))
    v = find_isomorphism(module_from_map(f), module_from_map(identity_map(M2)))
    assert v.verdict == "yes"
    assert el.is_invertible(v.witness)


def test_outer_automorphism_gives_non_isomorphic_module():
    # Z2 is commutative, so the only inner automorphism is the identity
    v = find_isomorphism(module_from_map(sign_map(Z2)), module_from_map(identity_map(Z2)))
    assert v.verdict == "no"
    assert find_isomorphism(module_from_map(swap_map(kk)), regular(kk)).verdict == "no"


def test_tensor_bimodule_routes_agree():
    for _, X, Y in PAIRS[:10]:
        A, _ = tensor_bimodule(X, Y, frobenius=True)
        B, _ = tensor_bimodule(X, Y, frobenius=False)
        assert A.dim == B.dim
        assert not A.violations() and not B.violations()


def test_non_frobenius_middle_uses_cokernel():
    R = regular(T2)
    Y, s = tensor_bimodule(R, R)
    assert Y.dim == 3 == s.dim
    with pytest.raises(NotFrobenius):
        tensor_over(R, R)


def test_mismatched_chain_rejected():
    with pytest.raises(AlgebraMismatch):
        tensor_over(regular(M2), regular(Z2))


def test_corrupted_action_detected():
    R = regular(Z2)
    lam = R.lam.copy()
    lam[1, 0, 0] = el.QQ(1)
    assert Bimodule(Z2, Z2, lam, R.rho).violations()


@given(st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_hom_space_elements_intertwine(cs):
    X = MODS["Z2+Z2"]
    basis = hom_space(X, X)
    F = sum((el.QQ(c) * h for c, h in zip(cs, basis)), el.zeros((X.dim, X.dim)))
    for i in range(2):
        a = Z2.basis(i)
        assert el.equal(np.dot(F, X.left_matrix(a)), np.dot(X.left_matrix(a), F))
        assert el.equal(np.dot(F, X.right_matrix(a)), np.dot(X.right_matrix(a), F))


def test_quotient_without_relations_keeps_field():
    F5 = el.PrimeField(5)
    k = standard_library(F5)["k"]
    split = tensor_quotient([regular(k), regular(k)])
    assert split.dim == 1
    assert el.field_of(split.embed, split.project) == F5
