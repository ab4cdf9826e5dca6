import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from latticetft import centrefun as cf
from latticetft import exactlin as el
from latticetft import verify as vf
from latticetft.algebra import AlgebraMap, identity_map, standard_library
from latticetft.bimodule import BimoduleMap, direct_sum, hom_space, regular
from latticetft.library import swap_map, unit_map

import oracles

LIB = standard_library()
k, kk, T2, M2, Z2 = (LIB[n] for n in ("k", "kk", "T2", "M2", "Z2"))
MAPS = vf.lax_maps()
TRIPLES = vf.standard_triples(MAPS)
CHAINS = vf.standard_cospan_chains(MAPS)


def composable_triples():
    names = sorted(MAPS)
    out = []
    for a, b, c in itertools.product(names, repeat=3):
        f, g, h = MAPS[a], MAPS[b], MAPS[c]
        if f.target.same_as(g.source) and g.target.same_as(h.source):
            out.append((a, b, c))
    return out


ALL_TRIPLES = composable_triples()


@pytest.mark.parametrize("name", sorted(MAPS))
def test_centraliser_against_oracle(name):
    f = MAPS[name]
    Z, incl = cf.centraliser(f)
    assert Z.dim == oracles.centraliser_dim(f)
    assert not incl.violations()
    assert cf.centre_containments(f)


def test_counterexample_chain():
    r = cf.lax_report(MAPS["diag"], MAPS["proj"])
    assert (r.source_dim, r.target_dim, r.rank) == (4, 2, 2)
    assert r.surjective and not r.injective
    assert r.valid and r.triangles


@given(st.sampled_from(ALL_TRIPLES))
def test_lax_coherence_random_triples(names):
    f, g, h = (MAPS[n] for n in names)
    assert all(cf.lax_coherence(f, g, h, cf.CENTRE).values())
    if all(m.source.is_commutative() and m.target.is_commutative() for m in (f, g, h)):
        assert all(cf.lax_coherence(f, g, h, cf.INCLUSION).values())


def test_inclusion_functor_is_strict():
    # for I, the comparison map is invertible
    for a, b in [("unit_kk", "swap"), ("swap", "swap"), ("unit_kk", "diag")]:
        r = cf.lax_report(MAPS[a], MAPS[b], cf.INCLUSION)
        assert r.injective and r.surjective


@pytest.mark.parametrize("name,chain", CHAINS, ids=[c[0] for c in CHAINS])
def test_pentagon_and_triangle(name, chain):
    if len(chain) == 4:
        assert cf.pentagon_check(*chain)
    else:
        assert cf.triangle_check(*chain)


def test_unitors_are_isomorphisms():
    for C in (cf.cospan_I(MAPS["swap"]), cf.centre_cospan(MAPS["diag"])):
        for u in (cf.left_unitor(C), cf.right_unitor(C)):
            assert u.is_valid()
            assert el.is_invertible(u.matrix)


def test_composition_dimension_oracle():
    S, T = cf.centre_cospan(MAPS["proj"]), cf.centre_cospan(MAPS["diag"])
    C = cf.compose_cospans(S, T)
    Sb = cf._balanced_factors(S, T)
    assert C.T.dim == oracles.tensor_over_dim(*Sb)
    assert not C.violations()


def test_cospan_mismatch():
    with pytest.raises(cf.AlgebraMismatch):
        cf.compose_cospans(cf.centre_cospan(MAPS["diag"]), cf.centre_cospan(MAPS["diag"]))


def test_invertibility_of_cospans():
    cases = {
        "1_k": cf.identity_cospan(k), "1_kk": cf.identity_cospan(kk), "1_Z2": cf.identity_cospan(Z2),
        "I(swap)": cf.cospan_I(MAPS["swap"]), "Z(id_M2)": cf.centre_cospan(MAPS["id_M2"]),
        "Z(diag)": cf.centre_cospan(MAPS["diag"]), "I(unit)": cf.cospan_I(MAPS["unit_kk"]),
    }
    expect = {"Z(diag)": False, "I(unit)": False}
    for name, C in cases.items():
        assert not C.violations(), name
        v = cf.cospan_invertibility(C)
        assert v.invertible == expect.get(name, True), name
        if v.invertible:
            assert len(v.witnesses) == 2
            assert all(w.is_valid() and el.is_invertible(w.matrix) for w in v.witnesses)


def test_inverse_of_automorphism_cospan():
    v = cf.cospan_invertibility(cf.cospan_I(MAPS["swap"]))
    # the inverse of I(f) is I(f⁻¹); for the swap that is I(swap) again
    assert v.inverse.same_as(cf.cospan_I(MAPS["swap"]))


def _kk_cospan():
    u = unit_map(k, kk)
    return cf.Cospan(k, k, kk, u, u)


def test_inclusion_locally_faithful():
    C = _kk_cospan()
    ident = cf.CospanMorphism(C, C, el.identity(2))
    swap = cf.CospanMorphism(C, C, swap_map(kk).matrix)
    assert ident.is_valid() and swap.is_valid()
    Di, Ds = cf.diagram_I(ident), cf.diagram_I(swap)
    assert cf.find_3iso(Di, Di) is not None
    assert cf.three_cell_space(Di, Ds) is None or cf.find_3iso(Di, Ds) is None
    assert cf.find_3iso(Di, Ds) is None


def test_unit_laws_for_2diagrams():
    C = cf.cospan_I(MAPS["swap"])
    U = cf.unit_2diagram(C)
    assert U.is_valid()
    assert cf.find_3iso(cf.compose_2diagrams_vertical(U, U), U) is not None


def test_interchange_cell():
    C = _kk_cospan()
    phi = cf.CospanMorphism(C, C, swap_map(kk).matrix)
    D = cf.diagram_I(phi)
    U = cf.unit_2diagram(C)
    there, back = cf.interchange_cell(D, U, U, D)
    assert there.is_valid() and back.is_valid()


def _endo_maps(X, seeds):
    H = hom_space(X, X)
    out = []
    for cs in seeds:
        F = sum((el.QQ(c) * h for c, h in zip(cs, H)), el.zeros((X.dim, X.dim)))
        out.append(BimoduleMap(X, X, F))
    return out


@pytest.mark.parametrize("X", [direct_sum(regular(M2), regular(M2)), direct_sum(regular(Z2), regular(Z2))],
                         ids=["M2+M2", "Z2+Z2"])
def test_centre_2diagrams_compose(X):
    h1, h2 = _endo_maps(X, [(1, 1, 2, 1), (1, 3, -1, 0)])
    V = cf.compose_2diagrams_vertical(cf.centre_2diagram(h2), cf.centre_2diagram(h1))
    W = cf.centre_2diagram(BimoduleMap(X, X, np.dot(h2.matrix, h1.matrix)))
    assert V.is_valid() and W.is_valid()
    assert cf.find_3iso(V, W) is not None
    if el.is_invertible(h1.matrix):
        assert cf.commuting_square(h1) is not None


def test_diagram_invertibility():
    C = cf.cospan_I(MAPS["swap"])
    assert cf.diagram_invertibility(cf.unit_2diagram(C)).invertible
    X = direct_sum(regular(Z2), regular(Z2))
    zero = BimoduleMap(X, X, el.zeros((4, 4)))
    assert not cf.diagram_invertibility(cf.centre_2diagram(zero)).invertible


def test_corrupted_cospan_rejected():
    bad = AlgebraMap(kk, T2, el.array([[1, 0], [1, 0], [0, 1]]))
    C = cf.Cospan(kk, kk, T2, bad, MAPS["diag"])
    assert C.violations()
    with pytest.raises(cf.InvalidCospan):
        C.check()
