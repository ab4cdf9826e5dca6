import numpy as np
import pytest

from latticetft import exactlin as el
from latticetft import surface as sf
from latticetft import verify as vf
from latticetft.algebra import NotFrobenius, standard_library
from latticetft.bimodule import regular
from latticetft.library import unit_map
from latticetft.tft import TFT

import oracles


def plain(a, n=1):
    return sf.BoundaryCircle(tuple(sf.Plain(a) for _ in range(n)))


@pytest.mark.parametrize("a", ["k", "M2", "Z2", "kk"])
def test_plain_state_space_is_centre(T, sig, a):
    assert T.state_space(plain(a)).dim == oracles.centre_dim(sig.algebra(a))


def test_wall_pair_state_space_is_centraliser(T, sig):
    # O(u∘u*) for u = M2 as a k-M2 bimodule: centraliser of k in M2
    c = sf.circle_from_word(sig, (("u", 1), ("u", -1)))
    assert T.state_space(c).dim == oracles.centraliser_dim(unit_map(sig.algebra("k"), sig.algebra("M2"))) == 4


@pytest.mark.parametrize("x", ["z2", "ee", "zt", "rk", "sw", "r2"])
def test_single_wall_circle_against_oracle(T, sig, x):
    assert T.state_space(sf.circle_from_word(sig, ((x, 1),))).dim == oracles.cyclic_tensor_dim(sig.wall(x).bimodule)


@pytest.mark.parametrize("a", ["Z2", "M2"])
def test_boundary_maps_and_zeta(T, sig, a):
    lifts = [plain(a, n) for n in (1, 2, 3)]
    for c in lifts:
        bm = T.boundary_maps(c)
        assert el.equal(np.dot(bm.pi, bm.e), el.identity(bm.space.dim))
    for c1 in lifts:
        for c2 in lifts:
            cw = T.evaluate_cw(sf.ring(sig, c1, c2, [(len(c1.slots), len(c2.slots))]))
            assert el.equal(cw, T.zeta(c1, c2))
            for c3 in lifts:
                assert el.equal(np.dot(T.zeta(c2, c3), T.zeta(c1, c2)), T.zeta(c1, c3))


def test_rotation_bordism_is_zeta_and_identity(T, sig):
    c = sf.circle_from_word(sig, (("z2", 1), ("ee", -1)))
    M = sf.rotation(sig, c, 1)
    assert el.equal(T.evaluate_cw(M), T.zeta(c, c.rotated(1)))
    A = T.evaluate(M).matrix
    assert el.equal(A, el.identity(A.shape[0]))


def test_cylinders_are_identities(T, sig):
    checks = vf.cylinders(T, vf.standard_circles(sig))
    assert len(checks) >= 5 and all(c.ok for c in checks)


def test_gluing_is_composition(T, sig):
    checks = vf.gluing(T, vf.standard_glue_pairs(sig))
    assert len(checks) >= 5 and all(c.ok for c in checks)


def test_disjoint_union_is_tensor_product(T, sig):
    B = sf.standard_bordisms(sig)
    M, N = B["annulus[u]"], B["cup_annulus[z2]"]
    lhs = T.evaluate(sf.disjoint_union(M, N)).matrix
    assert el.equal(lhs, el.kron(T.evaluate(M).matrix, T.evaluate(N).matrix))


def test_permuting_outputs_permutes_factors(T, sig):
    B = sf.standard_bordisms(sig)
    M, N = B["annulus[u]"], B["cup_annulus[z2]"]
    U = sf.disjoint_union(M, N)
    A = T.evaluate(U)
    dm, dn = A.target_dims
    swap = el.zeros((dm * dn, dm * dn))
    for i in range(dm):
        for j in range(dn):
            swap[j * dm + i, i * dn + j] = el.QQ(1)
    assert el.equal(T.evaluate(sf.permute_outputs(U, (1, 0))).matrix, np.dot(swap, A.matrix))


@pytest.mark.parametrize("name", ["junction[t3]", "junction[ev]", "junction[cu]"])
def test_junction_start_edge_irrelevant(T, sig, name):
    M = sf.standard_bordisms(sig)[name]
    ref = T.evaluate_cw(M)
    pi = next(i for i, p in enumerate(M.polygons) if p.junction)
    for s in range(1, len(M.polygons[pi].slots)):
        assert el.equal(T.evaluate_cw(sf.rotate_polygon(M, pi, s)), ref)


def test_plain_polygon_start_edge_irrelevant(T, sig):
    M = sf.standard_bordisms(sig)["disc[kk]"]
    ref = T.evaluate_cw(M)
    for s in range(1, len(M.polygons[0].slots)):
        assert el.equal(T.evaluate_cw(sf.rotate_polygon(M, 0, s)), ref)


@pytest.mark.parametrize("a", ["k", "M2", "Z2", "kk"])
def test_plain_torus_is_dim_centre(T, sig, a):
    assert T.evaluate(sf.torus(sig, domain=a)).matrix[0, 0] == sig.algebra(a).centre().dim


@pytest.mark.parametrize("x", ["z2", "ee", "zt", "rk", "sw", "r2"])
def test_cardy(T, x):
    r = T.cardy_check(x)
    assert r.consistent
    assert r.lhs == r.rhs == r.torus_cylinder == r.torus_annulus


def test_defect_operator_of_regular_is_identity(T):
    for a in ("k", "M2", "Z2", "kk"):
        assert vf.defect_unit(T, a).ok


def test_report_shape(T, sig):
    rep = T.evaluate(sf.standard_bordisms(sig)["cylinder[r2]"]).report()
    assert set(rep) == {"source_dims", "target_dims", "matrix", "network_stats"}
    assert set(rep["network_stats"]) == {"tensors", "contractions", "max_intermediate"}


def test_non_frobenius_domain_rejected():
    T2 = standard_library()["T2"]
    sig = sf.DefectSignature({"t": T2}, {"x": sf.WallData("t", "t", regular(T2))})
    with pytest.raises(NotFrobenius):
        TFT(sig).evaluate(sf.plain_disc(sig, "t", 2))


def test_prime_field_cylinder():
    from latticetft.library import standard_signature
    sig = standard_signature(el.PrimeField(5))
    T = TFT(sig)
    for c in vf.standard_circles(sig).values():
        A = T.evaluate(sf.cylinder(sig, c)).matrix
        assert el.equal(A, el.identity(A.shape[0], sig.field))
