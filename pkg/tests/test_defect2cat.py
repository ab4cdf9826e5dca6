import pytest

from latticetft import exactlin as el
from latticetft import verify as vf
from latticetft.tft import OneMorphism

CHEAP = ["z2", "sw", "u", "g", "rk", "zt", "d", "v"]


@pytest.mark.parametrize("x", CHEAP)
def test_zigzags(T, x):
    c = vf.zigzags(T, x)
    assert c.ok, c.detail


@pytest.mark.parametrize("labels", [("z2", "ee", "zt"), ("sw", "rk", "sw"), ("zt", "z2", "z2")])
def test_interchange(T, labels):
    for seed in (0, 1):
        assert vf.interchange(T, labels, seed).ok


@pytest.mark.parametrize("labels", [("z2", "ee", "zt"), ("rk", "sw", "rk"), ("g", "g", "g")])
def test_delta_compatibility(T, labels):
    for seed in (0, 3):
        assert vf.delta_compatibility(T, labels, seed).ok


@pytest.mark.parametrize("x,y", [("z2", "ee"), ("u", "u"), ("sw", "rk"), ("zt", "z2"), ("d", "d")])
def test_pair_projector(T, x, y):
    assert vf.pair_projector(T, x, y).ok


@pytest.mark.parametrize("x", ["u", "v", "z2", "sw", "g", "ee", "d"])
def test_cup_annulus(T, x):
    assert vf.cup_annulus(T, x).ok


@pytest.mark.parametrize("x,y", [("u", "v"), ("v", "u"), ("z2", "zt"), ("z2", "g"), ("d", "sw"), ("ee", "ee")])
def test_defect_composition(T, x, y):
    assert vf.defect_composition(T, x, y).ok


def test_identity_2morphism_is_vertical_unit(T, sig):
    x = OneMorphism.of(sig, (("z2", 1),))
    y = OneMorphism.of(sig, (("ee", 1),))
    rng_vec = el.array(list(range(1, T.space2(x, y).dim + 1)))
    idx = T.identity_2morphism(x)
    out = T.vertical_compose(x, x, y).matrix
    # (u ∘ 1_x): input is kron(u, 1_x)
    res = out @ el.kron(rng_vec, idx).reshape(-1, 1)
    assert el.equal(res.reshape(-1), rng_vec)


def test_one_morphism_composition(sig):
    x = OneMorphism.of(sig, (("u", 1),))
    y = OneMorphism.of(sig, (("v", 1),))
    yx = x.then(y)
    assert (yx.source, yx.target) == ("k", "k")
    assert yx.word == (("v", 1), ("u", 1))
    assert x.dual().dual() == x
