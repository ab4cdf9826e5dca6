import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from latticetft import exactlin as el
from latticetft import io
from latticetft.onedim import Circle, Interval, LabelMismatch, OneDimDiagram, OneDimTheory, Wall, evaluate_1d

from conftest import SCENES
import oracles

small = st.integers(-2, 2)


@st.composite
def theories(draw):
    da, db = draw(st.integers(1, 3)), draw(st.integers(1, 3))

    def m(r, c):
        return el.array([[draw(small) for _ in range(c)] for _ in range(r)])

    walls = {"x": Wall("a", "b", m(db, da), m(da, db)), "y": Wall("b", "b", m(db, db), m(db, db)),
             "z": Wall("b", "a", m(da, db), m(db, da))}
    return OneDimTheory({"a": da, "b": db}, walls)


# closed words starting and ending at a
LOOPS = [(("x", 1), ("z", 1)), (("x", 1), ("y", 1), ("x", -1)), (("x", 1), ("y", -1), ("y", 1), ("z", 1)),
         (("z", -1), ("y", 1), ("z", 1))]


@given(theories(), st.sampled_from(LOOPS))
def test_circle_matches_oracle(th, pts):
    _, s = evaluate_1d(th, OneDimDiagram((Circle(pts),)))
    assert Fraction(str(s)) == oracles.circle_trace(th, pts)


@given(theories(), st.sampled_from(LOOPS), st.integers(0, 3))
def test_circle_rotation_invariant(th, pts, k):
    k %= len(pts)
    a = evaluate_1d(th, OneDimDiagram((Circle(pts),)))[1]
    b = evaluate_1d(th, OneDimDiagram((Circle(pts[k:] + pts[:k]),)))[1]
    assert a == b


@given(theories())
def test_multiplicative_over_disjoint_union(th):
    i1 = Interval("a", (("x", 1), ("y", 1)))
    i2 = Interval("b", (("z", 1),))
    c = Circle((("x", 1), ("z", 1)))
    m1, s1 = evaluate_1d(th, OneDimDiagram((i1, c)))
    m2, s2 = evaluate_1d(th, OneDimDiagram((i2,)))
    m, s = evaluate_1d(th, OneDimDiagram((i1, c, i2)))
    assert el.equal(m, el.kron(m1, m2))
    assert s == s1 * s2


@given(theories())
def test_interval_matches_oracle(th):
    pts = (("x", 1), ("y", 1), ("y", -1))
    m, _ = evaluate_1d(th, OneDimDiagram((Interval("a", pts, "b"),)))
    ref = oracles.chain_product(th, "a", pts)
    assert [[Fraction(str(v)) for v in row] for row in m] == ref


def test_empty_diagram_and_bare_circle():
    th = OneDimTheory({"a": 3})
    m, s = evaluate_1d(th, OneDimDiagram())
    assert m.shape == (1, 1) and m[0, 0] == 1 and s == 1
    assert evaluate_1d(th, OneDimDiagram((Circle((), "a"),)))[1] == 3


def test_label_mismatch():
    th = OneDimTheory({"a": 1, "b": 1}, {"x": Wall("a", "b", el.array([[1]]), el.array([[1]]))})
    with pytest.raises(LabelMismatch):
        evaluate_1d(th, OneDimDiagram((Interval("b", (("x", 1),)),)))
    with pytest.raises(LabelMismatch):
        evaluate_1d(th, OneDimDiagram((Circle((("x", 1),)),)))
    with pytest.raises(LabelMismatch):
        OneDimTheory({"a": 1}, {"x": Wall("a", "b", el.array([[1]]), el.array([[1]]))})


def test_scene_loop_value():
    sc = io.load_scene(SCENES / "circle1d.json")
    pts = sc.diagrams["loop"].components[0].points
    assert Fraction(str(evaluate_1d(sc.theory, sc.diagrams["loop"])[1])) == oracles.circle_trace(sc.theory, pts)
    again = io.scene_from_doc(json.loads(sc.dumps()))
    assert again.dumps() == sc.dumps()
