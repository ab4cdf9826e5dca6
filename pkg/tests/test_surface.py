import random

import pytest
from dataclasses import replace
from hypothesis import given, strategies as st

from latticetft import surface as sf
from latticetft import verify as vf

DELTAS = {"bigon": (1, 2, 1), "unbigon": (-1, -2, -1), "add_edge": (0, 1, 1), "remove_edge": (0, -1, -1),
          "split_edge": (1, 1, 0), "join_edges": (-1, -1, 0)}


@pytest.fixture(scope="module")
def corpus(sig):
    return vf.standard_corpus(sig)


def test_corpus_is_valid(sig, corpus):
    assert len(corpus) >= 10
    for name, M in corpus.items():
        assert not sf.validate(sig, M), name


def _check_move(sig, M, mv):
    N = sf.apply_move(M, mv)
    assert not sf.validate(sig, N), str(mv)
    delta = (N.vertices - M.vertices, len(N.edges) - len(M.edges), len(N.polygons) - len(M.polygons))
    assert delta == DELTAS[mv.kind], str(mv)
    assert N.euler_characteristic() == M.euler_characteristic()
    assert N.genus() == M.genus()
    return N


def test_every_move_keeps_validity_and_cell_counts(sig, corpus):
    for M in corpus.values():
        for mv in sf.applicable_moves(M):
            _check_move(sig, M, mv)


@given(st.integers(0, 10_000))
def test_random_walks_of_moves(seed):
    from latticetft.library import standard_signature
    sig = standard_signature()
    rng = random.Random(seed)
    corpus = vf.standard_corpus(sig)
    M = corpus[rng.choice(sorted(corpus))]
    seen = set()
    for _ in range(6):
        mvs = sf.applicable_moves(M)
        if not mvs:
            break
        mv = rng.choice(mvs)
        seen.add(mv.kind)
        M = _check_move(sig, M, mv)


def test_inverse_moves_occur(sig, corpus):
    kinds = set()
    for M in list(corpus.values())[:6]:
        for mv in sf.applicable_moves(M):
            N = sf.apply_move(M, mv)
            kinds |= {m.kind for m in sf.applicable_moves(N)}
    assert {"bigon", "unbigon", "add_edge", "remove_edge", "split_edge", "join_edges"} <= kinds


def test_glue_associative_up_to_isomorphism(sig):
    B = sf.standard_bordisms(sig)
    chains = [("annulus[u]", "annulus[r2]", "annulus[v]"), ("annulus[z2]", "annulus[ee]", "annulus[zt]"),
              ("annulus[d]", "annulus[sw]", "cup_annulus[rk]"), ("annulus[g]", "cup_annulus[v]", "cylinder[v]")]
    for a, b, c in chains:
        X, Y, Z = B[a], B[b], B[c]
        left = sf.glue(sf.glue(X, Y), Z)
        right = sf.glue(X, sf.glue(Y, Z))
        assert sf.isomorphic(left, right)
        assert not sf.validate(sig, left)


def test_isomorphism_detects_difference(sig):
    B = sf.standard_bordisms(sig)
    assert not sf.isomorphic(B["annulus[z2]"], B["annulus[ee]"])
    assert sf.isomorphic(B["annulus[z2]"], sf.rotate_polygon(B["annulus[z2]"], 0, 1))


def test_glue_mismatch(sig):
    B = sf.standard_bordisms(sig)
    with pytest.raises(sf.BoundaryMismatch):
        sf.glue(B["disc[k]"], B["disc[k]"])


def test_validation_catches_bad_decoration(sig):
    M = sf.standard_bordisms(sig)["annulus[u]"]
    e = next(i for i, E in enumerate(M.edges) if E.wall)
    E = M.edges[e]
    broken = replace(M, edges=M.edges[:e] + (sf.Edge(E.tail, E.head, ("z2", E.wall[1])),) + M.edges[e + 1:])
    assert sf.validate(sig, broken)
    with pytest.raises(sf.ValidationFailed):
        sf.check(sig, broken)


def test_circle_words(sig):
    c = sf.circle_from_word(sig, (("u", 1), ("v", 1)))
    assert c.word() == (("u", 1), ("v", 1))
    assert not sf.circle_violations(sig, c)
    bad = sf.BoundaryCircle((sf.Marked("u", 1),))
    assert sf.circle_violations(sig, bad)
    assert sf.dual_word((("u", 1), ("v", 1))) == (("v", -1), ("u", -1))


def test_topology_of_standard_surfaces(sig):
    B = sf.standard_bordisms(sig)
    assert B["torus[sw]"].genus() == 1 and not B["torus[sw]"].inputs
    assert B["cylinder[r2]"].genus() == 0
    assert B["disc[kk]"].euler_characteristic() == 1
