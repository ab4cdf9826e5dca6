"""Verification suites shared by the command line and the acceptance tests.

Every check returns a ``Check`` carrying a pass flag and a JSON-ready payload
describing the instance, so a failure can be reproduced from its report.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from . import centrefun as cf
from . import exactlin as el
from . import surface as sf
from .algebra import AlgebraMap, identity_map
from .bimodule import multi_tensor_idempotent, tensor_bimodule
from .surface import WallData
from .tft import TFT, OneMorphism


@dataclass
class Check:
    suite: str
    name: str
    ok: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"suite": self.suite, "name": self.name, "ok": self.ok, "detail": self.detail}


def _col(v) -> np.ndarray:
    return np.asarray(v, dtype=object).reshape(-1, 1)


def _strings(m):
    return el.to_strings(np.asarray(m, dtype=object))


# ---------------------------------------------------------------- surfaces

def moves(T: TFT, bordisms: dict, limit: int | None = None) -> list[Check]:
    """Every applicable local move leaves the cellwise amplitude unchanged."""
    out = []
    for name, M in bordisms.items():
        ref = T.evaluate_cw(M)
        mvs = sf.applicable_moves(M)
        if limit is not None:
            mvs = mvs[:limit]
        bad = []
        for mv in mvs:
            N = sf.apply_move(M, mv)
            if sf.validate(T.sig, N) or not el.equal(T.evaluate_cw(N), ref):
                bad.append(str(mv))
        out.append(Check("moves", name, not bad, {"moves": len(mvs), "failing": bad}))
    return out


def random_decomposition(M, rng: random.Random, steps: int):
    for _ in range(steps):
        mvs = sf.applicable_moves(M)
        if not mvs:
            break
        M = sf.apply_move(M, rng.choice(mvs))
    return M


def decomposition_independence(T: TFT, bordisms: dict, seed: int = 0, walks: int = 2,
                               steps: int = 6) -> list[Check]:
    rng = random.Random(seed)
    out = []
    for name, M in bordisms.items():
        ref = T.evaluate(M).matrix
        ok = True
        for _ in range(walks):
            N = random_decomposition(M, rng, steps)
            ok &= not sf.validate(T.sig, N) and el.equal(T.evaluate(N).matrix, ref)
        out.append(Check("functoriality", f"decompositions[{name}]", bool(ok),
                         {"walks": walks, "steps": steps, "seed": seed}))
    return out


def cylinders(T: TFT, circles: dict) -> list[Check]:
    out = []
    for name, c in circles.items():
        A = T.evaluate(sf.cylinder(T.sig, c))
        n = A.matrix.shape[0]
        out.append(Check("functoriality", f"cylinder[{name}]",
                         A.matrix.shape == (n, n) and el.equal(A.matrix, el.identity(n, T.sig.field)),
                         {"dim": n}))
    return out


def gluing(T: TFT, pairs: list) -> list[Check]:
    """T(glue(M, N)) = T(N)·T(M)."""
    out = []
    for name, M, N in pairs:
        G = sf.glue(M, N)
        lhs = T.evaluate(G).matrix
        rhs = np.dot(T.evaluate(N).matrix, T.evaluate(M).matrix)
        out.append(Check("functoriality", f"glue[{name}]", el.equal(lhs, rhs), {"shape": list(lhs.shape)}))
    return out


# ---------------------------------------------------------------- worked amplitudes

def pair_projector(T: TFT, x: str, y: str) -> Check:
    """Cellwise cylinder over O(y∘x*) equals the cyclic idempotent of Y ⊗ X*."""
    c = sf.circle_from_word(T.sig, ((y, 1), (x, -1)))
    lhs = T.evaluate_cw(sf.cylinder(T.sig, c))
    rhs = multi_tensor_idempotent(T.sig.chain(c.word()), cyclic=True)
    return Check("amplitudes", f"pair_projector[{y},{x}*]", el.equal(lhs, rhs), {"dim": rhs.shape[0]})


def cup_annulus(T: TFT, x: str) -> Check:
    """O(b) -> O(x∘x*) sends z to q ↦ z.q under the Hom identification."""
    w = T.sig.wall(x)
    X = w.bimodule
    c = sf.circle_from_word(T.sig, ((x, 1), (x, -1)))
    M = sf.ring(T.sig, sf.BoundaryCircle((sf.Plain(w.target),)), c, [(1, 2)])
    A = T.evaluate(M).matrix
    Zb = T.state_space(sf.circle_from_word(T.sig, (), w.target)).splitting
    S = T.state_space(c).splitting
    ok = True
    for j in range(Zb.dim):
        F = np.dot(S.embed, A[:, j]).reshape(X.dim, X.dim)
        ok &= el.equal(F, X.left_matrix(Zb.embed[:, j]))
    return Check("amplitudes", f"cup_annulus[{x}]", bool(ok), {"dim_centre": Zb.dim})


def defect_unit(T: TFT, a: str) -> Check:
    """D(A) = id on Z(A) for the regular bimodule."""
    sig = _extended(T.sig, {"_reg": WallData(a, a, T.regular(a))})
    D = TFT(sig).defect_operator("_reg")
    return Check("amplitudes", f"D(regular {a})", el.equal(D, el.identity(D.shape[0], sig.field)),
                 {"dim": D.shape[0]})


def defect_composition(T: TFT, x: str, y: str) -> Check:
    """D(Y)D(X) = D(Y ⊗_B X) for X: a -> b and Y: b -> c."""
    wx, wy = T.sig.wall(x), T.sig.wall(y)
    YX, _ = tensor_bimodule(wy.bimodule, wx.bimodule)
    sig = _extended(T.sig, {"_yx": WallData(wx.source, wy.target, YX)})
    lhs = np.dot(T.defect_operator(y), T.defect_operator(x))
    rhs = TFT(sig).defect_operator("_yx")
    return Check("amplitudes", f"D({y})D({x})", el.equal(lhs, rhs), {"dim_YX": YX.dim})


def _extended(sig, walls: dict):
    new = sf.DefectSignature(dict(sig.domains), {**sig.walls, **walls}, dict(sig.junctions))
    return new


# ---------------------------------------------------------------- cardy

def cardy(T: TFT, walls) -> list[Check]:
    out = []
    for x in walls:
        r = T.cardy_check(x)
        out.append(Check("cardy", x, r.consistent,
                         {"dim_invariants": r.lhs, "trace_D": str(r.rhs),
                          "torus_cylinder": str(r.torus_cylinder), "torus_annulus": str(r.torus_annulus)}))
    return out


# ---------------------------------------------------------------- defect 2-category

@dataclass(frozen=True)
class Cell:
    """A 2-morphism m => n given as a vector in D2(m, n)."""

    m: OneMorphism
    n: OneMorphism
    vec: np.ndarray


def hcomp(T: TFT, p: Cell, q: Cell) -> Cell:
    """p ∘ q horizontally (q first)."""
    A = T.horizontal_compose(q.m, q.n, p.m, p.n).matrix
    return Cell(q.m.then(p.m), q.n.then(p.n), np.dot(A, el.kron(_col(p.vec), _col(q.vec)))[:, 0])


def vcomp(T: TFT, second: Cell, first: Cell) -> Cell:
    if first.n.word != second.m.word:
        raise ValueError("2-morphisms are not composable")
    A = T.vertical_compose(first.m, first.n, second.n).matrix
    return Cell(first.m, second.n, np.dot(A, el.kron(_col(second.vec), _col(first.vec)))[:, 0])


def identity_cell(T: TFT, x: OneMorphism) -> Cell:
    return Cell(x, x, T.identity_2morphism(x))


def zigzags(T: TFT, label: str) -> Check:
    """The four snake identities for the adjunction 2-morphisms of a single wall."""
    x = OneMorphism.of(T.sig, ((label, 1),))
    xs = x.dual()
    adj = {k: Cell(*v) for k, v in T.adjunction(x).items()}
    ix, ixs = identity_cell(T, x), identity_cell(T, xs)
    res = {
        "x: (id∘d)(b∘id)": vcomp(T, hcomp(T, ix, adj["d"]), hcomp(T, adj["b"], ix)),
        "x*: (d∘id)(id∘b)": vcomp(T, hcomp(T, adj["d"], ixs), hcomp(T, ixs, adj["b"])),
        "x*: (id∘d~)(b~∘id)": vcomp(T, hcomp(T, ixs, adj["d~"]), hcomp(T, adj["b~"], ixs)),
        "x: (d~∘id)(id∘b~)": vcomp(T, hcomp(T, adj["d~"], ix), hcomp(T, ix, adj["b~"])),
    }
    want = {"x": ix.vec, "x*": ixs.vec}
    detail = {k: el.equal(v.vec, want[k.split(":")[0]]) for k, v in res.items()}
    return Check("adjunction", f"zigzag[{label}]", all(detail.values()), detail)


def _random_vec(rng, n, f):
    return el.array([rng.randint(-3, 3) for _ in range(n)], f)


def interchange(T: TFT, labels, seed: int = 0) -> Check:
    """(v1 ⊙ v) ∘ (u1 ⊙ u) = (v1 ∘ u1) ⊙ (v ∘ u) on random 2-morphisms between single letters."""
    rng = random.Random(seed)
    f = T.sig.field
    x, x1, x2 = [OneMorphism.of(T.sig, ((l, 1),)) for l in labels]
    y, y1, y2 = [OneMorphism.of(T.sig, ((l, 1),)) for l in reversed(labels)]
    u = Cell(x, x1, _random_vec(rng, T.space2(x, x1).dim, f))
    u1 = Cell(x1, x2, _random_vec(rng, T.space2(x1, x2).dim, f))
    v = Cell(y, y1, _random_vec(rng, T.space2(y, y1).dim, f))
    v1 = Cell(y1, y2, _random_vec(rng, T.space2(y1, y2).dim, f))
    lhs = hcomp(T, vcomp(T, v1, v), vcomp(T, u1, u))
    rhs = vcomp(T, hcomp(T, v1, u1), hcomp(T, v, u))
    return Check("adjunction", f"interchange[{','.join(labels)}]", el.equal(lhs.vec, rhs.vec),
                 {"seed": seed})


def delta_compatibility(T: TFT, labels, seed: int = 0) -> Check:
    """Vertical composition read through the Hom identification is composition of intertwiners."""
    rng = random.Random(seed)
    f = T.sig.field
    x, x1, x2 = [OneMorphism.of(T.sig, ((l, 1),)) for l in labels]
    S01, S12, S02 = T.space2(x, x1), T.space2(x1, x2), T.space2(x, x2)
    u = Cell(x, x1, _random_vec(rng, S01.dim, f))
    u1 = Cell(x1, x2, _random_vec(rng, S12.dim, f))
    w = vcomp(T, u1, u)

    def hom(S, c):
        return np.dot(S.splitting.embed, c).reshape(S.chain[0].dim, -1)

    ok = el.equal(hom(S02, w.vec), np.dot(hom(S12, u1.vec), hom(S01, u.vec)))
    return Check("adjunction", f"delta[{','.join(labels)}]", ok, {"seed": seed})


# ---------------------------------------------------------------- centre functor

def lax_chain(f: AlgebraMap, g: AlgebraMap, name: str = "") -> list[Check]:
    r = cf.lax_report(f, g)
    return [Check("lax", name or "m", r.valid and r.triangles, r.as_dict())]


def coherence(triples: list, cospans: list) -> list[Check]:
    """Lax-functor coherence for Z and I on map triples, pentagon/triangle on cospan chains."""
    out = []
    for name, (f, g, h) in triples:
        for F in (cf.CENTRE,) + ((cf.INCLUSION,) if _all_commutative(f, g, h) else ()):
            d = cf.lax_coherence(f, g, h, F)
            out.append(Check("coherence", f"{F.name}[{name}]", all(d.values()), d))
    for name, chain in cospans:
        if len(chain) == 4:
            out.append(Check("coherence", f"pentagon[{name}]", cf.pentagon_check(*chain)))
        elif len(chain) == 2:
            out.append(Check("coherence", f"triangle[{name}]", cf.triangle_check(*chain)))
    return out


def _all_commutative(*maps) -> bool:
    return all(m.source.is_commutative() and m.target.is_commutative() for m in maps)


def cospan_witnesses(cospans: list) -> list[Check]:
    """Legs invertible iff the constructed inverse passes; non-invertible cases report leg ranks."""
    out = []
    for name, C in cospans:
        v = cf.cospan_invertibility(C)
        legs = el.is_invertible(C.alpha.matrix) and el.is_invertible(C.beta.matrix)
        out.append(Check("invertibility", f"cospan[{name}]", v.invertible == legs, v.as_dict()))
    return out


def diagram_witnesses(diagrams: list) -> list[Check]:
    out = []
    for name, D in diagrams:
        v = cf.diagram_invertibility(D)
        legs = el.is_invertible(D.f) and el.is_invertible(D.g)
        out.append(Check("invertibility", f"2-diagram[{name}]", v.invertible == legs, v.as_dict()))
    return out


# ---------------------------------------------------------------- standard instance sets

def standard_corpus(sig) -> dict:
    """Surfaces used by the move and decomposition suites on the standard signature."""
    B = sf.standard_bordisms(sig)
    keep = ["cylinder[M2]", "cylinder[Z2]", "disc[kk]", "annulus[u]", "annulus[z2]", "annulus[g]",
            "cylinder[r2]", "cylinder[sw]", "cup_annulus[u]", "cup_annulus[z2]", "identity[u]",
            "junction[t3]", "junction[ev]", "torus[Z2]", "torus[sw]"]
    out = {k: B[k] for k in keep if k in B}
    out["pair_cylinder[z2,ee]"] = sf.cylinder(sig, sf.circle_from_word(sig, (("ee", 1), ("z2", -1))))
    return out


def standard_glue_pairs(sig) -> list:
    B = sf.standard_bordisms(sig)
    names = [("annulus[u]", "annulus[v]"), ("annulus[z2]", "annulus[ee]"),
             ("cup_annulus[r2]", "cylinder[r2]"), ("annulus[d]", "annulus[sw]"),
             ("identity[u]", "cylinder[u]")]
    pairs = [(f"{a}|{b}", B[a], B[b]) for a, b in names]
    pairs.append(("disc[Z2]|annulus2[g]", B["disc[Z2]"], sf.defect_annulus(sig, "g", 2)))
    return pairs


def standard_circles(sig) -> dict:
    return {
        "M2": sf.BoundaryCircle((sf.Plain("M2"), sf.Plain("M2"))),
        "Z2": sf.BoundaryCircle((sf.Plain("Z2"),)),
        "kk": sf.BoundaryCircle((sf.Plain("kk"),) * 3),
        "r2 r2*": sf.circle_from_word(sig, (("r2", 1), ("r2", -1))),
        "u v": sf.circle_from_word(sig, (("u", 1), ("v", 1))),
        "ee": sf.circle_from_word(sig, (("ee", 1),)),
        "sw sw": sf.circle_from_word(sig, (("sw", 1), ("sw", 1))),
    }


def lax_maps(field=el.QQ) -> dict:
    """Algebra maps among k, k⊕k, T2, M2 used by the centre functor suites."""
    from .algebra import standard_library
    from .library import swap_map, unit_map
    lib = standard_library(field)
    k, kk, T2, M2 = lib["k"], lib["kk"], lib["T2"], lib["M2"]
    maps = {
        "diag": AlgebraMap(kk, T2, el.array([[1, 0], [0, 0], [0, 1]], field)),
        "proj": AlgebraMap(T2, kk, el.array([[1, 0, 0], [0, 0, 1]], field)),
        "swap": swap_map(kk),
        "unit_kk": unit_map(k, kk),
        "unit_T2": unit_map(k, T2),
        "unit_M2": unit_map(k, M2),
        "T2_M2": AlgebraMap(T2, M2, el.array([[1, 0, 0], [0, 1, 0], [0, 0, 0], [0, 0, 1]], field)),
        "kk_M2": AlgebraMap(kk, M2, el.array([[1, 0], [0, 0], [0, 0], [0, 1]], field)),
    }
    for m in maps.values():
        m.check()
    maps.update({f"id_{n}": identity_map(A) for n, A in (("k", k), ("kk", kk), ("T2", T2), ("M2", M2))})
    return maps


def standard_triples(maps: dict) -> list:
    names = [("unit_kk", "diag", "proj"), ("diag", "proj", "swap"), ("swap", "diag", "T2_M2"),
             ("unit_kk", "swap", "kk_M2"), ("unit_T2", "T2_M2", "id_M2"), ("swap", "swap", "swap"),
             ("unit_kk", "diag", "T2_M2")]
    return [("·".join(t), tuple(maps[n] for n in t)) for t in names]


def standard_cospan_chains(maps: dict) -> list:
    C = cf.centre_cospan
    I = cf.cospan_I
    sw, diag, proj = maps["swap"], maps["diag"], maps["proj"]
    ukk = maps["unit_kk"]
    return [
        ("I(sw)^4", [I(sw), I(sw), I(sw), I(sw)]),
        ("Z(proj) Z(diag) I(sw) I(unit)", [C(proj), C(diag), I(sw), I(ukk)]),
        ("Z(diag) I(sw) I(sw) I(unit)", [C(diag), I(sw), I(sw), I(ukk)]),
        ("Z(proj) Z(diag)", [C(proj), C(diag)]),
        ("I(sw) I(unit)", [I(sw), I(ukk)]),
        ("Z(diag) I(sw)", [C(diag), I(sw)]),
    ]
