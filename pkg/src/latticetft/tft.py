"""Lattice evaluation of decorated surfaces.

``evaluate_cw`` contracts the cell-wise network: a copairing or a
dual-basis pairing per interior edge and one tensor per polygon. ``evaluate``
conjugates it by the boundary splittings, which makes the result independent
of the cell decomposition.

Each boundary circle contributes its slots clockwise from the basepoint.
Several circles combine by Kronecker product in attachment order, and all
out-circles come before all in-circles in the raw network legs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import exactlin as el
from . import surface as sf
from .bimodule import Bimodule, apply_idempotent, multi_tensor, phi_iso, regular, tensor_bimodule
from .surface import (BoundaryCircle, DecoratedSurface, DefectSignature, Marked, Plain,
                      circle_from_word, dual_word)


class SourceTargetMismatch(ValueError):
    pass


@dataclass(frozen=True)
class StateSpace:
    circle: BoundaryCircle
    chain: tuple                    # bimodule factors clockwise from the basepoint
    splitting: el.SubspaceSplitting

    @property
    def dim(self) -> int:
        return self.splitting.dim

    @property
    def ambient_dims(self) -> tuple:
        return tuple(X.dim for X in self.chain)


@dataclass(frozen=True)
class BoundaryMaps:
    space: StateSpace
    slot_dims: tuple        # dims of the cell-wise factors, clockwise from the basepoint
    e: np.ndarray           # T(O) -> ambient of the lift
    pi: np.ndarray          # ambient of the lift -> T(O)


@dataclass
class Amplitude:
    source: list
    target: list
    matrix: np.ndarray
    stats: el.ContractionStats = field(default_factory=el.ContractionStats)

    @property
    def source_dims(self) -> list[int]:
        return [S.dim for S in self.source]

    @property
    def target_dims(self) -> list[int]:
        return [S.dim for S in self.target]

    def report(self, fmt=str) -> dict:
        return {"source_dims": self.source_dims, "target_dims": self.target_dims,
                "matrix": [[fmt(x) for x in row] for row in self.matrix],
                "network_stats": self.stats.as_dict()}


class TFT:
    """The lattice TFT of a defect signature, with cached state spaces."""

    def __init__(self, sig: DefectSignature):
        self.sig = sig
        self._spaces: dict = {}
        self._maps: dict = {}
        self._regular: dict = {}

    # ------------------------------------------------------------ state spaces

    def regular(self, a: str) -> Bimodule:
        if a not in self._regular:
            self._regular[a] = regular(self.sig.algebra(a))
        return self._regular[a]

    def _slot_factor(self, s) -> Bimodule:
        return self.regular(s.domain) if isinstance(s, Plain) else self.sig.factor(s.wall, s.eps)

    def state_space(self, c: BoundaryCircle) -> StateSpace:
        key = (c.word(), c.ordered()[0].domain if c.is_plain() else None)
        if key not in self._spaces:
            bad = sf.circle_violations(self.sig, c)
            if bad:
                raise sf.ValidationFailed(bad)
            if c.is_plain():
                chain = (self.regular(c.slots[0].domain),)
            else:
                chain = tuple(self.sig.chain(c.word()))
            self._spaces[key] = StateSpace(c, chain, multi_tensor(list(chain), cyclic=True))
        S = self._spaces[key]
        return S if S.circle == c else StateSpace(c, S.chain, S.splitting)

    def boundary_maps(self, c: BoundaryCircle) -> BoundaryMaps:
        """e and π for the lift ``c`` of its circle: π∘e = id, e∘π = cyclic idempotent."""
        if c in self._maps:
            return self._maps[c]
        S = self.state_space(c)
        f = self.sig.field
        slots = c.ordered()
        chain = [self._slot_factor(s) for s in slots]
        dims = tuple(X.dim for X in chain)
        if S.dim == 0:
            N = int(np.prod(dims, dtype=object))
            bm = BoundaryMaps(S, dims, el.zeros((N, 0), f), el.zeros((0, N), f))
            self._maps[c] = bm
            return bm
        if c.is_plain():
            carried = [0]
        else:
            carried = [k for k, s in enumerate(slots) if isinstance(s, Marked)]
        cur = S.splitting.embed.reshape(tuple(chain[k].dim for k in carried) + (S.dim,))
        for k, s in enumerate(slots):
            if k in carried:
                continue
            one = self.sig.algebra(s.domain).one()
            cur = np.moveaxis(np.multiply.outer(one, cur), 0, k)
        JE = cur.reshape(-1, S.dim)
        e = apply_idempotent(chain, True, JE)
        _, rows = el.rref(e.T)
        if len(rows) != S.dim:
            raise el.Singular("boundary embedding is not injective")
        sel = el.zeros((len(rows), e.shape[0]), f)
        for i, q in enumerate(rows):
            sel[i, q] = f(1)
        # π = (rows of e)^-1 · (rows of p), so π∘e = id and e∘π = p
        pi = np.dot(el.inverse(e[rows, :]), apply_idempotent(chain, True, sel, rows=True))
        bm = BoundaryMaps(S, dims, e, pi)
        self._maps[c] = bm
        return bm

    # ------------------------------------------------------------ cell-wise evaluation

    def _network(self, M: DecoratedSurface):
        """Network whose open legs are the cell-wise boundary factors.

        Returns (network, out_legs, in_legs), legs grouped per circle in
        clockwise order from the basepoint.
        """
        sig = self.sig
        net = el.Network()
        occ = M.occurrences()
        bnd = M.boundary_edges()
        alias = {}
        for e, E in enumerate(M.edges):
            if e in bnd:
                continue
            (p1, k1), (p2, k2) = occ[e]
            if E.wall is not None:
                alias[(p1, k1)] = alias[(p2, k2)] = ("w", e)
            else:
                A = sig.algebra(M.polygons[p1].corners[k1])
                net.add(A.frobenius().copairing, (("q", p1, k1), ("q", p2, k2)))

        def bond(pi, k):
            return alias.get((pi, k), ("q", pi, k))

        slot_pos = {e: occ[e][0] for e in bnd}
        legs = {"in": [], "out": []}
        for side, atts in (("in", M.inputs), ("out", M.outputs)):
            for ci, a in enumerate(atts):
                circle_legs = []
                for k in a.circle.order():
                    e = a.edges[k]
                    b = bond(*slot_pos[e])
                    if side == "out" and M.edges[e].wall is None:
                        pi, kk = slot_pos[e]
                        A = sig.algebra(M.polygons[pi].corners[kk])
                        r = ("R", ci, k)
                        net.add(A.frobenius().copairing, (b, r))
                        b = r
                    circle_legs.append(b)
                legs[side].append(circle_legs)

        for pi, p in enumerate(M.polygons):
            bonds = [bond(pi, k) for k in range(len(p.slots))]
            if p.junction is not None:
                self._junction_tensor(net, M, p, bonds)
            elif not sf.polygon_crossings(M, p):
                self._plain_tensor(net, p, bonds, pi)
            else:
                self._wall_tensor(net, M, p, bonds, pi)
        return net, legs["out"], legs["in"]

    def _plain_tensor(self, net, p, bonds, pi):
        A = self.sig.algebra(p.corners[0])
        n = len(bonds)
        if n == 2:
            net.add(A.gram, bonds)
            return
        cur = bonds[0]
        for k in range(1, n):
            nxt = ("t", pi, k)
            net.add(A.mult, (cur, bonds[k], nxt))
            cur = nxt
        net.add(A.counit, (cur,))

    def _wall_tensor(self, net, M, p, bonds, pi):
        n = len(bonds)
        flows = [M.flow(s) for s in p.slots]
        kin, kout = flows.index(1), flows.index(-1)
        X = self.sig.wall(M.edges[p.slots[kin][0]].wall[0]).bimodule
        after = [(kout + j) % n for j in range(1, n)]
        i = after.index(kin)
        ops = [("l", k) for k in reversed(after[:i])] + [("r", k) for k in after[i + 1:]]
        if not ops:
            net.add(el.identity(X.dim, X.field), (bonds[kin], bonds[kout]))
            return
        cur = bonds[kin]
        for j, (side, k) in enumerate(ops):
            nxt = bonds[kout] if j == len(ops) - 1 else ("t", pi, k)
            if side == "l":
                net.add(X.lam, (bonds[k], cur, nxt))
            else:
                net.add(X.rho, (cur, bonds[k], nxt))
            cur = nxt

    def _junction_tensor(self, net, M, p, bonds):
        label, sign = p.junction
        J = self.sig.junction(label)
        legs = sf.junction_legs(M, p)
        table = J.phi if sign > 0 else J.phi_minus
        dims = [X.dim for X in self.sig.chain(legs)]
        net.add(np.asarray(table[legs], dtype=object).reshape(dims), bonds)

    def evaluate_cw(self, M: DecoratedSurface, stats: el.ContractionStats | None = None,
                    validate: bool = True) -> np.ndarray:
        """Tcw(M) as a matrix from the in-factors to the out-factors."""
        if validate:
            sf.check(self.sig, M)
        net, outs, ins = self._network(M)
        flat_out = [b for c in outs for b in c]
        flat_in = [b for c in ins for b in c]
        t = net.contract(flat_out + flat_in, stats)
        rows = int(np.prod(t.shape[:len(flat_out)], dtype=object)) if flat_out else 1
        return t.reshape(rows, -1)

    def evaluate(self, M: DecoratedSurface, validate: bool = True) -> Amplitude:
        if validate:
            sf.check(self.sig, M)
        stats = el.ContractionStats()
        net, outs, ins = self._network(M)
        src, tgt = [], []
        open_out, open_in = [], []
        for ci, (a, legs) in enumerate(zip(M.inputs, ins)):
            bm = self.boundary_maps(a.circle)
            src.append(bm.space)
            net.add(bm.e.reshape(bm.slot_dims + (bm.space.dim,)), tuple(legs) + (("Tin", ci),))
            open_in.append(("Tin", ci))
        for ci, (a, legs) in enumerate(zip(M.outputs, outs)):
            bm = self.boundary_maps(a.circle)
            tgt.append(bm.space)
            net.add(bm.pi.reshape((bm.space.dim,) + bm.slot_dims), (("Tout", ci),) + tuple(legs))
            open_out.append(("Tout", ci))
        t = net.contract(open_out + open_in, stats)
        rows = int(np.prod([S.dim for S in tgt], dtype=object)) if tgt else 1
        cols = int(np.prod([S.dim for S in src], dtype=object)) if src else 1
        return Amplitude(src, tgt, t.reshape(rows, cols), stats)

    def zeta(self, c_from: BoundaryCircle, c_to: BoundaryCircle) -> np.ndarray:
        """e(c_to)∘π(c_from): the cylinder idempotent between two lifts."""
        return np.dot(self.boundary_maps(c_to).e, self.boundary_maps(c_from).pi)

    # ------------------------------------------------------------ defect operators

    def defect_operator(self, x: str) -> np.ndarray:
        """D(X_x): Z(A_s) -> Z(A_t), z ↦ Σ_j tr_X(u ↦ b_j'.u.z) b_j, in centre coordinates."""
        w = self.sig.wall(x)
        X = w.bimodule
        As, At = self.sig.algebra(w.source), self.sig.algebra(w.target)
        Zs = self.state_space(circle_from_word(self.sig, (), w.source)).splitting
        Zt = self.state_space(circle_from_word(self.sig, (), w.target)).splitting
        fd = At.frobenius()
        dual = fd.dual_basis     # row j holds b_j'
        f = self.sig.field
        cols = []
        for j in range(Zs.dim):
            z = Zs.embed[:, j]
            Rz = X.right_matrix(z)
            v = el.zeros(At.dim, f)
            for i in range(At.dim):
                tr = np.trace(np.dot(X.left_matrix(dual[i]), Rz))
                v[i] = f(tr)
            cols.append(np.dot(Zt.project, v))
        if not cols:
            return el.zeros((Zt.dim, 0), f)
        return np.array(cols, dtype=object).T.copy()

    def cardy_check(self, x: str) -> "CardyResult":
        w = self.sig.wall(x)
        if w.source != w.target:
            raise SourceTargetMismatch(f"wall {x!r} goes from {w.source!r} to {w.target!r}")
        lhs = self.state_space(circle_from_word(self.sig, ((x, 1),))).dim
        D = self.defect_operator(x)
        rhs = sum((D[i, i] for i in range(D.shape[0])), self.sig.field(0))
        t1 = self.evaluate(sf.torus(self.sig, x, cut="cylinder")).matrix[0, 0]
        t2 = self.evaluate(sf.torus(self.sig, x, cut="annulus")).matrix[0, 0]
        return CardyResult(lhs, rhs, lhs == rhs, t1, t2)

    # ------------------------------------------------------------ defect 2-category

    def circle(self, m: "OneMorphism", n: "OneMorphism") -> BoundaryCircle:
        """O(n ∘ m*) for parallel 1-morphisms m, n : a -> b."""
        if (m.source, m.target) != (n.source, n.target):
            raise SourceTargetMismatch(f"{m} and {n} are not parallel")
        return circle_from_word(self.sig, n.word + dual_word(m.word), n.target)

    def space2(self, m: "OneMorphism", n: "OneMorphism") -> StateSpace:
        return self.state_space(self.circle(m, n))

    def _canonical(self, M: DecoratedSurface, domain: str) -> DecoratedSurface:
        c = M.outputs[0].circle
        return sf.glue(M, sf.reduce_ring(self.sig, c, domain))

    def vertical_bordism(self, x: "OneMorphism", y: "OneMorphism", z: "OneMorphism") -> DecoratedSurface:
        """D2(y, z) ⊗ D2(x, y) -> D2(x, z): pants, then cap the y* y pairs from the inside out."""
        c1, c2 = self.circle(y, z), self.circle(x, y)
        M = sf.pants(self.sig, c1, c2, len(c1.slots))
        r, q = len(z.word), len(y.word)
        for j in range(1, q + 1):
            M = sf.glue(M, sf.cap_pair(self.sig, M.outputs[0].circle, r + q - j))
        return self._canonical(M, z.target)

    def vertical_compose(self, x, y, z) -> Amplitude:
        return self.evaluate(self.vertical_bordism(x, y, z))

    def horizontal_bordism(self, x, x2, y, y2) -> DecoratedSurface:
        """D2(y, y2) ⊗ D2(x, x2) -> D2(y∘x, y2∘x2) for x, x2: a->b and y, y2: b->c."""
        c1, c2 = self.circle(y, y2), self.circle(x, x2)
        M = sf.pants(self.sig, c1, c2, len(y2.word))
        return self._canonical(M, y2.target)

    def horizontal_compose(self, x, x2, y, y2) -> Amplitude:
        return self.evaluate(self.horizontal_bordism(x, x2, y, y2))

    def identity_2morphism(self, x: "OneMorphism") -> np.ndarray:
        """id_x as a vector in D2(x, x)."""
        if not x.word:
            return self.evaluate(sf.plain_disc(self.sig, x.target)).matrix[:, 0]
        return self.evaluate(sf.chord_disc(self.sig, self.circle(x, x))).matrix[:, 0]

    def adjunction(self, x: "OneMorphism") -> dict:
        """b: 1_b => x x*, d: x* x => 1_a, b~: 1_a => x* x, d~: x x* => 1_b as vectors."""
        xs = x.dual()
        xx, sx = xs.then(x), x.then(xs)      # x∘x*: b -> b and x*∘x: a -> a
        one_a, one_b = OneMorphism((), x.source, x.source), OneMorphism((), x.target, x.target)
        out = {}
        for name, m, n in (("b", one_b, xx), ("d", sx, one_a), ("b~", one_a, sx), ("d~", xx, one_b)):
            c = self.circle(m, n)
            if not c.word():
                raise ValueError("adjunction maps need a non-empty 1-morphism")
            out[name] = (m, n, self.evaluate(sf.chord_disc(self.sig, c)).matrix[:, 0])
        return out

    def phi_coordinates(self, x: "OneMorphism", y: "OneMorphism"):
        """PhiIso for D2(x, y) ≅ Hom(X_x, X_y) with X the tensor products along the words."""
        X, Y = self.composite_bimodule(x), self.composite_bimodule(y)
        return phi_iso(Y, X)

    def composite_bimodule(self, x: "OneMorphism") -> Bimodule:
        if not x.word:
            return self.regular(x.target)
        M = self.sig.factor(*x.word[0])
        for w, e in x.word[1:]:
            M, _ = tensor_bimodule(M, self.sig.factor(w, e))
        return M


@dataclass(frozen=True)
class CardyResult:
    lhs: int
    rhs: object
    equal: bool
    torus_cylinder: object
    torus_annulus: object

    @property
    def consistent(self) -> bool:
        return self.equal and self.torus_cylinder == self.torus_annulus == self.lhs


@dataclass(frozen=True)
class OneMorphism:
    """A word of marked letters read as a 1-morphism source -> target."""

    word: tuple
    source: str
    target: str

    def dual(self) -> "OneMorphism":
        return OneMorphism(dual_word(self.word), self.target, self.source)

    def then(self, other: "OneMorphism") -> "OneMorphism":
        """other ∘ self (first self, then other): the word of other comes first."""
        if self.target != other.source:
            raise SourceTargetMismatch(f"{self} then {other}")
        return OneMorphism(other.word + self.word, self.source, other.target)

    @staticmethod
    def of(sig: DefectSignature, word, domain: str | None = None) -> "OneMorphism":
        word = tuple(word)
        if not word:
            return OneMorphism((), domain, domain)
        left, right = sig.word_ends(word)
        return OneMorphism(word, right, left)


def _tft(sig) -> TFT:
    return sig if isinstance(sig, TFT) else TFT(sig)


def state_space(sig, c: BoundaryCircle) -> StateSpace:
    return _tft(sig).state_space(c)


def evaluate_cw(sig, M: DecoratedSurface, stats=None) -> np.ndarray:
    return _tft(sig).evaluate_cw(M, stats)


def evaluate(sig, M: DecoratedSurface) -> Amplitude:
    return _tft(sig).evaluate(M)


def defect_operator(sig, x: str) -> np.ndarray:
    return _tft(sig).defect_operator(x)


def cardy_check(sig, x: str) -> CardyResult:
    return _tft(sig).cardy_check(x)
