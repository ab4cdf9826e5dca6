"""Cospans of commutative algebras and the lax centre functor.

A cospan ``Cospan(A, B, T, alpha, beta)`` goes from A to B: both A and B are
commutative and ``alpha: A -> T``, ``beta: B -> T`` land in the centre of T.
Composition ``compose_cospans(S, T)`` is S∘T (first T, then S) with carrier
S ⊗_B T, computed as a cokernel so no Frobenius property is needed.

Two-diagrams ``(g, M, f)`` between cospans S, T: A -> B have M a T-S-bimodule,
``f: S -> M`` a right S-module map and ``g: T -> M`` a left T-module map.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import exactlin as el
from .algebra import Algebra, AlgebraMap, centre_algebra, identity_map, tensor_product
from .bimodule import (AlgebraMismatch, Bimodule, BimoduleMap, hom_coordinates, hom_space,
                       induced_bimodule, regular, tensor_quotient, twist)


class CospanMismatch(ValueError):
    pass


class InvalidCospan(ValueError):
    pass


class InvalidTwoDiagram(ValueError):
    pass


# ---------------------------------------------------------------- cospans

@dataclass(frozen=True, eq=False)
class Cospan:
    A: Algebra
    B: Algebra
    T: Algebra
    alpha: AlgebraMap
    beta: AlgebraMap
    # set by compose_cospans: the two factors and the quotient of their tensor product
    factors: tuple | None = field(default=None, repr=False)
    splitting: el.SubspaceSplitting | None = field(default=None, repr=False)

    @property
    def field(self):
        return self.T.field

    def violations(self) -> list[str]:
        out = []
        for name, alg in (("A", self.A), ("B", self.B)):
            if not alg.is_commutative():
                out.append(f"{name} is not commutative")
        for name, m, src in (("alpha", self.alpha, self.A), ("beta", self.beta, self.B)):
            if not (m.source.same_as(src) and m.target.same_as(self.T)):
                out.append(f"{name} has the wrong source or target")
                continue
            out.extend(f"{name}: {e}" for e in m.violations())
            if not _central_image(m.matrix, self.T):
                out.append(f"image of {name} is not central")
        return out

    def check(self) -> "Cospan":
        bad = self.violations()
        if bad:
            raise InvalidCospan("; ".join(bad))
        return self

    def same_as(self, other: "Cospan") -> bool:
        return (self.A.same_as(other.A) and self.B.same_as(other.B) and self.T.same_as(other.T)
                and el.equal(self.alpha.matrix, other.alpha.matrix)
                and el.equal(self.beta.matrix, other.beta.matrix))


def _central_image(F, T: Algebra) -> bool:
    for i in range(F.shape[1]):
        x = F[:, i]
        for j in range(T.dim):
            t = T.basis(j)
            if not el.equal(T.mul(x, t), T.mul(t, x)):
                return False
    return True


def identity_cospan(A: Algebra) -> Cospan:
    return Cospan(A, A, A, identity_map(A), identity_map(A))


def cospan_I(f: AlgebraMap) -> Cospan:
    """I(f) = (B, id, B, f, A) for f: A -> B between commutative algebras."""
    return Cospan(f.source, f.target, f.target, f, identity_map(f.target))


@dataclass(frozen=True, eq=False)
class CospanMorphism:
    source: Cospan
    target: Cospan
    matrix: np.ndarray

    def violations(self) -> list[str]:
        S, T, F = self.source, self.target, self.matrix
        if not (S.A.same_as(T.A) and S.B.same_as(T.B)):
            return ["source and target cospans have different ends"]
        if F.shape != (T.T.dim, S.T.dim):
            return [f"matrix has shape {F.shape}"]
        out = [str(e) for e in AlgebraMap(S.T, T.T, F).violations()]
        if not el.equal(np.dot(F, S.alpha.matrix), T.alpha.matrix):
            out.append("f∘α != α'")
        if not el.equal(np.dot(F, S.beta.matrix), T.beta.matrix):
            out.append("f∘β != β'")
        return out

    def is_valid(self) -> bool:
        return not self.violations()

    def then(self, second: "CospanMorphism") -> "CospanMorphism":
        return CospanMorphism(self.source, second.target, np.dot(second.matrix, self.matrix))


def identity_morphism(C: Cospan) -> CospanMorphism:
    return CospanMorphism(C, C, el.identity(C.T.dim, C.field))


def _balanced_factors(S: Cospan, T: Cospan) -> tuple[Bimodule, Bimodule]:
    """S as a right B-module via alpha_S, T as a left B-module via beta_T."""
    return twist(regular(S.T), right=S.alpha), twist(regular(T.T), left=T.beta)


def compose_cospans(S: Cospan, T: Cospan) -> Cospan:
    """S∘T for T: A -> B and S: B -> C, with carrier S ⊗_B T."""
    if not S.A.same_as(T.B):
        raise AlgebraMismatch("cospans do not meet in the same algebra")
    split = tensor_quotient(list(_balanced_factors(S, T)))
    E, P = split.embed, split.project
    amb = tensor_product(S.T, T.T)
    r = split.dim
    mult = el.zeros((r, r, r), S.field)
    for i in range(r):
        for j in range(r):
            mult[i, j] = np.dot(P, amb.mul(E[:, i], E[:, j]))
    carrier = Algebra(mult, np.dot(P, amb.unit), f"{S.T.name}⊗{T.T.name}")
    beta = np.dot(P, el.kron(S.beta.matrix, T.T.unit.reshape(-1, 1)))
    alpha = np.dot(P, el.kron(S.T.unit.reshape(-1, 1), T.alpha.matrix))
    return Cospan(T.A, S.B, carrier, AlgebraMap(T.A, carrier, alpha),
                  AlgebraMap(S.B, carrier, beta), (S, T), split)


def _factors(C: Cospan):
    if C.factors is None:
        raise CospanMismatch("cospan is not a composite")
    return C.factors


def compose_morphisms(phi: CospanMorphism, psi: CospanMorphism) -> CospanMorphism:
    """phi ∘ psi horizontally: S∘T -> S'∘T' for phi: S -> S', psi: T -> T'."""
    src = compose_cospans(phi.source, psi.source)
    tgt = compose_cospans(phi.target, psi.target)
    F = el.matmul(tgt.splitting.project, el.kron(phi.matrix, psi.matrix), src.splitting.embed)
    return CospanMorphism(src, tgt, F)


def associator(S: Cospan, T: Cospan, U: Cospan) -> CospanMorphism:
    """(S∘T)∘U -> S∘(T∘U); both are quotients of S⊗T⊗U."""
    ST = compose_cospans(S, T)
    TU = compose_cospans(T, U)
    src = compose_cospans(ST, U)
    tgt = compose_cospans(S, TU)
    f = S.field
    down = el.kron(ST.splitting.embed, el.identity(U.T.dim, f))
    up = el.kron(el.identity(S.T.dim, f), TU.splitting.project)
    F = el.matmul(tgt.splitting.project, up, down, src.splitting.embed)
    return CospanMorphism(src, tgt, F)


def left_unitor(S: Cospan) -> CospanMorphism:
    """1_B ∘ S -> S, b ⊗ s ↦ beta(b) s."""
    src = compose_cospans(identity_cospan(S.B), S)
    amb = np.einsum("xi,xjk->kij", S.beta.matrix, S.T.mult)
    F = np.dot(amb.reshape(S.T.dim, -1), src.splitting.embed)
    return CospanMorphism(src, S, F)


def right_unitor(S: Cospan) -> CospanMorphism:
    """S ∘ 1_A -> S, s ⊗ a ↦ s alpha(a)."""
    src = compose_cospans(S, identity_cospan(S.A))
    amb = np.einsum("xj,ixk->kij", S.alpha.matrix, S.T.mult)
    F = np.dot(amb.reshape(S.T.dim, -1), src.splitting.embed)
    return CospanMorphism(src, S, F)


def pentagon_check(S: Cospan, T: Cospan, U: Cospan, V: Cospan) -> bool:
    ST, TU, UV = compose_cospans(S, T), compose_cospans(T, U), compose_cospans(U, V)
    lhs = associator(ST, U, V).then(associator(S, T, UV))
    rhs = (compose_morphisms(associator(S, T, U), identity_morphism(V))
           .then(associator(S, TU, V))
           .then(compose_morphisms(identity_morphism(S), associator(T, U, V))))
    return el.equal(lhs.matrix, rhs.matrix)


def triangle_check(S: Cospan, T: Cospan) -> bool:
    lhs = associator(S, identity_cospan(S.A), T).then(
        compose_morphisms(identity_morphism(S), left_unitor(T)))
    rhs = compose_morphisms(right_unitor(S), identity_morphism(T))
    return el.equal(lhs.matrix, rhs.matrix)


# ---------------------------------------------------------------- centre functor

def centraliser(f: AlgebraMap) -> tuple[Algebra, AlgebraMap]:
    """Z_{A,B}(f) = {b : f(a) b = b f(a)} and its inclusion into B."""
    A, B = f.source, f.target
    blocks = [B.left_matrix(f.matrix[:, i]) - B.right_matrix(f.matrix[:, i]) for i in range(A.dim)]
    basis = el.kernel(np.vstack(blocks))
    Z = B.subalgebra(basis)
    Z.name = f"Z({B.name};f)"
    return Z, AlgebraMap(Z, B, basis)


def _restrict(F, incl: AlgebraMap) -> np.ndarray:
    x = el.solve(incl.matrix, F)
    if x is None:
        raise ValueError("map does not land in the subalgebra")
    return x


def centre_inclusion(A: Algebra) -> AlgebraMap:
    Z = centre_algebra(A)
    return AlgebraMap(Z, A, A.centre().embed)


def centre_cospan(f: AlgebraMap) -> Cospan:
    """(Z(B), ι, Z_{A,B}(f), f|, Z(A)) as a cospan from Z(A) to Z(B)."""
    zA, zB = centre_inclusion(f.source), centre_inclusion(f.target)
    Zf, incl = centraliser(f)
    iota = AlgebraMap(zB.source, Zf, _restrict(zB.matrix, incl))
    fr = AlgebraMap(zA.source, Zf, _restrict(np.dot(f.matrix, zA.matrix), incl))
    return Cospan(zA.source, zB.source, Zf, fr, iota)


@dataclass(frozen=True)
class LaxFunctor:
    """Action on 1-morphisms and the comparison maps m_{g,f}."""

    name: str
    on_map: callable
    middle_inclusion: callable   # f ↦ embedding of the middle algebra into target(f)

    def __call__(self, f: AlgebraMap) -> Cospan:
        return self.on_map(f)

    def m(self, g: AlgebraMap, f: AlgebraMap) -> CospanMorphism:
        """u ⊗ v ↦ u·g(v) from F(g)∘F(f) to F(g∘f)."""
        Fg, Ff, Fgf = self(g), self(f), self(g.compose(f))
        src = compose_cospans(Fg, Ff)
        eg, ef, egf = (self.middle_inclusion(h) for h in (g, f, g.compose(f)))
        C = g.target
        gv = np.dot(g.matrix, ef)             # g(v_j) in C
        amb = el.zeros((C.dim, eg.shape[1] * ef.shape[1]), C.field)
        for i, j in itertools.product(range(eg.shape[1]), range(ef.shape[1])):
            amb[:, i * ef.shape[1] + j] = C.mul(eg[:, i], gv[:, j])
        coords = el.solve(egf, amb)
        if coords is None:
            raise ValueError("u·g(v) left the centraliser")
        return CospanMorphism(src, Fgf, np.dot(coords, src.splitting.embed))


CENTRE = LaxFunctor("Z", centre_cospan, lambda f: centraliser(f)[1].matrix)
INCLUSION = LaxFunctor("I", cospan_I, lambda f: el.identity(f.target.dim, f.target.field))


def lax_structure(f: AlgebraMap, g: AlgebraMap) -> CospanMorphism:
    return CENTRE.m(g, f)


@dataclass(frozen=True)
class LaxReport:
    m: CospanMorphism
    source_dim: int
    target_dim: int
    rank: int
    valid: bool
    triangles: bool

    @property
    def surjective(self) -> bool:
        return self.rank == self.target_dim

    @property
    def injective(self) -> bool:
        return self.rank == self.source_dim

    def as_dict(self) -> dict:
        return {"source_dim": self.source_dim, "target_dim": self.target_dim, "rank": self.rank,
                "cospan_morphism": self.valid, "triangles": self.triangles,
                "surjective": self.surjective, "injective": self.injective}


def lax_report(f: AlgebraMap, g: AlgebraMap, functor: LaxFunctor = CENTRE) -> LaxReport:
    """m_{g,f} together with its rank and the two triangles c = m(c⊗1), g(f(a)) = m(1⊗f(a))."""
    mm = functor.m(g, f)
    S, T = mm.source.factors
    P = mm.source.splitting.project
    ok = True
    one_S, one_T = S.T.unit.reshape(-1, 1), T.T.unit.reshape(-1, 1)
    # the two legs of the composite are sent to the legs of F(g∘f) by any cospan morphism,
    # the triangles are the statements on the generators c ⊗ 1 and 1 ⊗ t
    left = el.matmul(mm.matrix, P, el.kron(el.identity(S.T.dim, S.field), one_T))
    ok &= el.equal(left, _restrict_middle(functor, g, f, S, "left"))
    right = el.matmul(mm.matrix, P, el.kron(one_S, el.identity(T.T.dim, T.field)))
    ok &= el.equal(right, _restrict_middle(functor, g, f, T, "right"))
    return LaxReport(mm, mm.source.T.dim, mm.target.T.dim, el.rank(mm.matrix), mm.is_valid(), ok)


def _restrict_middle(functor, g, f, factor, side) -> np.ndarray:
    """Expected value of m on c⊗1 (c ↦ c) or on 1⊗v (v ↦ g(v)) in F(g∘f) coordinates."""
    egf = functor.middle_inclusion(g.compose(f))
    if side == "left":
        amb = functor.middle_inclusion(g)
    else:
        amb = np.dot(g.matrix, functor.middle_inclusion(f))
    return el.solve(egf, amb)


def lax_coherence(f: AlgebraMap, g: AlgebraMap, h: AlgebraMap,
                  functor: LaxFunctor = CENTRE) -> dict:
    """Associativity square and the two unit triangles for A -f-> B -g-> C -h-> D."""
    Ff, Fg, Fh = functor(f), functor(g), functor(h)
    lhs = (associator(Fh, Fg, Ff)
           .then(compose_morphisms(identity_morphism(Fh), functor.m(g, f)))
           .then(functor.m(h, g.compose(f))))
    rhs = compose_morphisms(functor.m(h, g), identity_morphism(Ff)).then(functor.m(h.compose(g), f))
    ida, idb = identity_map(f.source), identity_map(f.target)
    # the unit transformation is the identity since F(id_A) is the identity cospan on F(A)
    unit_ok = functor(ida).same_as(identity_cospan(Ff.A)) and functor(idb).same_as(identity_cospan(Ff.B))
    return {
        "associativity": el.equal(lhs.matrix, rhs.matrix),
        "left_unit": unit_ok and el.equal(functor.m(idb, f).matrix, left_unitor(Ff).matrix),
        "right_unit": unit_ok and el.equal(functor.m(f, ida).matrix, right_unitor(Ff).matrix),
    }


def centre_containments(f: AlgebraMap) -> bool:
    """centre(B) ⊆ Z_{A,B}(f) and f(centre(A)) ⊆ centre(Z_{A,B}(f))."""
    Zf, incl = centraliser(f)
    if el.solve(incl.matrix, f.target.centre().embed) is None:
        return False
    img = el.solve(incl.matrix, np.dot(f.matrix, f.source.centre().embed))
    return img is not None and _central_image(img, Zf)


# ---------------------------------------------------------------- invertibility of cospans

@dataclass(frozen=True)
class Verdict:
    invertible: bool
    reason: str
    inverse: object = None
    witnesses: tuple = ()    # checked isomorphisms to identities

    def as_dict(self) -> dict:
        return {"invertible": self.invertible, "reason": self.reason,
                "witnesses_checked": len(self.witnesses)}


def cospan_invertibility(C: Cospan) -> Verdict:
    """Invertible iff both legs are; the inverse is I(α⁻¹∘β) with explicit unit isomorphisms."""
    ra, rb = el.rank(C.alpha.matrix), el.rank(C.beta.matrix)
    n = C.T.dim
    if not (ra == rb == n == C.A.dim == C.B.dim):
        return Verdict(False, f"leg ranks {ra}, {rb} for a middle of dim {n}")
    ainv = el.inverse(C.alpha.matrix)
    binv = el.inverse(C.beta.matrix)
    U = cospan_I(AlgebraMap(C.B, C.A, np.dot(ainv, C.beta.matrix)))
    UC, CU = compose_cospans(U, C), compose_cospans(C, U)
    # U∘C = A ⊗_B T -> A, a ⊗ t ↦ a·α⁻¹(t)
    A = C.A
    amb = np.einsum("xj,ixk->kij", ainv, A.mult).reshape(A.dim, -1)
    w1 = CospanMorphism(UC, identity_cospan(C.A), np.dot(amb, UC.splitting.embed))
    # C∘U = T ⊗_A A -> B, t ⊗ a ↦ β⁻¹(t·α(a))
    T = C.T
    ta = np.einsum("xj,ixk->kij", C.alpha.matrix, T.mult).reshape(T.dim, -1)
    w2 = CospanMorphism(CU, identity_cospan(C.B), el.matmul(binv, ta, CU.splitting.embed))
    for w in (w1, w2):
        if not (w.is_valid() and el.is_invertible(w.matrix)):
            return Verdict(False, "constructed witness failed", U, (w1, w2))
    return Verdict(True, "both legs invertible", U, (w1, w2))


# ---------------------------------------------------------------- 2-diagrams

@dataclass(frozen=True, eq=False)
class TwoDiagram:
    source: Cospan
    target: Cospan
    M: Bimodule           # left T-action, right S-action
    f: np.ndarray         # S -> M
    g: np.ndarray         # T -> M
    # set by the compositions: factors and the quotient splitting of the carrier
    factors: tuple | None = field(default=None, repr=False)
    splitting: el.SubspaceSplitting | None = field(default=None, repr=False)

    def violations(self) -> list[str]:
        S, T, M = self.source, self.target, self.M
        if not (S.A.same_as(T.A) and S.B.same_as(T.B)):
            return ["source and target cospans have different ends"]
        if not (M.left.same_as(T.T) and M.right.same_as(S.T)):
            return ["carrier is not a T-S-bimodule"]
        if self.f.shape != (M.dim, S.T.dim) or self.g.shape != (M.dim, T.T.dim):
            return ["legs have the wrong shape"]
        out = []
        for i in range(S.T.dim):
            s = S.T.basis(i)
            if not el.equal(np.dot(self.f, S.T.right_matrix(s)), np.dot(M.right_matrix(s), self.f)):
                out.append(f"f is not right S-linear at s_{i}")
        for i in range(T.T.dim):
            t = T.T.basis(i)
            if not el.equal(np.dot(self.g, T.T.left_matrix(t)), np.dot(M.left_matrix(t), self.g)):
                out.append(f"g is not left T-linear at t_{i}")
        for leg in ("alpha", "beta"):
            a1, a2 = getattr(S, leg).matrix, getattr(T, leg).matrix
            if not el.equal(np.dot(self.f, a1), np.dot(self.g, a2)):
                out.append(f"{leg} square does not commute")
            for j in range(a1.shape[1]):
                if not el.equal(M.left_matrix(a2[:, j]), M.right_matrix(a1[:, j])):
                    out.append(f"left and right {leg} actions differ")
                    break
        return out

    def is_valid(self) -> bool:
        return not self.violations()

    def check(self) -> "TwoDiagram":
        bad = self.violations()
        if bad:
            raise InvalidTwoDiagram("; ".join(bad))
        return self


def unit_2diagram(T: Cospan) -> TwoDiagram:
    I = el.identity(T.T.dim, T.field)
    return TwoDiagram(T, T, regular(T.T), I, I)


def diagram_I(phi: CospanMorphism) -> TwoDiagram:
    """(id_T, T, phi) for a cospan morphism phi: S -> T."""
    S, T = phi.source, phi.target
    M = twist(regular(T.T), right=AlgebraMap(S.T, T.T, phi.matrix))
    return TwoDiagram(S, T, M, phi.matrix, el.identity(T.T.dim, T.field))


def compose_2diagrams_vertical(N: TwoDiagram, M: TwoDiagram) -> TwoDiagram:
    """N ⊙ M for M: R -> S and N: S -> T, carrier N ⊗_S M."""
    if not N.source.same_as(M.target):
        raise CospanMismatch("middle cospans differ")
    split = tensor_quotient([N.M, M.M])
    X = induced_bimodule(N.M, M.M, split)
    S = M.target.T
    f = np.dot(split.project, el.kron(np.dot(N.f, S.unit).reshape(-1, 1), M.f))
    g = np.dot(split.project, el.kron(N.g, np.dot(M.g, S.unit).reshape(-1, 1)))
    return TwoDiagram(M.source, N.target, X, f, g, (N, M), split)


def _descend(E_alg, P_X, E_X, act) -> np.ndarray:
    """Action matrices of a quotient algebra on a quotient module, one per basis element."""
    return [el.matmul(P_X, act(E_alg[:, i]), E_X) for i in range(E_alg.shape[1])]


def compose_2diagrams_horizontal(N: TwoDiagram, M: TwoDiagram) -> TwoDiagram:
    """N ⊚ M for N between cospans B -> C and M between cospans A -> B, carrier N ⊗_B M."""
    T, T2, S, S2 = N.source, N.target, M.source, M.target
    if not T.A.same_as(S.B):
        raise AlgebraMismatch("2-diagrams do not meet in the same algebra")
    src, tgt = compose_cospans(T, S), compose_cospans(T2, S2)
    Nb = twist(N.M, right=T.alpha)
    Mb = twist(M.M, left=S2.beta)
    split = tensor_quotient([Nb, Mb])
    E, P = split.embed, split.project
    fld = T.field
    def left_act(v):
        v = v.reshape(T2.T.dim, S2.T.dim)
        return sum((v[i, j] * el.kron(N.M.left_matrix(T2.T.basis(i)), M.M.left_matrix(S2.T.basis(j)))
                    for i in range(T2.T.dim) for j in range(S2.T.dim) if v[i, j] != 0),
                   el.zeros((N.M.dim * M.M.dim,) * 2, fld))

    def right_act(v):
        v = v.reshape(T.T.dim, S.T.dim)
        return sum((v[i, j] * el.kron(N.M.right_matrix(T.T.basis(i)), M.M.right_matrix(S.T.basis(j)))
                    for i in range(T.T.dim) for j in range(S.T.dim) if v[i, j] != 0),
                   el.zeros((N.M.dim * M.M.dim,) * 2, fld))

    lam = np.array(_descend(tgt.splitting.embed, P, E, left_act), dtype=object)
    # rho[x, b, y]: coefficient of y in x.b; _descend gives matrices acting on columns
    rmats = _descend(src.splitting.embed, P, E, right_act)
    r = split.dim
    rho = el.zeros((r, src.T.dim, r), fld)
    for b, m in enumerate(rmats):
        rho[:, b, :] = m.T
    lam = lam.transpose(0, 2, 1).copy() if r else el.zeros((tgt.T.dim, 0, 0), fld)
    X = Bimodule(tgt.T, src.T, lam, rho, f"{N.M.name}⊗{M.M.name}")
    f = el.matmul(P, el.kron(N.f, M.f), src.splitting.embed)
    g = el.matmul(P, el.kron(N.g, M.g), tgt.splitting.embed)
    return TwoDiagram(src, tgt, X, f, g, (N, M), split)


# ---------------------------------------------------------------- 3-cells

@dataclass(frozen=True, eq=False)
class ThreeCell:
    source: TwoDiagram
    target: TwoDiagram
    delta: np.ndarray

    def violations(self) -> list[str]:
        D, D2, d = self.source, self.target, self.delta
        if not (D.source.same_as(D2.source) and D.target.same_as(D2.target)):
            return ["2-diagrams between different cospans"]
        out = list(BimoduleMap(D.M, D2.M, d).violations())
        if not el.equal(np.dot(d, D.f), D2.f):
            out.append("δ∘f != f'")
        if not el.equal(np.dot(d, D.g), D2.g):
            out.append("δ∘g != g'")
        return out

    def is_valid(self) -> bool:
        return not self.violations()


def three_cell_space(D: TwoDiagram, D2: TwoDiagram):
    """Affine space of 3-cells D -> D2 as (particular solution, kernel basis) or None."""
    M, M2 = D.M, D2.M
    n, n2 = M.dim, M2.dim
    fld = D.source.field
    I, I2 = el.identity(n, fld), el.identity(n2, fld)
    rows, rhs = [], []
    # δ is unknown, vec(δ) row-major; kron(L, I) vec(δ) = vec(L δ), kron(I, R^T) vec(δ) = vec(δ R)
    for alg, side in ((M.left, "left"), (M.right, "right")):
        for i in range(alg.dim):
            a = alg.basis(i)
            if side == "left":
                rows.append(el.kron(M2.left_matrix(a), I) - el.kron(I2, M.left_matrix(a).T))
            else:
                rows.append(el.kron(M2.right_matrix(a), I) - el.kron(I2, M.right_matrix(a).T))
            rhs.append(el.zeros(n2 * n, fld))
    for leg, leg2 in ((D.f, D2.f), (D.g, D2.g)):
        rows.append(el.kron(I2, leg.T))
        rhs.append(leg2.reshape(-1))
    A = np.vstack(rows)
    b = np.concatenate(rhs)
    x = el.solve(A, b)
    if x is None:
        return None
    K = el.kernel(A)
    return x.reshape(n2, n), [K[:, j].reshape(n2, n) for j in range(K.shape[1])]


def find_3iso(D: TwoDiagram, D2: TwoDiagram, grid: int = 2) -> ThreeCell | None:
    """An invertible 3-cell D -> D2, searched as particular solution plus small kernel combinations."""
    if D.M.dim != D2.M.dim:
        return None
    space = three_cell_space(D, D2)
    if space is None:
        return None
    x, K = space
    fld = D.source.field
    coeffs = range(-grid, grid + 1)
    for cs in itertools.product(coeffs, repeat=min(len(K), 3)):
        d = x + sum((fld(c) * k for c, k in zip(cs, K)), el.zeros(x.shape, fld))
        if el.is_invertible(d):
            return ThreeCell(D, D2, d)
    return None


def interchange_cell(N2: TwoDiagram, N: TwoDiagram, M2: TwoDiagram, M: TwoDiagram) -> tuple[ThreeCell, ThreeCell]:
    """The permutation maps X -> Y and Y -> X where X = (N2⊙N)⊚(M2⊙M), Y = (N2⊚M2)⊙(N⊚M)."""
    X = compose_2diagrams_horizontal(compose_2diagrams_vertical(N2, N), compose_2diagrams_vertical(M2, M))
    Y = compose_2diagrams_vertical(compose_2diagrams_horizontal(N2, M2), compose_2diagrams_horizontal(N, M))
    dims = [N2.M.dim, N.M.dim, M2.M.dim, M.M.dim]
    nv, mv = X.factors
    hx = el.kron(nv.splitting.embed, mv.splitting.embed)           # N2⊗N⊗M2⊗M
    h2, h1 = Y.factors
    hy = el.kron(h2.splitting.project, h1.splitting.project)       # from N2⊗M2⊗N⊗M
    perm = _axis_permutation(dims, (0, 2, 1, 3), X.source.field)
    fwd = el.matmul(Y.splitting.project, hy, perm, hx, X.splitting.embed)
    bx = el.kron(nv.splitting.project, mv.splitting.project)
    by = el.kron(h2.splitting.embed, h1.splitting.embed)
    back = el.matmul(X.splitting.project, bx, perm.T, by, Y.splitting.embed)
    return ThreeCell(X, Y, fwd), ThreeCell(Y, X, back)


def _axis_permutation(dims, order, fld) -> np.ndarray:
    """Matrix sending e_{i0..i3} to e_{i[order]} in the permuted tensor product."""
    n = int(np.prod(dims))
    P = el.zeros((n, n), fld)
    new_dims = [dims[k] for k in order]
    for idx in itertools.product(*[range(d) for d in dims]):
        src = np.ravel_multi_index(idx, dims)
        dst = np.ravel_multi_index(tuple(idx[k] for k in order), new_dims)
        P[dst, src] = fld(1)
    return P


def diagram_invertibility(D: TwoDiagram) -> Verdict:
    """Invertible iff f and g are; the inverse is I(φ) with t.m = m.φ(t) for m = f(1)."""
    n = D.M.dim
    if not (el.rank(D.f) == el.rank(D.g) == n == D.f.shape[1] == D.g.shape[1]):
        return Verdict(False, f"leg ranks {el.rank(D.f)}, {el.rank(D.g)} on a carrier of dim {n}")
    S, T = D.source, D.target
    phi = el.matmul(el.inverse(D.f), D.g)          # T -> S
    inv = diagram_I(CospanMorphism(T, S, phi))
    w1 = find_3iso(compose_2diagrams_vertical(inv, D), unit_2diagram(S))
    w2 = find_3iso(compose_2diagrams_vertical(D, inv), unit_2diagram(T))
    if w1 is None or w2 is None or not (w1.is_valid() and w2.is_valid()):
        return Verdict(False, "constructed witness failed", inv)
    return Verdict(True, "f and g invertible", inv, (w1, w2))


# ---------------------------------------------------------------- endomorphism cospans

def hom_algebra(X: Bimodule) -> tuple[Algebra, list]:
    """Hom(X, X) with composition as product, and its matrix basis."""
    basis = hom_space(X, X)
    r = len(basis)
    fld = X.field
    mult = el.zeros((r, r, r), fld)
    for i, j in itertools.product(range(r), repeat=2):
        mult[i, j] = hom_coordinates(basis, np.dot(basis[i], basis[j]))
    unit = hom_coordinates(basis, el.identity(X.dim, fld))
    return Algebra(mult, unit, f"End({X.name})"), basis


def endomorphism_cospan(X: Bimodule) -> tuple[Cospan, list]:
    """(Z(L), act, End(X), act, Z(R)) for an L-R-bimodule X, going from Z(R) to Z(L)."""
    H, basis = hom_algebra(X)
    zl, zr = centre_inclusion(X.left), centre_inclusion(X.right)
    beta = np.array([hom_coordinates(basis, X.left_matrix(zl.matrix[:, i]))
                     for i in range(zl.matrix.shape[1])], dtype=object).T
    alpha = np.array([hom_coordinates(basis, X.right_matrix(zr.matrix[:, i]))
                      for i in range(zr.matrix.shape[1])], dtype=object).T
    C = Cospan(zr.source, zl.source, H, AlgebraMap(zr.source, H, alpha), AlgebraMap(zl.source, H, beta))
    return C, basis


def centre_2diagram(h: BimoduleMap) -> TwoDiagram:
    """(−)∘h and h∘(−) into Hom(X, Y) between the endomorphism cospans of X and Y."""
    X, Y = h.source, h.target
    S, bx = endomorphism_cospan(X)
    T, by = endomorphism_cospan(Y)
    bxy = hom_space(X, Y)
    fld = X.field
    r = len(bxy)

    def coords(F):
        return hom_coordinates(bxy, F)

    lam = el.zeros((T.T.dim, r, r), fld)
    for i, j in itertools.product(range(T.T.dim), range(r)):
        lam[i, j] = coords(np.dot(by[i], bxy[j]))
    rho = el.zeros((r, S.T.dim, r), fld)
    for j, i in itertools.product(range(r), range(S.T.dim)):
        rho[j, i] = coords(np.dot(bxy[j], bx[i]))
    M = Bimodule(T.T, S.T, lam, rho, "Hom(X,Y)")
    f = np.array([coords(np.dot(h.matrix, b)) for b in bx], dtype=object).T.reshape(r, S.T.dim)
    g = np.array([coords(np.dot(b, h.matrix)) for b in by], dtype=object).T.reshape(r, T.T.dim)
    return TwoDiagram(S, T, M, f, g)


def conjugation_morphism(h: BimoduleMap) -> CospanMorphism:
    """c ↦ h c h⁻¹ between the endomorphism cospans, for invertible h."""
    S, bx = endomorphism_cospan(h.source)
    T, by = endomorphism_cospan(h.target)
    hinv = el.inverse(h.matrix)
    F = np.array([hom_coordinates(by, el.matmul(h.matrix, b, hinv)) for b in bx], dtype=object).T
    return CospanMorphism(S, T, F.reshape(T.T.dim, S.T.dim))


def commuting_square(h: BimoduleMap) -> ThreeCell | None:
    """For invertible h: an isomorphism from I(conjugation by h) to the centre 2-diagram of h."""
    return find_3iso(diagram_I(conjugation_morphism(h)), centre_2diagram(h))
