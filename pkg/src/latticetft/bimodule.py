"""Bimodules, their tensor products over algebras, and intertwiner spaces.

A bimodule X over (A, B) has a left A-action and a right B-action:
``lam[i, j, k]`` is the coefficient of u_k in a_i . u_j and
``rho[j, i, k]`` the coefficient of u_k in u_j . b_i.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import exactlin as el
from .algebra import Algebra, AlgebraMap, NotFrobenius, subspace_splitting
from .exactlin import SubspaceSplitting


class AlgebraMismatch(ValueError):
    pass


class InvalidBimodule(ValueError):
    pass


class Bimodule:
    def __init__(self, left: Algebra, right: Algebra, lam, rho, name: str = ""):
        self.left = left
        self.right = right
        self.lam = np.asarray(lam, dtype=object)
        self.rho = np.asarray(rho, dtype=object)
        n = self.lam.shape[1] if self.lam.ndim == 3 else -1
        if self.lam.shape != (left.dim, n, n) or self.rho.shape != (n, right.dim, n) or n <= 0:
            raise InvalidBimodule(f"action tensors have shapes {self.lam.shape}, {self.rho.shape}")
        self.name = name

    def __repr__(self):
        return f"Bimodule({self.name or '?'}, dim={self.dim})"

    @property
    def dim(self) -> int:
        return self.lam.shape[1]

    @property
    def field(self):
        return self.left.field

    def left_matrix(self, a) -> np.ndarray:
        """Matrix of x ↦ a.x for an algebra element a (coordinate vector)."""
        return np.tensordot(a, self.lam, axes=(0, 0)).T.copy()

    def right_matrix(self, b) -> np.ndarray:
        return np.tensordot(b, self.rho, axes=(0, 1)).T.copy()

    def act(self, a, x, b) -> np.ndarray:
        out = x
        if a is not None:
            out = np.dot(self.left_matrix(a), out)
        if b is not None:
            out = np.dot(self.right_matrix(b), out)
        return out

    def violations(self) -> list[str]:
        out = []
        A, B = self.left, self.right
        L = [self.left_matrix(A.basis(i)) for i in range(A.dim)]
        R = [self.right_matrix(B.basis(i)) for i in range(B.dim)]
        eye = el.identity(self.dim, self.field)
        if not el.equal(self.left_matrix(A.unit), eye):
            out.append("left action is not unital")
        if not el.equal(self.right_matrix(B.unit), eye):
            out.append("right action is not unital")
        for i in range(A.dim):
            for j in range(A.dim):
                if not el.equal(np.dot(L[i], L[j]), self.left_matrix(A.mult[i, j])):
                    out.append(f"left action not associative at ({i}, {j})")
                    break
        for i in range(B.dim):
            for j in range(B.dim):
                # (x.b_i).b_j = x.(b_i b_j)
                if not el.equal(np.dot(R[j], R[i]), self.right_matrix(B.mult[i, j])):
                    out.append(f"right action not associative at ({i}, {j})")
                    break
        for i in range(A.dim):
            for j in range(B.dim):
                if not el.equal(np.dot(L[i], R[j]), np.dot(R[j], L[i])):
                    out.append(f"actions do not commute at ({i}, {j})")
                    break
        return out

    def check(self) -> "Bimodule":
        bad = self.violations()
        if bad:
            raise InvalidBimodule("; ".join(bad))
        return self

    @cached_property
    def dual(self) -> "Bimodule":
        """X* over (B, A) with (b.φ.a)(x) = φ(a.x.b)."""
        lam = self.rho.transpose(1, 2, 0).copy()   # (b_i.u_j*)(u_l) = ρ[l, i, j]
        rho = self.lam.transpose(2, 0, 1).copy()   # (u_j*.a_i)(u_l) = λ[i, l, j]
        d = Bimodule(self.right, self.left, lam, rho, f"{self.name}*")
        d.__dict__["dual"] = self
        return d


@dataclass(frozen=True, eq=False)
class BimoduleMap:
    source: Bimodule
    target: Bimodule
    matrix: np.ndarray

    def violations(self) -> list[str]:
        X, Y, F = self.source, self.target, self.matrix
        out = []
        if F.shape != (Y.dim, X.dim):
            return [f"map has shape {F.shape}"]
        for i in range(X.left.dim):
            a = X.left.basis(i)
            if not el.equal(np.dot(F, X.left_matrix(a)), np.dot(Y.left_matrix(a), F)):
                out.append(f"does not commute with left action of a_{i}")
        for i in range(X.right.dim):
            b = X.right.basis(i)
            if not el.equal(np.dot(F, X.right_matrix(b)), np.dot(Y.right_matrix(b), F)):
                out.append(f"does not commute with right action of b_{i}")
        return out

    def is_valid(self) -> bool:
        return not self.violations()

    def compose(self, first: "BimoduleMap") -> "BimoduleMap":
        return BimoduleMap(first.source, self.target, np.dot(self.matrix, first.matrix))


# ---------------------------------------------------------------- constructors

def regular(A: Algebra) -> Bimodule:
    return Bimodule(A, A, A.mult, A.mult, A.name)


def module_from_map(f: AlgebraMap) -> Bimodule:
    """B_f over (B, A): left multiplication, right action b.f(a)."""
    B = f.target
    rho = np.tensordot(B.mult, f.matrix, axes=(1, 0)).transpose(0, 2, 1).copy()
    return Bimodule(B, f.source, B.mult, rho, f"{B.name}_f")


def twist(X: Bimodule, left: AlgebraMap | None = None, right: AlgebraMap | None = None) -> Bimodule:
    """Restrict the actions of X along algebra maps into its algebras."""
    lam, rho = X.lam, X.rho
    A, B = X.left, X.right
    if left is not None:
        lam = np.tensordot(left.matrix, X.lam, axes=(0, 0))
        A = left.source
    if right is not None:
        rho = np.tensordot(X.rho, right.matrix, axes=(1, 0)).transpose(0, 2, 1).copy()
        B = right.source
    return Bimodule(A, B, lam, rho, f"{X.name}^tw")


def direct_sum(*mods: Bimodule) -> Bimodule:
    A, B = mods[0].left, mods[0].right
    for m in mods[1:]:
        if not (m.left.same_as(A) and m.right.same_as(B)):
            raise AlgebraMismatch("direct sum of bimodules over different algebras")
    n = sum(m.dim for m in mods)
    f = A.field
    lam = el.zeros((A.dim, n, n), f)
    rho = el.zeros((n, B.dim, n), f)
    off = 0
    for m in mods:
        d = m.dim
        lam[:, off:off + d, off:off + d] = m.lam
        rho[off:off + d, :, off:off + d] = m.rho
        off += d
    return Bimodule(A, B, lam, rho, "+".join(m.name or "?" for m in mods))


def external_tensor(X: Bimodule, Y: Bimodule, left: Algebra, right: Algebra) -> Bimodule:
    """X⊗Y over (X.left ⊗ Y.left, X.right ⊗ Y.right) given those tensor algebras."""
    lam = np.einsum("aij,bkl->abikjl", X.lam, Y.lam).reshape(left.dim, X.dim * Y.dim, X.dim * Y.dim)
    rho = np.einsum("iaj,kbl->ikabjl", X.rho, Y.rho).reshape(X.dim * Y.dim, right.dim, X.dim * Y.dim)
    return Bimodule(left, right, lam, rho)


# ---------------------------------------------------------------- tensor products

def _insertion_network(chain: list, cyclic: bool) -> np.ndarray:
    """Matrix of the combined idempotent on the ambient tensor product."""
    n = len(chain)
    net = el.Network()
    f = chain[0].field
    for k, X in enumerate(chain):
        has_left = cyclic or k > 0
        has_right = cyclic or k < n - 1
        src, mid, dst = ("in", k), ("mid", k), ("out", k)
        if has_left and has_right:
            net.add(X.lam, (("bl", k), src, mid))
            net.add(X.rho, (mid, ("br", k), dst))
        elif has_left:
            net.add(X.lam, (("bl", k), src, dst))
        elif has_right:
            net.add(X.rho, (src, ("br", k), dst))
        else:
            net.add(el.identity(X.dim, f), (src, dst))
    pairs = range(n) if cyclic else range(n - 1)
    for k in pairs:
        A = chain[k].right
        fd = A.frobenius()
        # Σ (x_k . a_i') ⊗ (a_i . x_{k+1}) with β(1) = Σ cop[p, q] a_p ⊗ a_q
        net.add(fd.copairing, (("br", k), ("bl", (k + 1) % n)))
    outs = [("out", k) for k in range(n)]
    ins = [("in", k) for k in range(n)]
    t = net.contract(outs + ins)
    N = int(np.prod([X.dim for X in chain]))
    return t.reshape(N, N)


def check_chain(chain: list, cyclic: bool) -> None:
    for k in range(len(chain) - 1):
        if not chain[k].right.same_as(chain[k + 1].left):
            raise AlgebraMismatch(f"factor {k} right algebra differs from factor {k + 1} left algebra")
    if cyclic and not chain[-1].right.same_as(chain[0].left):
        raise AlgebraMismatch("cyclic chain: end algebras differ")


def multi_tensor_idempotent(chain: list, cyclic: bool = False) -> np.ndarray:
    check_chain(chain, cyclic)
    if not cyclic and len(chain) == 1:
        return el.identity(chain[0].dim, chain[0].field)
    return _insertion_network(chain, cyclic)


def _pair_apply(V, k: int, k2: int, R, L, cop) -> np.ndarray:
    """Insert Σ cop[p, q] (-.a_p on axis k) ⊗ (a_q.- on axis k2) into V.

    R[in, a, out] and L[a, in, out] are the actions; all other axes of V
    pass through unchanged.
    """
    if k == k2:
        T = np.tensordot(V, R, axes=([k], [0]))
        T = np.tensordot(T, cop, axes=([-2], [0]))
        T = np.tensordot(T, L, axes=([-1, -2], [0, 1]))
        return np.moveaxis(T, -1, k)
    T = np.tensordot(V, R, axes=([k], [0]))
    T = np.tensordot(T, cop, axes=([-2], [0]))
    pos = k2 if k2 < k else k2 - 1
    T = np.tensordot(T, L, axes=([pos, T.ndim - 1], [1, 0]))
    order = [i for i in range(V.ndim) if i not in (k, k2)] + [k, k2]
    return T.transpose(np.argsort(order))


def _pairs(n: int, cyclic: bool) -> list[int]:
    return list(range(n)) if cyclic else list(range(n - 1))


def apply_idempotent(chain: list, cyclic: bool, V, rows: bool = False, pairs=None) -> np.ndarray:
    """p·V for columns V (or V·p for rows), one adjacent insertion at a time.

    Never forms the full matrix of p, so long chains stay cheap when V has
    few columns.
    """
    n = len(chain)
    dims = [X.dim for X in chain]
    V = np.asarray(V, dtype=object)
    r = V.shape[0] if rows else V.shape[1]
    T = (V.T if rows else V).reshape(dims + [r])
    for k in (_pairs(n, cyclic) if pairs is None else pairs):
        k2 = (k + 1) % n
        X, Y = chain[k], chain[k2]
        cop = X.right.frobenius().copairing
        if rows:
            T = _pair_apply(T, k, k2, X.rho.transpose(2, 1, 0), Y.lam.transpose(0, 2, 1), cop)
        else:
            T = _pair_apply(T, k, k2, X.rho, Y.lam, cop)
    out = T.reshape(-1, r)
    return out.T.copy() if rows else out


def multi_tensor(chain: list, cyclic: bool = False) -> SubspaceSplitting:
    """Image of the combined idempotent, grown factor by factor.

    The image of the insertions among the first k+1 factors is p_k applied to
    (image for the first k factors) ⊗ X_{k+1}, since the insertions commute.
    The basis is the reduced echelon basis, the same one ``split_idempotent``
    would return for the full matrix.
    """
    check_chain(chain, cyclic)
    n = len(chain)
    f = chain[0].field
    if n == 1 and not cyclic:
        return el.split_idempotent(el.identity(chain[0].dim, f))
    basis = el.identity(chain[0].dim, f)
    for k in range(1, n):
        cols = el.kron(basis, el.identity(chain[k].dim, f))
        cols = apply_idempotent(chain[:k + 1], False, cols, pairs=[k - 1])
        basis = el.column_space(cols)
    if cyclic:
        basis = el.column_space(apply_idempotent(chain, True, basis, pairs=[n - 1]))
    N = basis.shape[0]
    if basis.shape[1] == 0:
        return SubspaceSplitting(el.zeros((N, 0), f), el.zeros((0, N), f))
    _, piv = el.rref(basis.T)
    sel = el.zeros((len(piv), N), f)
    for i, q in enumerate(piv):
        sel[i, q] = f(1)
    return SubspaceSplitting(basis, apply_idempotent(chain, cyclic, sel, rows=True))


def tensor_idempotent(M: Bimodule, N: Bimodule) -> np.ndarray:
    return multi_tensor_idempotent([M, N], cyclic=False)


def tensor_over(M: Bimodule, N: Bimodule) -> SubspaceSplitting:
    """M ⊗_A N as the image of p(m⊗n) = Σ (m.a_i')⊗(a_i.n) inside M⊗N."""
    return multi_tensor([M, N], cyclic=False)


def cyclic_tensor(X: Bimodule) -> SubspaceSplitting:
    return multi_tensor([X], cyclic=True)


def balancing_relations(chain: list, cyclic: bool = False) -> np.ndarray:
    """Columns spanning the image of l - r for every adjacent pair of the chain."""
    check_chain(chain, cyclic)
    n = len(chain)
    dims = [X.dim for X in chain]
    cols = []
    pairs = range(n) if cyclic else range(n - 1)
    for k in pairs:
        k2 = (k + 1) % n
        A = chain[k].right
        for i in range(A.dim):
            a = A.basis(i)
            R = chain[k].right_matrix(a)
            L = chain[k2].left_matrix(a)
            for idx in itertools.product(*[range(d) for d in dims]):
                v = el.zeros(dims, A.field)
                # x.a ⊗ y  -  x ⊗ a.y  (for the cyclic single-factor case: x.a - a.x)
                basis = [el.unit_vector(d, j, A.field) for d, j in zip(dims, idx)]
                left_side = list(basis)
                left_side[k] = np.dot(R, basis[k])
                right_side = list(basis)
                right_side[k2] = np.dot(L, basis[k2])
                v = _outer(left_side) - _outer(right_side)
                cols.append(v.reshape(-1))
    if not cols:
        return el.zeros((int(np.prod(dims)), 0), chain[0].field)
    return np.array(cols, dtype=object).T.copy()


def _outer(vectors):
    out = vectors[0]
    for v in vectors[1:]:
        out = np.multiply.outer(out, v)
    return out


def tensor_quotient(chain: list, cyclic: bool = False) -> SubspaceSplitting:
    """Tensor product over the intermediate algebras as a cokernel of l - r.

    Needs no Frobenius property; the complement basis is read off from the
    reduced echelon form of the relations.
    """
    rel = balancing_relations(chain, cyclic)
    return el.quotient_splitting(el.column_space(rel) if rel.shape[1] else rel, chain[0].field)


def induced_bimodule(M: Bimodule, N: Bimodule, split: SubspaceSplitting) -> Bimodule:
    """The (M.left, N.right)-bimodule structure on the subspace ``split`` of M⊗N."""
    A, C = M.left, N.right
    E, P = split.embed, split.project
    r = split.dim
    f = A.field
    lam = el.zeros((A.dim, r, r), f)
    for i in range(A.dim):
        op = el.kron(M.left_matrix(A.basis(i)), el.identity(N.dim, f))
        lam[i] = el.matmul(P, op, E).T
    rho = el.zeros((r, C.dim, r), f)
    for i in range(C.dim):
        op = el.kron(el.identity(M.dim, f), N.right_matrix(C.basis(i)))
        rho[:, i, :] = el.matmul(P, op, E).T
    return Bimodule(A, C, lam, rho, f"{M.name}⊗{N.name}")


def tensor_bimodule(M: Bimodule, N: Bimodule, frobenius: bool | None = None) -> tuple[Bimodule, SubspaceSplitting]:
    """M ⊗_A N as a bimodule, via p⊗ when A is Frobenius, else via the cokernel."""
    if frobenius is None:
        frobenius = M.right.is_frobenius()
    split = tensor_over(M, N) if frobenius else tensor_quotient([M, N])
    return induced_bimodule(M, N, split), split


# ---------------------------------------------------------------- intertwiners

def hom_space(X: Bimodule, Y: Bimodule) -> list[np.ndarray]:
    """Reduced echelon basis of Hom_{A|B}(X, Y), as dim Y × dim X matrices."""
    if not (X.left.same_as(Y.left) and X.right.same_as(Y.right)):
        raise AlgebraMismatch("hom_space needs bimodules over the same algebras")
    f = X.field
    Ix, Iy = el.identity(X.dim, f), el.identity(Y.dim, f)
    blocks = []
    for i in range(X.left.dim):
        a = X.left.basis(i)
        blocks.append(el.kron(Y.left_matrix(a), Ix) - el.kron(Iy, X.left_matrix(a).T))
    for i in range(X.right.dim):
        b = X.right.basis(i)
        blocks.append(el.kron(Y.right_matrix(b), Ix) - el.kron(Iy, X.right_matrix(b).T))
    K = el.kernel(np.vstack(blocks))
    return [K[:, j].reshape(Y.dim, X.dim).copy() for j in range(K.shape[1])]


@dataclass(frozen=True)
class PhiIso:
    """φ from the cyclic tensor of Y⊗X* onto Hom_{A|B}(X, Y), in coordinates."""

    splitting: SubspaceSplitting   # inside the ambient Y ⊗ X*
    hom_basis: list                # matrices dim Y × dim X
    matrix: np.ndarray             # hom coordinates of φ(splitting basis)

    def apply(self, gamma) -> np.ndarray:
        """φ on an ambient vector of Y⊗X*, as a dim Y × dim X matrix."""
        rows = self.hom_basis[0].shape[0] if self.hom_basis else 0
        return np.asarray(gamma, dtype=object).reshape(rows, -1)

    def inverse(self) -> np.ndarray:
        return el.inverse(self.matrix)


def phi_iso(Y: Bimodule, X: Bimodule) -> PhiIso:
    """Cyclic ⊗_A (Y ⊗_B X*) ≅ Hom_{A|B}(X, Y).

    The ambient element Σ c[y, x] u_y ⊗ u_x* acts as the linear map with
    matrix c, so φ is the restriction of a reshape.
    """
    split = multi_tensor([Y, X.dual], cyclic=True)
    hom = hom_space(X, Y)
    if split.dim != len(hom):
        raise ValueError(f"dimension mismatch: {split.dim} vs {len(hom)}")
    if not hom:
        return PhiIso(split, hom, el.zeros((0, 0), X.field))
    H = np.array([h.reshape(-1) for h in hom], dtype=object).T
    coords = el.solve(H, split.embed)
    if coords is None:
        raise ValueError("image of p⊗ is not contained in the intertwiners")
    return PhiIso(split, hom, coords)


def hom_coordinates(basis: list, F) -> np.ndarray | None:
    if not basis:
        return el.zeros(0, el.field_of(F))
    H = np.array([h.reshape(-1) for h in basis], dtype=object).T
    return el.solve(H, np.asarray(F, dtype=object).reshape(-1))


# ---------------------------------------------------------------- isomorphism search

GRID_LIMIT = 4096


@dataclass(frozen=True)
class IsoVerdict:
    verdict: str            # "yes", "no" or "undecided"
    witness: np.ndarray | None = None
    reason: str = ""


def _generic_coefficients(k: int):
    primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53]
    yield [1] * k
    yield [i + 1 for i in range(k)]
    yield [primes[i % len(primes)] ** (1 + i // len(primes)) for i in range(k)]
    yield [(-1) ** i * (i + 2) for i in range(k)]
    yield [2 ** i for i in range(k)]


def find_isomorphism(X: Bimodule, Y: Bimodule, grid_limit: int = GRID_LIMIT) -> IsoVerdict:
    """Search Hom(X, Y) for an invertible element.

    det(Σ c_i h_i) is a polynomial of degree n = dim X in the coefficients.
    If it vanishes on the whole grid {0..n}^k it is the zero polynomial, so
    an exhausted grid proves that no isomorphism exists (provided the field
    has more than n elements).
    """
    if X.dim != Y.dim:
        return IsoVerdict("no", reason="dimensions differ")
    hom = hom_space(X, Y)
    if not hom:
        return IsoVerdict("no", reason="no non-zero intertwiners")
    f = X.field

    def combo(cs):
        out = el.zeros((Y.dim, X.dim), f)
        for c, h in zip(cs, hom):
            if c:
                out = out + f(c) * h
        return out

    for cs in _generic_coefficients(len(hom)):
        F = combo(cs)
        if el.is_invertible(F):
            return IsoVerdict("yes", F, "generic combination")
    n, k = X.dim, len(hom)
    char = getattr(f, "characteristic", 0)
    if (n + 1) ** k <= grid_limit and (char == 0 or char > n):
        for cs in itertools.product(range(n + 1), repeat=k):
            F = combo(cs)
            if el.is_invertible(F):
                return IsoVerdict("yes", F, "grid search")
        return IsoVerdict("no", reason="determinant vanishes identically on Hom")
    return IsoVerdict("undecided", reason=f"no invertible element found in a {k}-dim Hom")
