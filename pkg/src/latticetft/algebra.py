"""Finite-dimensional associative unital algebras given by structure constants.

``mult[i, j, k]`` is the coefficient of ``a_k`` in ``a_i a_j``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import exactlin as el
from .exactlin import QQ, SubspaceSplitting


class NotFrobenius(ValueError):
    def __init__(self, rank, dim):
        super().__init__(f"trace pairing is degenerate: rank {rank} < dim {dim}")
        self.rank = rank
        self.dim = dim


class InvalidAlgebra(ValueError):
    pass


class NotUnital(ValueError):
    pass


class NotMultiplicative(ValueError):
    def __init__(self, i, j):
        super().__init__(f"f(a_{i} a_{j}) != f(a_{i}) f(a_{j})")
        self.witness = (i, j)


@dataclass(frozen=True)
class FrobeniusData:
    counit: np.ndarray      # ε(a_i)
    pairing: np.ndarray     # G[i, j] = ε(a_i a_j)
    dual_basis: np.ndarray  # row i holds the coordinates of a_i'
    copairing: np.ndarray   # β(1) = Σ copairing[k, l] a_k ⊗ a_l


class Algebra:
    def __init__(self, mult, unit, name: str = ""):
        self.mult = np.asarray(mult, dtype=object)
        self.unit = np.asarray(unit, dtype=object)
        n = self.mult.shape[0]
        if self.mult.shape != (n, n, n) or self.unit.shape != (n,) or n == 0:
            raise InvalidAlgebra("structure constants must be n×n×n with a length-n unit")
        self.name = name

    def __repr__(self):
        return f"Algebra({self.name or '?'}, dim={self.dim})"

    @property
    def dim(self) -> int:
        return self.mult.shape[0]

    @cached_property
    def field(self):
        return el.field_of(self.mult)

    def same_as(self, other: "Algebra") -> bool:
        return self is other or (self.dim == other.dim and el.equal(self.mult, other.mult)
                                 and el.equal(self.unit, other.unit))

    # -- elements
    def basis(self, i: int) -> np.ndarray:
        return el.unit_vector(self.dim, i, self.field)

    def one(self) -> np.ndarray:
        return self.unit.copy()

    def mul(self, x, y) -> np.ndarray:
        return np.tensordot(np.tensordot(x, self.mult, axes=(0, 0)), y, axes=(0, 0))

    def left_matrix(self, x) -> np.ndarray:
        """Matrix of L_x : y ↦ x y (columns indexed by the input)."""
        return np.tensordot(x, self.mult, axes=(0, 0)).T.copy()

    def right_matrix(self, x) -> np.ndarray:
        return np.tensordot(x, self.mult, axes=(0, 1)).T.copy()

    # -- validity
    def violations(self) -> list[str]:
        out = []
        c = self.mult
        lhs = np.tensordot(c, c, axes=(2, 0))          # (a_i a_j) a_k -> [i,j,k,l]
        rhs = np.tensordot(c, c, axes=([2], [1]))      # a_i (a_j a_k) as [j,k,i,l]
        rhs = rhs.transpose(2, 0, 1, 3)
        if not el.equal(lhs, rhs):
            bad = next(idx for idx in np.ndindex(lhs.shape) if lhs[idx] != rhs[idx])
            out.append(f"not associative at basis triple {bad[:3]}")
        one = self.unit
        eye = el.identity(self.dim, self.field)
        if not el.equal(self.left_matrix(one), eye):
            out.append("unit is not a left unit")
        if not el.equal(self.right_matrix(one), eye):
            out.append("unit is not a right unit")
        return out

    def check(self) -> "Algebra":
        bad = self.violations()
        if bad:
            raise InvalidAlgebra("; ".join(bad))
        return self

    def is_commutative(self) -> bool:
        return el.equal(self.mult, self.mult.transpose(1, 0, 2))

    # -- trace pairing
    @cached_property
    def counit(self) -> np.ndarray:
        return np.array([sum(self.mult[i, j, j] for j in range(self.dim)) for i in range(self.dim)],
                        dtype=object)

    def right_trace(self) -> np.ndarray:
        return np.array([sum(self.mult[j, i, j] for j in range(self.dim)) for i in range(self.dim)],
                        dtype=object)

    @cached_property
    def gram(self) -> np.ndarray:
        return np.tensordot(self.mult, self.counit, axes=(2, 0))

    @cached_property
    def _frobenius(self):
        try:
            inv = el.inverse(self.gram)
        except el.Singular:
            return NotFrobenius(el.rank(self.gram), self.dim)
        # a_j' = Σ_k inv[k, j] a_k, so ε(a_i a_j') = (G inv)[i, j] = δ
        return FrobeniusData(self.counit, self.gram, inv.T.copy(), inv)

    def frobenius(self) -> FrobeniusData:
        fd = self._frobenius
        if isinstance(fd, NotFrobenius):
            raise fd
        return fd

    def is_frobenius(self) -> bool:
        return not isinstance(self._frobenius, NotFrobenius)

    # -- centre and commutators
    def commutator_matrix(self) -> np.ndarray:
        """Rows index (j, k), columns i: coefficient of a_k in [a_i, a_j]."""
        d = self.mult - self.mult.transpose(1, 0, 2)
        return d.transpose(1, 2, 0).reshape(self.dim * self.dim, self.dim)

    @cached_property
    def _centre(self) -> SubspaceSplitting:
        basis = el.kernel(self.commutator_matrix())
        return subspace_splitting(basis)

    def centre(self) -> SubspaceSplitting:
        return self._centre

    def commutator_span(self) -> np.ndarray:
        """Basis (columns) of span{a_i a_j - a_j a_i}."""
        d = self.mult - self.mult.transpose(1, 0, 2)
        return el.column_space(d.reshape(self.dim * self.dim, self.dim).T)

    def commutator_quotient(self) -> tuple[int, np.ndarray]:
        """dim A/[A,A] and a basis (columns) of a complement of [A,A]."""
        q = el.quotient_splitting(self.commutator_span())
        return q.dim, q.embed

    def centre_projector(self, fd: FrobeniusData | None = None) -> np.ndarray:
        """Matrix of x ↦ Σ a_i x a_i'."""
        fd = fd or self.frobenius()
        n = self.dim
        out = el.zeros((n, n), self.field)
        for i in range(n):
            out = out + el.matmul(self.left_matrix(self.basis(i)), self.right_matrix(fd.dual_basis[i]))
        return out

    # -- constructions
    def opposite(self) -> "Algebra":
        return Algebra(self.mult.transpose(1, 0, 2).copy(), self.unit, f"{self.name}^op")

    def subalgebra(self, embed) -> "Algebra":
        """Algebra structure on the column span of ``embed`` (must be closed)."""
        embed = np.asarray(embed, dtype=object)
        r = embed.shape[1]
        mult = el.zeros((r, r, r), self.field)
        for i in range(r):
            for j in range(r):
                prod = self.mul(embed[:, i], embed[:, j])
                coords = el.solve(embed, prod)
                if coords is None:
                    raise InvalidAlgebra("subspace is not closed under multiplication")
                mult[i, j] = coords
        unit = el.solve(embed, self.unit)
        if unit is None:
            raise InvalidAlgebra("subspace does not contain the unit")
        return Algebra(mult, unit, f"sub({self.name})")


def subspace_splitting(basis) -> SubspaceSplitting:
    """Splitting for a column basis in reduced echelon form (or any basis)."""
    basis = np.asarray(basis, dtype=object)
    n, r = basis.shape
    field = el.field_of(basis)
    if r == 0:
        return SubspaceSplitting(el.zeros((n, 0), field), el.zeros((0, n), field))
    basis = el.column_space(basis)
    _, pivots = el.rref(basis.T)
    proj = el.zeros((r, n), field)
    for i, p in enumerate(pivots):
        proj[i, p] = field(1)
    return SubspaceSplitting(basis, proj)


@dataclass(frozen=True, eq=False)
class AlgebraMap:
    source: Algebra
    target: Algebra
    matrix: np.ndarray

    def __call__(self, x) -> np.ndarray:
        return np.dot(self.matrix, x)

    def violations(self) -> list:
        """Failures as exception instances; first one is what check() raises."""
        f = self.matrix
        if f.shape != (self.target.dim, self.source.dim):
            return [ValueError(f"map has shape {f.shape}, expected "
                               f"{(self.target.dim, self.source.dim)}")]
        out = []
        if not el.equal(np.dot(f, self.source.unit), self.target.unit):
            out.append(NotUnital("f(1) != 1"))
        for i in range(self.source.dim):
            for j in range(self.source.dim):
                lhs = np.dot(f, self.source.mult[i, j])
                rhs = self.target.mul(f[:, i], f[:, j])
                if not el.equal(lhs, rhs):
                    out.append(NotMultiplicative(i, j))
                    return out
        return out

    def check(self) -> "AlgebraMap":
        bad = self.violations()
        if bad:
            raise bad[0]
        return self

    def compose(self, first: "AlgebraMap") -> "AlgebraMap":
        """self ∘ first."""
        return AlgebraMap(first.source, self.target, np.dot(self.matrix, first.matrix))

    def is_invertible(self) -> bool:
        return el.is_invertible(self.matrix)

    def inverse(self) -> "AlgebraMap":
        return AlgebraMap(self.target, self.source, el.inverse(self.matrix))


def check_algebra_map(f: AlgebraMap) -> AlgebraMap:
    return f.check()


def identity_map(A: Algebra) -> AlgebraMap:
    return AlgebraMap(A, A, el.identity(A.dim, A.field))


def trace_counit(A: Algebra) -> np.ndarray:
    return A.counit


def frobenius_data(A: Algebra) -> FrobeniusData:
    return A.frobenius()


def centre(A: Algebra) -> SubspaceSplitting:
    return A.centre()


def commutator_quotient(A: Algebra) -> tuple[int, np.ndarray]:
    return A.commutator_quotient()


def centre_projector(A: Algebra, fd: FrobeniusData | None = None) -> np.ndarray:
    return A.centre_projector(fd)


def centre_algebra(A: Algebra) -> Algebra:
    z = A.subalgebra(A.centre().embed)
    z.name = f"Z({A.name})"
    return z


# ---------------------------------------------------------------- builders

def _from_table(n, table, unit, name, field):
    mult = el.zeros((n, n, n), field)
    for (i, j), k in table.items():
        mult[i, j, k] = field(1)
    return Algebra(mult, el.array(unit, field), name)


def ground_field(field=QQ) -> Algebra:
    return Algebra(el.array([[[1]]], field), el.array([1], field), "k")


def matrix_algebra(n: int, field=QQ) -> Algebra:
    """M_n with basis E_ij in row-major order."""
    idx = lambda i, j: i * n + j
    table = {(idx(i, j), idx(j, l)): idx(i, l)
             for i in range(n) for j in range(n) for l in range(n)}
    unit = [1 if i == j else 0 for i in range(n) for j in range(n)]
    return _from_table(n * n, table, unit, f"M{n}", field)


def group_algebra(elements, product, name="k[G]", field=QQ) -> Algebra:
    elements = list(elements)
    index = {g: i for i, g in enumerate(elements)}
    table = {(index[g], index[h]): index[product(g, h)] for g in elements for h in elements}
    e = next(g for g in elements if all(product(g, h) == h for h in elements))
    unit = [1 if g == e else 0 for g in elements]
    return _from_table(len(elements), table, unit, name, field)


def cyclic_group_algebra(n: int, field=QQ) -> Algebra:
    return group_algebra(range(n), lambda a, b: (a + b) % n, f"k[Z/{n}]", field)


def symmetric_group_algebra(n: int = 3, field=QQ) -> Algebra:
    perms = sorted(itertools.permutations(range(n)))
    return group_algebra(perms, lambda p, q: tuple(p[q[i]] for i in range(n)), f"k[S{n}]", field)


def direct_sum(*algs: Algebra) -> Algebra:
    field = algs[0].field
    n = sum(a.dim for a in algs)
    mult = el.zeros((n, n, n), field)
    unit = el.zeros(n, field)
    off = 0
    for a in algs:
        d = a.dim
        mult[off:off + d, off:off + d, off:off + d] = a.mult
        unit[off:off + d] = a.unit
        off += d
    return Algebra(mult, unit, "+".join(a.name or "?" for a in algs))


def diagonal_algebra(n: int, field=QQ) -> Algebra:
    """k ⊕ ... ⊕ k (n copies)."""
    return direct_sum(*[ground_field(field)] * n)


def upper_triangular(field=QQ) -> Algebra:
    """T_2 with basis E11, E12, E22."""
    e11, e12, e22 = 0, 1, 2
    table = {(e11, e11): e11, (e11, e12): e12, (e12, e22): e12, (e22, e22): e22}
    return _from_table(3, table, [1, 0, 1], "T2", field)


def tensor_product(A: Algebra, B: Algebra) -> Algebra:
    mult = np.einsum("ijk,abc->iajbkc", A.mult, B.mult).reshape(A.dim * B.dim, A.dim * B.dim,
                                                                 A.dim * B.dim)
    unit = np.multiply.outer(A.unit, B.unit).reshape(-1)
    return Algebra(mult, unit, f"{A.name}⊗{B.name}")


def change_basis(A: Algebra, P) -> Algebra:
    """Same algebra in the basis b_j = Σ_i P[i, j] a_i."""
    P = np.asarray(P, dtype=object)
    Pinv = el.inverse(P)
    mult = np.einsum("ia,jb,ijk,ck->abc", P, P, A.mult, Pinv)
    return Algebra(mult, np.dot(Pinv, A.unit), f"{A.name}'")


def standard_library(field=QQ) -> dict[str, Algebra]:
    """The algebras used throughout the tests and demos."""
    return {
        "k": ground_field(field),
        "M2": matrix_algebra(2, field),
        "M3": matrix_algebra(3, field),
        "Z2": cyclic_group_algebra(2, field),
        "Z3": cyclic_group_algebra(3, field),
        "S3": symmetric_group_algebra(3, field),
        "kk": diagonal_algebra(2, field),
        "T2": upper_triangular(field),
    }
