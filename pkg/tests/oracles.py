"""Brute-force reference computations.

Everything here goes through sympy matrices built straight from structure
constants, so none of it shares code with the package's elimination routines.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import sympy as sp


def Q(x) -> sp.Rational:
    return sp.Rational(str(x))


def mat(a) -> sp.Matrix:
    import numpy as np
    a = np.asarray(a, dtype=object)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    return sp.Matrix(a.shape[0], a.shape[1], [Q(x) for x in a.flat])


def mult_table(A):
    n = A.dim
    return [[[Q(A.mult[i, j, k]) for k in range(n)] for j in range(n)] for i in range(n)]


def product(m, x, y):
    n = len(x)
    out = [sp.Integer(0)] * n
    for i in range(n):
        if x[i] == 0:
            continue
        for j in range(n):
            if y[j] == 0:
                continue
            c = x[i] * y[j]
            for k in range(n):
                out[k] += c * m[i][j][k]
    return out


def basis(n, i):
    return [sp.Integer(1 if k == i else 0) for k in range(n)]


def left_mult(m, x) -> sp.Matrix:
    n = len(x)
    return sp.Matrix([product(m, x, basis(n, j)) for j in range(n)]).T


def right_mult(m, x) -> sp.Matrix:
    n = len(x)
    return sp.Matrix([product(m, basis(n, j), x) for j in range(n)]).T


def centre_dim(A) -> int:
    """Solve z·a_j = a_j·z for all j by stacking the commutator blocks."""
    m = mult_table(A)
    n = A.dim
    rows = sp.Matrix.vstack(*[left_mult(m, basis(n, j)) - right_mult(m, basis(n, j)) for j in range(n)])
    # (L_{a_j} - R_{a_j}) z = a_j z - z a_j
    return n - rows.rank()


def commutator_quotient_dim(A) -> int:
    m = mult_table(A)
    n = A.dim
    vecs = []
    for i, j in itertools.product(range(n), repeat=2):
        vecs.append([p - q for p, q in zip(product(m, basis(n, i), basis(n, j)), product(m, basis(n, j), basis(n, i)))])
    return n - sp.Matrix(vecs).rank()


def trace_left(A, x) -> sp.Rational:
    return left_mult(mult_table(A), [Q(v) for v in x]).trace()


def trace_right(A, x) -> sp.Rational:
    return right_mult(mult_table(A), [Q(v) for v in x]).trace()


def trace_form_rank(A) -> int:
    m = mult_table(A)
    n = A.dim
    G = sp.zeros(n, n)
    for i, j in itertools.product(range(n), repeat=2):
        G[i, j] = left_mult(m, product(m, basis(n, i), basis(n, j))).trace()
    return G.rank()


def is_frobenius(A) -> bool:
    return trace_form_rank(A) == A.dim


# ---------------------------------------------------------------- bimodules

def _action_mats(X):
    lam = [mat([[X.lam[a, i, j] for i in range(X.dim)] for j in range(X.dim)]) for a in range(X.left.dim)]
    rho = [mat([[X.rho[i, b, j] for i in range(X.dim)] for j in range(X.dim)]) for b in range(X.right.dim)]
    return lam, rho


def tensor_over_dim(M, N) -> int:
    """dim M ⊗_B N as the cokernel of (m.b)⊗n - m⊗(b.n) inside M ⊗ N."""
    _, rM = _action_mats(M)
    lN, _ = _action_mats(N)
    m, n = M.dim, N.dim
    rels = []
    for b in range(M.right.dim):
        R = sp.kronecker_product(rM[b], sp.eye(n)) - sp.kronecker_product(sp.eye(m), lN[b])
        rels.append(R)
    big = sp.Matrix.hstack(*rels)
    return m * n - big.rank()


def cyclic_tensor_dim(X) -> int:
    """dim of X/[A, X]: the span of a.x - x.a is the relation space."""
    lX, rX = _action_mats(X)
    cols = [lX[a] - rX[a] for a in range(X.left.dim)]
    return X.dim - sp.Matrix.hstack(*cols).rank()


def hom_dim(X, Y) -> int:
    """dim of bimodule maps X -> Y, solving F λ_X = λ_Y F and F ρ_X = ρ_Y F."""
    lX, rX = _action_mats(X)
    lY, rY = _action_mats(Y)
    p, q = Y.dim, X.dim
    eqs = []
    # vec(F L) = (L^T ⊗ I) vec F, vec(L F) = (I ⊗ L) vec F in column-major vec
    for LX, LY in list(zip(lX, lY)) + list(zip(rX, rY)):
        eqs.append(sp.kronecker_product(LX.T, sp.eye(p)) - sp.kronecker_product(sp.eye(q), LY))
    return p * q - sp.Matrix.vstack(*eqs).rank()


def centraliser_dim(f) -> int:
    """dim {b in B : f(a) b = b f(a) for all a}."""
    B = f.target
    m = mult_table(B)
    blocks = []
    for i in range(f.source.dim):
        x = [Q(v) for v in f.matrix[:, i]]
        blocks.append(left_mult(m, x) - right_mult(m, x))
    return B.dim - sp.Matrix.vstack(*blocks).rank()


# ---------------------------------------------------------------- one dimension

def chain_product(th, start, points):
    """Left-to-right product with Fractions, no numpy."""
    n = th.dims[start]
    M = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for x, s in points:
        w = th.walls[x]
        L = w.plus if s > 0 else w.minus
        L = [[Fraction(str(v)) for v in row] for row in L]
        M = [[sum(L[i][k] * M[k][j] for k in range(len(M))) for j in range(len(M[0]))] for i in range(len(L))]
    return M


def circle_trace(th, points) -> Fraction:
    x, s = points[0]
    w = th.walls[x]
    start = w.source if s > 0 else w.target
    M = chain_product(th, start, points)
    return sum(M[i][i] for i in range(len(M)))
