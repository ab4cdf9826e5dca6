"""Exact linear algebra over Q (and optionally Z/p).

Matrices are numpy object arrays whose entries are exact field elements.
Over Q the entries are ``gmpy2.mpq``; over Z/p they are :class:`Mod`.
Every routine infers the field from the entries it is given, so callers
rarely need to pass a field around.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Sequence

import numpy as np
from gmpy2 import mpq, mpz


class NotIdempotent(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class DuplicateLegPairing(ValueError):
    pass


class Singular(ValueError):
    pass


# ---------------------------------------------------------------- fields

class Rationals:
    name = "q"
    characteristic = 0

    def __call__(self, x):
        if isinstance(x, Mod):
            raise TypeError("cannot coerce a Z/p element into Q")
        if isinstance(x, str):
            return mpq(x.strip())
        return mpq(x)

    def parse(self, text: str):
        return mpq(text.strip())

    def format(self, x) -> str:
        x = mpq(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"

    def __eq__(self, other):
        return isinstance(other, Rationals)

    def __hash__(self):
        return hash("q")

    def __repr__(self):
        return "QQ"


class Mod:
    """Element of Z/p."""

    __slots__ = ("v", "p")

    def __init__(self, v, p):
        self.p = p
        self.v = int(v) % p

    def _coerce(self, other):
        if isinstance(other, Mod):
            if other.p != self.p:
                raise TypeError("mixed characteristics")
            return other.v
        if isinstance(other, (int, np.integer)) or type(other).__name__ == "mpz":
            return int(other)
        return NotImplemented

    def __add__(self, o):
        w = self._coerce(o)
        return NotImplemented if w is NotImplemented else Mod(self.v + w, self.p)

    __radd__ = __add__

    def __sub__(self, o):
        w = self._coerce(o)
        return NotImplemented if w is NotImplemented else Mod(self.v - w, self.p)

    def __rsub__(self, o):
        w = self._coerce(o)
        return NotImplemented if w is NotImplemented else Mod(w - self.v, self.p)

    def __mul__(self, o):
        w = self._coerce(o)
        return NotImplemented if w is NotImplemented else Mod(self.v * w, self.p)

    __rmul__ = __mul__

    def __truediv__(self, o):
        w = self._coerce(o)
        if w is NotImplemented:
            return w
        if w % self.p == 0:
            raise ZeroDivisionError("division by zero in Z/p")
        return Mod(self.v * pow(w, -1, self.p), self.p)

    def __rtruediv__(self, o):
        w = self._coerce(o)
        if w is NotImplemented:
            return w
        return Mod(w, self.p) / self

    def __neg__(self):
        return Mod(-self.v, self.p)

    def __pos__(self):
        return self

    def __eq__(self, o):
        w = self._coerce(o)
        if w is NotImplemented:
            return False
        return (self.v - w) % self.p == 0

    def __ne__(self, o):
        return not self == o

    def __hash__(self):
        return hash((self.v, self.p))

    def __bool__(self):
        return self.v != 0

    @property
    def numerator(self):
        return self.v

    @property
    def denominator(self):
        return 1

    def __repr__(self):
        return f"{self.v} mod {self.p}"

    def __str__(self):
        return str(self.v)


class PrimeField:
    characteristic: int

    def __init__(self, p: int):
        if p < 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
            raise ValueError(f"{p} is not prime")
        self.characteristic = p
        self.name = f"fp:{p}"

    def __call__(self, x):
        if isinstance(x, Mod):
            if x.p != self.characteristic:
                raise TypeError("mixed characteristics")
            return x
        if isinstance(x, str):
            x = mpq(x.strip())
        if type(x).__name__ == "mpq" or hasattr(x, "denominator"):
            q = mpq(x)
            return Mod(int(q.numerator), self.characteristic) / Mod(int(q.denominator), self.characteristic)
        return Mod(int(x), self.characteristic)

    def parse(self, text: str):
        return self(text)

    def format(self, x) -> str:
        return str(self(x).v)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.characteristic == self.characteristic

    def __hash__(self):
        return hash(("fp", self.characteristic))

    def __repr__(self):
        return f"GF({self.characteristic})"


QQ = Rationals()


def field_from_spec(spec: str):
    """``"q"`` or ``"fp:<p>"``."""
    spec = spec.strip().lower()
    if spec in ("q", "qq", "rationals"):
        return QQ
    if spec.startswith("fp:"):
        return PrimeField(int(spec[3:]))
    raise ValueError(f"unknown field {spec!r}")


def field_of(*arrays):
    """Field of the first entry found in ``arrays`` (Q if all are empty)."""
    for a in arrays:
        a = np.asarray(a, dtype=object)
        if a.size:
            x = a.flat[0]
            if isinstance(x, Mod):
                return PrimeField(x.p)
            return QQ
    return QQ


# ---------------------------------------------------------------- arrays

def array(data, field=QQ) -> np.ndarray:
    """Exact object array built from nested sequences of numbers or strings."""
    a = np.array(data, dtype=object)
    out = np.empty(a.shape, dtype=object)
    for idx, x in np.ndenumerate(a):
        out[idx] = field(x)
    return out


def zeros(shape, field=QQ) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(field(0))
    # fill shares one object; exact scalars are immutable so this is safe
    return out


def identity(n: int, field=QQ) -> np.ndarray:
    out = zeros((n, n), field)
    for i in range(n):
        out[i, i] = field(1)
    return out


def unit_vector(n: int, i: int, field=QQ) -> np.ndarray:
    v = zeros(n, field)
    v[i] = field(1)
    return v


def is_zero(a) -> bool:
    a = np.asarray(a, dtype=object)
    return all(x == 0 for x in a.flat)


def equal(a, b) -> bool:
    a = np.asarray(a, dtype=object)
    b = np.asarray(b, dtype=object)
    return a.shape == b.shape and all(x == y for x, y in zip(a.flat, b.flat))


def matmul(*ms):
    out = ms[0]
    for m in ms[1:]:
        out = np.dot(out, m)
    return out


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=object), np.asarray(b, dtype=object))


def to_strings(a, field=None):
    field = field or field_of(a)
    a = np.asarray(a, dtype=object)
    return np.vectorize(field.format, otypes=[object])(a).tolist() if a.size else a.tolist()


# ---------------------------------------------------------------- elimination

def rref(m) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns."""
    a = np.array(m, dtype=object, copy=True)
    if a.ndim != 2:
        raise DimensionMismatch("rref expects a matrix")
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        col = a[r:, c]
        nz = [i for i, x in enumerate(col) if x != 0]
        if not nz:
            continue
        i = nz[0] + r
        if i != r:
            a[[r, i]] = a[[i, r]]
        a[r] = a[r] / a[r, c]
        col = a[:, c].copy()
        col[r] = 0
        others = [i for i, x in enumerate(col) if x != 0]
        if others:
            a[others] = a[others] - np.outer(col[others], a[r])
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m) -> int:
    m = np.asarray(m, dtype=object)
    if m.size == 0:
        return 0
    return len(rref(m)[1])


def kernel(m) -> np.ndarray:
    """Null-space basis as columns, in reduced echelon form."""
    m = np.asarray(m, dtype=object)
    rows, cols = m.shape
    field = field_of(m)
    if rows == 0:
        return identity(cols, field)
    r, pivots = rref(m)
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = zeros((len(free), cols), field)
    for k, f in enumerate(free):
        basis[k, f] = field(1)
        for i, p in enumerate(pivots):
            basis[k, p] = -r[i, f]
    if not free:
        return zeros((cols, 0), field)
    b, _ = rref(basis)
    return b.T.copy()


def row_space(m) -> np.ndarray:
    """Reduced echelon basis (rows) of the row space."""
    m = np.asarray(m, dtype=object)
    if m.size == 0:
        return zeros((0, m.shape[1] if m.ndim == 2 else 0), field_of(m))
    r, pivots = rref(m)
    return r[: len(pivots)].copy()


def column_space(m) -> np.ndarray:
    """Reduced echelon basis of the column space, as columns."""
    m = np.asarray(m, dtype=object)
    return row_space(m.T).T.copy()


def inverse(m) -> np.ndarray:
    m = np.asarray(m, dtype=object)
    n, k = m.shape
    if n != k:
        raise DimensionMismatch("inverse of a non-square matrix")
    field = field_of(m)
    r, pivots = rref(np.hstack([m, identity(n, field)]))
    if pivots[:n] != list(range(n)):
        raise Singular("matrix is singular")
    return r[:, n:].copy()


def is_invertible(m) -> bool:
    m = np.asarray(m, dtype=object)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and rank(m) == m.shape[0]


def solve(a, b):
    """One solution x of a·x = b (b a vector or matrix), or None."""
    a = np.asarray(a, dtype=object)
    b = np.asarray(b, dtype=object)
    vec = b.ndim == 1
    if vec:
        b = b.reshape(-1, 1)
    rows, cols = a.shape
    field = field_of(a, b)
    r, pivots = rref(np.hstack([a, b]))
    if any(p >= cols for p in pivots):
        return None
    x = zeros((cols, b.shape[1]), field)
    for i, p in enumerate(pivots):
        x[p] = r[i, cols:]
    return x[:, 0].copy() if vec else x


def same_subspace(a, b) -> bool:
    """Do the column spans of ``a`` and ``b`` coincide?"""
    a = np.asarray(a, dtype=object)
    b = np.asarray(b, dtype=object)
    if a.shape[1] == 0 or b.shape[1] == 0:
        return rank(a) == 0 and rank(b) == 0
    return equal(column_space(a), column_space(b))


# ---------------------------------------------------------------- splittings

@dataclass(frozen=True)
class SubspaceSplitting:
    """A subspace of an ambient space with chosen embedding and projection."""

    embed: np.ndarray
    project: np.ndarray

    @property
    def ambient_dim(self) -> int:
        return self.embed.shape[0]

    @property
    def dim(self) -> int:
        return self.embed.shape[1]

    def idempotent(self) -> np.ndarray:
        return np.dot(self.embed, self.project)

    def check(self) -> bool:
        field = field_of(self.embed, self.project)
        return equal(np.dot(self.project, self.embed), identity(self.dim, field))


def split_idempotent(p) -> SubspaceSplitting:
    p = np.asarray(p, dtype=object)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise DimensionMismatch("idempotent must be square")
    if not equal(np.dot(p, p), p):
        raise NotIdempotent("p·p != p")
    n = p.shape[0]
    field = field_of(p)
    rows, pivots = rref(p.T)
    basis = rows[: len(pivots)]
    embed = basis.T.copy() if pivots else zeros((n, 0), field)
    # embed restricted to pivot rows is the identity, so p = embed · p[pivots]
    project = p[pivots, :].copy() if pivots else zeros((0, n), field)
    return SubspaceSplitting(embed, project)


def quotient_splitting(relations, field=None) -> SubspaceSplitting:
    """Splitting of ambient / span(columns of ``relations``).

    The complement is spanned by the non-pivot standard basis vectors of the
    reduced echelon form of the relations; ``project`` reduces a vector modulo
    the relations and reads off those coordinates.
    """
    relations = np.asarray(relations, dtype=object)
    n = relations.shape[0]
    field = field or field_of(relations)
    if relations.shape[1] == 0:
        return SubspaceSplitting(identity(n, field), identity(n, field))
    r, pivots = rref(relations.T)
    r = r[: len(pivots)]
    keep = [c for c in range(n) if c not in set(pivots)]
    embed = zeros((n, len(keep)), field)
    for j, c in enumerate(keep):
        embed[c, j] = field(1)
    project = zeros((len(keep), n), field)
    for j, c in enumerate(keep):
        project[j, c] = field(1)
    for i, p in enumerate(pivots):
        # e_p ≡ e_p - row_i  (mod relations), which only involves kept coordinates
        for j, c in enumerate(keep):
            if r[i, c] != 0:
                project[j, p] = -r[i, c]
    return SubspaceSplitting(embed, project)


# ---------------------------------------------------------------- tensors

@dataclass
class Tensor:
    """Dense exact tensor with named legs, in row-major leg order."""

    legs: tuple
    data: np.ndarray

    def __post_init__(self):
        self.legs = tuple(self.legs)
        self.data = np.asarray(self.data, dtype=object)
        if len(set(self.legs)) != len(self.legs):
            raise ValueError(f"duplicate leg names {self.legs}")
        if self.data.ndim != len(self.legs):
            raise DimensionMismatch(f"{len(self.legs)} legs for a rank-{self.data.ndim} array")

    @property
    def dims(self) -> tuple:
        return self.data.shape

    def dim(self, leg) -> int:
        return self.data.shape[self.legs.index(leg)]

    def transpose(self, order: Sequence) -> "Tensor":
        perm = [self.legs.index(l) for l in order]
        return Tensor(tuple(order), np.transpose(self.data, perm))

    def rename(self, mapping: dict) -> "Tensor":
        return Tensor(tuple(mapping.get(l, l) for l in self.legs), self.data)

    def matrix(self, rows: Sequence, cols: Sequence) -> np.ndarray:
        t = self.transpose(list(rows) + list(cols)).data
        r = int(np.prod([self.dim(l) for l in rows], dtype=int)) if rows else 1
        c = int(np.prod([self.dim(l) for l in cols], dtype=int)) if cols else 1
        return t.reshape(r, c)


@dataclass
class ContractionStats:
    tensors: int = 0
    contractions: int = 0
    max_intermediate: int = 0

    def as_dict(self):
        return {"tensors": self.tensors, "contractions": self.contractions,
                "max_intermediate": self.max_intermediate}


def _trace_pair(t: Tensor, a, b) -> Tensor:
    i, j = t.legs.index(a), t.legs.index(b)
    data = np.trace(t.data, axis1=i, axis2=j) if t.data.size else np.sum(
        np.diagonal(t.data, axis1=i, axis2=j), axis=-1)
    legs = tuple(l for l in t.legs if l not in (a, b))
    data = np.asarray(data, dtype=object)
    if data.ndim == 0:
        data = data.reshape(())
    return Tensor(legs, data)


def _size(dims) -> int:
    out = 1
    for d in dims:
        out *= d
    return out


def contract(network: Sequence[Tensor], pairs: Iterable[tuple], open_order: Sequence | None = None,
             stats: ContractionStats | None = None) -> Tensor:
    """Contract ``network`` along ``pairs`` of leg names.

    Leg names must be unique across the whole network. Unpaired legs stay
    open; the result lists them in ``open_order`` if given, otherwise in
    order of appearance. The contraction order is chosen greedily, always
    merging the pair of tensors whose result is smallest.
    """
    network = [t for t in network]
    stats = stats if stats is not None else ContractionStats()
    stats.tensors += len(network)
    owner = {}
    for k, t in enumerate(network):
        for leg in t.legs:
            if leg in owner:
                raise ValueError(f"leg {leg!r} appears in two tensors")
            owner[leg] = k
    partner = {}
    for a, b in pairs:
        for leg in (a, b):
            if leg not in owner:
                raise KeyError(f"unknown leg {leg!r}")
            if leg in partner:
                raise DuplicateLegPairing(f"leg {leg!r} paired twice")
        if a == b:
            raise DuplicateLegPairing(f"leg {a!r} paired with itself")
        da = network[owner[a]].dim(a)
        db = network[owner[b]].dim(b)
        if da != db:
            raise DimensionMismatch(f"{a!r} has dim {da} but {b!r} has dim {db}")
        partner[a] = b
        partner[b] = a
    appearance = [leg for t in network for leg in t.legs if leg not in partner]

    live = dict(enumerate(network))

    def self_traces(k):
        t = live[k]
        done = True
        while done:
            done = False
            for leg in t.legs:
                p = partner.get(leg)
                if p is not None and p in t.legs:
                    t = _trace_pair(t, leg, p)
                    stats.contractions += 1
                    done = True
                    break
        live[k] = t

    for k in list(live):
        self_traces(k)

    next_id = len(network)
    while True:
        best = None
        keys = sorted(live)
        where = {leg: k for k in keys for leg in live[k].legs}
        candidates = set()
        for k in keys:
            for leg in live[k].legs:
                p = partner.get(leg)
                if p is not None and p in where and where[p] != k:
                    candidates.add(tuple(sorted((k, where[p]))))
        if not candidates:
            break
        for k1, k2 in sorted(candidates):
            t1, t2 = live[k1], live[k2]
            shared = {l for l in t1.legs if partner.get(l) in t2.legs}
            rest = [d for l, d in zip(t1.legs, t1.dims) if l not in shared]
            rest += [d for l, d in zip(t2.legs, t2.dims) if partner.get(l) not in t1.legs]
            cost = _size(rest)
            key = (cost, k1, k2)
            if best is None or key < best[0]:
                best = (key, k1, k2)
        _, k1, k2 = best
        t1, t2 = live.pop(k1), live.pop(k2)
        ax1 = [i for i, l in enumerate(t1.legs) if partner.get(l) in t2.legs]
        ax2 = [t2.legs.index(partner[t1.legs[i]]) for i in ax1]
        data = np.tensordot(t1.data, t2.data, axes=(ax1, ax2))
        legs = [l for i, l in enumerate(t1.legs) if i not in ax1]
        legs += [l for i, l in enumerate(t2.legs) if i not in ax2]
        stats.contractions += 1
        stats.max_intermediate = max(stats.max_intermediate, int(np.asarray(data).size))
        live[next_id] = Tensor(tuple(legs), np.asarray(data, dtype=object).reshape(
            np.asarray(data).shape))
        self_traces(next_id)
        next_id += 1

    # outer products of disconnected components, smallest first
    parts = sorted(live.values(), key=lambda t: (t.data.size, t.legs))
    result = parts[0] if parts else Tensor((), np.array(QQ(1), dtype=object).reshape(()))
    for t in parts[1:]:
        data = np.multiply.outer(result.data, t.data)
        result = Tensor(result.legs + t.legs, np.asarray(data, dtype=object))
        stats.contractions += 1
        stats.max_intermediate = max(stats.max_intermediate, result.data.size)
    order = list(open_order) if open_order is not None else appearance
    if sorted(map(repr, order)) != sorted(map(repr, result.legs)):
        raise ValueError(f"open legs {result.legs} do not match requested order {order}")
    return result.transpose(order)


class Network:
    """Builder for contraction networks in bond-name (einsum-like) style.

    Each added tensor lists a bond name per leg. A bond used twice is
    contracted; a bond used once is an open leg of the result.
    """

    def __init__(self):
        self.tensors: list[tuple[np.ndarray, tuple]] = []

    def add(self, data, bonds: Sequence):
        data = np.asarray(data, dtype=object)
        if data.ndim != len(bonds):
            raise DimensionMismatch(f"{len(bonds)} bonds for a rank-{data.ndim} tensor")
        self.tensors.append((data, tuple(bonds)))

    def contract(self, open_bonds: Sequence, stats: ContractionStats | None = None) -> np.ndarray:
        uses: dict = {}
        tensors = []
        for k, (data, bonds) in enumerate(self.tensors):
            legs = []
            for pos, b in enumerate(bonds):
                leg = (k, pos)
                uses.setdefault(b, []).append(leg)
                legs.append(leg)
            tensors.append(Tensor(tuple(legs), data))
        pairs = []
        open_legs = {}
        for b, legs in uses.items():
            if len(legs) == 2:
                pairs.append(tuple(legs))
            elif len(legs) == 1:
                open_legs[b] = legs[0]
            else:
                raise DuplicateLegPairing(f"bond {b!r} used {len(legs)} times")
        missing = set(open_bonds) ^ set(open_legs)
        if missing:
            raise ValueError(f"open bonds mismatch: {sorted(map(str, missing))}")
        result = contract(tensors, pairs, [open_legs[b] for b in open_bonds], stats)
        return result.data
