"""Combinatorial defect surfaces.

A surface is a cell complex: vertices are integers, edges are stored by
index, and each polygon lists its boundary anticlockwise as slots
``(edge, or)`` with ``or = +1`` meaning the edge is traversed tail to head.
``Polygon.corners[k]`` is the domain label at the corner following slot k.

A wall crossing an edge stores ``dir = +1`` when it points into the polygon
holding the ``(e, +1)`` slot. At a slot, ``flow = or * dir`` is +1 when the
wall enters the polygon there. Walking along a wall, t(x) lies to the left
and s(x) to the right.

Boundary circles are listed clockwise from the basepoint. On an in-circle
the clockwise direction agrees with the traversal of the adjacent polygon;
on an out-circle it is opposite. A marked slot ``(x, eps)`` with eps = +1
carries X_x, with eps = -1 it carries X_x*.
"""
from __future__ import annotations

import itertools
from collections import defaultdict, deque
from dataclasses import dataclass, field, replace

import numpy as np

from . import exactlin as el
from .algebra import Algebra
from .bimodule import Bimodule, apply_idempotent, check_chain


class UnknownLabel(KeyError):
    pass


class ValidationFailed(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations[:5]) + (" ..." if len(self.violations) > 5 else ""))


class BoundaryMismatch(ValueError):
    pass


class PatternMismatch(ValueError):
    pass


# ---------------------------------------------------------------- signature

Word = tuple  # tuple of (wall label, eps)


def dual_word(word) -> tuple:
    return tuple((x, -e) for x, e in reversed(tuple(word)))


def rotations(word) -> list:
    word = tuple(word)
    return [word[i:] + word[:i] for i in range(len(word))]


def rotate_covector(phi, dims) -> np.ndarray:
    """Covector on the left-rotated product, from one on the original product."""
    return np.moveaxis(np.asarray(phi, dtype=object).reshape(dims), 0, -1).reshape(-1).copy()


@dataclass(frozen=True)
class WallData:
    source: str
    target: str
    bimodule: Bimodule


@dataclass
class JunctionData:
    legs: Word                       # representative of the orbit j(u)
    phi: dict                        # orbit element -> covector on its ambient product
    phi_minus: dict | None = None    # covectors for negatively oriented junctions


@dataclass
class DefectSignature:
    domains: dict                    # label -> Algebra
    walls: dict = field(default_factory=dict)       # label -> WallData
    junctions: dict = field(default_factory=dict)   # label -> JunctionData

    def algebra(self, a: str) -> Algebra:
        try:
            return self.domains[a]
        except KeyError:
            raise UnknownLabel(f"unknown domain label {a!r}") from None

    def wall(self, x: str) -> WallData:
        try:
            return self.walls[x]
        except KeyError:
            raise UnknownLabel(f"unknown wall label {x!r}") from None

    def junction(self, u: str) -> JunctionData:
        try:
            return self.junctions[u]
        except KeyError:
            raise UnknownLabel(f"unknown junction label {u!r}") from None

    @property
    def field(self):
        for A in self.domains.values():
            return A.field
        return el.QQ

    def ends(self, x: str, eps: int) -> tuple[str, str]:
        """(left, right) algebra labels of X_x^eps."""
        w = self.wall(x)
        return (w.target, w.source) if eps > 0 else (w.source, w.target)

    def factor(self, x: str, eps: int) -> Bimodule:
        X = self.wall(x).bimodule
        return X if eps > 0 else X.dual

    def chain(self, word) -> list:
        return [self.factor(x, e) for x, e in word]

    def word_ends(self, word) -> tuple[str, str]:
        return self.ends(*word[0])[0], self.ends(*word[-1])[1]

    def is_cyclic(self, word) -> bool:
        word = tuple(word)
        for k in range(len(word)):
            if self.ends(*word[k])[1] != self.ends(*word[(k + 1) % len(word)])[0]:
                return False
        return bool(word)

    def violations(self) -> list[str]:
        out = []
        for a, A in self.domains.items():
            if not A.is_frobenius():
                out.append(f"domain {a!r}: algebra is not Frobenius with trace pairing")
        for x, w in self.walls.items():
            if w.source not in self.domains or w.target not in self.domains:
                out.append(f"wall {x!r}: unknown domain")
                continue
            X = w.bimodule
            if not X.left.same_as(self.domains[w.target]) or not X.right.same_as(self.domains[w.source]):
                out.append(f"wall {x!r}: bimodule algebras differ from (A_t, A_s)")
            bad = X.violations()
            if bad:
                out.append(f"wall {x!r}: {bad[0]}")
        for u, j in self.junctions.items():
            out += [f"junction {u!r}: {m}" for m in self._junction_violations(j.legs, j.phi)]
            if j.phi_minus is not None:
                out += [f"junction {u!r} (negative): {m}"
                        for m in self._junction_violations(dual_word(j.legs), j.phi_minus)]
        return out

    def _junction_violations(self, legs, phi: dict) -> list[str]:
        legs = tuple(legs)
        if not legs:
            return ["junction with no legs"]
        try:
            if not self.is_cyclic(legs):
                return [f"legs {legs} are not cyclically composable"]
        except UnknownLabel as exc:
            return [str(exc)]
        out = []
        for w in set(rotations(legs)):
            if w not in phi:
                out.append(f"no covector for orbit element {w}")
                continue
            chain = self.chain(w)
            dims = [X.dim for X in chain]
            v = np.asarray(phi[w], dtype=object)
            if v.shape != (int(np.prod(dims)),):
                out.append(f"covector for {w} has shape {v.shape}")
                continue
            if not el.equal(apply_idempotent(chain, True, v.reshape(1, -1), rows=True)[0], v):
                out.append(f"covector for {w} does not factor through the cyclic tensor product")
            nxt = w[1:] + w[:1]
            if nxt in phi and not el.equal(rotate_covector(v, dims), np.asarray(phi[nxt], dtype=object)):
                out.append(f"covectors for {w} and {nxt} are not related by rotation")
        return out

    def check(self) -> "DefectSignature":
        bad = self.violations()
        if bad:
            raise ValidationFailed(bad)
        return self


def junction_family(sig: DefectSignature, legs, psi) -> dict:
    """Rotation-invariant family of covectors generated by ``psi`` on ``legs``.

    ``psi`` is first composed with the cyclic idempotent and then averaged
    over the stabiliser of ``legs`` under rotation, so the result always
    satisfies the junction conditions.
    """
    legs = tuple(legs)
    chain = sig.chain(legs)
    dims = [X.dim for X in chain]
    f = sig.field
    psi = np.asarray([f(c) for c in psi], dtype=object).reshape(1, -1)
    base = apply_idempotent(chain, True, psi, rows=True)[0]
    n = len(legs)
    stab = [k for k in range(n) if legs[k:] + legs[:k] == legs]
    acc = el.zeros(base.shape, f)
    for k in stab:
        v, d = base, list(dims)
        for _ in range(k):
            v = rotate_covector(v, d)
            d = d[1:] + d[:1]
        acc = acc + v
    base = acc / f(len(stab))
    fam = {}
    v, w, d = base, legs, list(dims)
    for _ in range(n):
        fam.setdefault(w, v)
        v = rotate_covector(v, d)
        w = w[1:] + w[:1]
        d = d[1:] + d[:1]
    return fam


# ---------------------------------------------------------------- boundary circles

@dataclass(frozen=True)
class Plain:
    domain: str


@dataclass(frozen=True)
class Marked:
    wall: str
    eps: int


@dataclass(frozen=True)
class BoundaryCircle:
    slots: tuple
    base: int = 0

    def __post_init__(self):
        if not self.slots:
            raise ValueError("a boundary circle needs at least one slot")
        object.__setattr__(self, "base", self.base % len(self.slots))

    def ordered(self) -> tuple:
        """Slots clockwise from the basepoint."""
        return self.slots[self.base:] + self.slots[:self.base]

    def order(self) -> list[int]:
        n = len(self.slots)
        return [(self.base + k) % n for k in range(n)]

    def word(self) -> Word:
        return tuple((s.wall, s.eps) for s in self.ordered() if isinstance(s, Marked))

    def is_plain(self) -> bool:
        return all(isinstance(s, Plain) for s in self.slots)

    def rotated(self, k: int) -> "BoundaryCircle":
        return BoundaryCircle(self.slots, self.base + k)


def slot_ends(sig: DefectSignature, s) -> tuple[str, str]:
    """(before, after) domain labels of a circle slot in clockwise order."""
    if isinstance(s, Plain):
        return s.domain, s.domain
    return sig.ends(s.wall, s.eps)


def circle_violations(sig: DefectSignature, c: BoundaryCircle) -> list[str]:
    out = []
    n = len(c.slots)
    try:
        ends = [slot_ends(sig, s) for s in c.slots]
    except UnknownLabel as exc:
        return [str(exc)]
    for s in c.slots:
        if isinstance(s, Plain) and s.domain not in sig.domains:
            out.append(f"unknown domain {s.domain!r}")
        if isinstance(s, Marked) and s.eps not in (1, -1):
            out.append(f"marked slot sign {s.eps}")
    for k in range(n):
        if ends[k][1] != ends[(k + 1) % n][0]:
            out.append(f"circle domains do not match between slots {k} and {(k + 1) % n}")
    return out


def circle_from_word(sig: DefectSignature, word, domain: str | None = None, plain_slots: int = 2) -> BoundaryCircle:
    """O(word): one marked slot per letter, or a plain circle for the empty word."""
    word = tuple(word)
    if not word:
        if domain is None:
            raise ValueError("the empty word needs a domain label")
        return BoundaryCircle(tuple(Plain(domain) for _ in range(plain_slots)))
    return BoundaryCircle(tuple(Marked(x, e) for x, e in word))


# ---------------------------------------------------------------- surfaces

@dataclass(frozen=True)
class Edge:
    tail: int
    head: int
    wall: tuple | None = None   # (label, dir)


@dataclass(frozen=True)
class Polygon:
    slots: tuple                # ((edge, or), ...), anticlockwise
    corners: tuple              # domain label after each slot
    junction: tuple | None = None   # (label, sign)


@dataclass(frozen=True)
class Attachment:
    circle: BoundaryCircle
    edges: tuple                # edge index per circle slot (same order as circle.slots)


@dataclass(frozen=True)
class DecoratedSurface:
    vertices: int
    edges: tuple
    polygons: tuple
    inputs: tuple = ()
    outputs: tuple = ()

    # -- basic queries

    def slot_start(self, s) -> int:
        e, o = s
        E = self.edges[e]
        return E.tail if o > 0 else E.head

    def slot_end(self, s) -> int:
        e, o = s
        E = self.edges[e]
        return E.head if o > 0 else E.tail

    def flow(self, s) -> int:
        e, o = s
        w = self.edges[e].wall
        return 0 if w is None else o * w[1]

    def occurrences(self) -> dict:
        occ = defaultdict(list)
        for pi, p in enumerate(self.polygons):
            for k, s in enumerate(p.slots):
                occ[s[0]].append((pi, k))
        return occ

    def boundary_edges(self) -> dict:
        """edge -> ("in"/"out", circle index, slot index)."""
        out = {}
        for side, atts in (("in", self.inputs), ("out", self.outputs)):
            for ci, a in enumerate(atts):
                for k, e in enumerate(a.edges):
                    out[e] = (side, ci, k)
        return out

    def interior_edges(self) -> list[int]:
        b = self.boundary_edges()
        return [e for e in range(len(self.edges)) if e not in b]

    def slot_of(self, e: int):
        """The unique polygon slot of a boundary edge."""
        occ = self.occurrences()[e]
        pi, k = occ[0]
        return self.polygons[pi].slots[k]

    def vertex_domains(self) -> dict:
        out = {}
        for p in self.polygons:
            for s, d in zip(p.slots, p.corners):
                out.setdefault(self.slot_end(s), d)
        return out

    def euler_characteristic(self) -> int:
        return self.vertices - len(self.edges) + len(self.polygons)

    def components(self) -> list[set]:
        """Connected components as sets of polygon indices."""
        occ = self.occurrences()
        adj = defaultdict(set)
        for e, lst in occ.items():
            for (p1, _), (p2, _) in itertools.combinations(lst, 2):
                adj[p1].add(p2)
                adj[p2].add(p1)
        for v_polys in self._vertex_polygons().values():
            first = v_polys[0]
            for p in v_polys[1:]:
                adj[first].add(p)
                adj[p].add(first)
        seen, comps = set(), []
        for start in range(len(self.polygons)):
            if start in seen:
                continue
            comp, queue = set(), [start]
            while queue:
                p = queue.pop()
                if p in comp:
                    continue
                comp.add(p)
                queue.extend(adj[p] - comp)
            seen |= comp
            comps.append(comp)
        return comps

    def _vertex_polygons(self) -> dict:
        vp = defaultdict(list)
        for pi, p in enumerate(self.polygons):
            for s in p.slots:
                vp[self.slot_end(s)].append(pi)
        return vp

    def genus(self) -> int:
        b = len(self.inputs) + len(self.outputs)
        comps = len(self.components())
        return (2 * comps - self.euler_characteristic() - b) // 2

    def summary(self) -> dict:
        return {"vertices": self.vertices, "edges": len(self.edges), "polygons": len(self.polygons),
                "euler": self.euler_characteristic(), "in": len(self.inputs), "out": len(self.outputs)}


# ---------------------------------------------------------------- validation

def polygon_crossings(M: DecoratedSurface, p: Polygon) -> list[int]:
    return [k for k, s in enumerate(p.slots) if M.edges[s[0]].wall is not None]


def structural_violations(M: DecoratedSurface) -> list[str]:
    """Checks that do not need the signature."""
    out = []
    nE = len(M.edges)
    for i, E in enumerate(M.edges):
        if not (0 <= E.tail < M.vertices and 0 <= E.head < M.vertices):
            out.append(f"edge {i}: endpoint out of range")
        if E.wall is not None and E.wall[1] not in (1, -1):
            out.append(f"edge {i}: wall direction {E.wall[1]}")
    if out:
        return out
    occ = M.occurrences()
    bnd = {}
    for side, atts in (("in", M.inputs), ("out", M.outputs)):
        for ci, a in enumerate(atts):
            if len(a.edges) != len(a.circle.slots):
                out.append(f"{side}-circle {ci}: {len(a.edges)} edges for {len(a.circle.slots)} slots")
            for e in a.edges:
                if not 0 <= e < nE:
                    out.append(f"{side}-circle {ci}: unknown edge {e}")
                elif e in bnd:
                    out.append(f"edge {e} is attached to two boundary slots")
                bnd[e] = side
    if out:
        return out
    for e in range(nE):
        lst = occ.get(e, [])
        orients = sorted(M.polygons[pi].slots[k][1] for pi, k in lst)
        if e in bnd:
            if len(lst) != 1:
                out.append(f"boundary edge {e} appears in {len(lst)} polygon slots")
        elif orients != [-1, 1]:
            out.append(f"interior edge {e} has slot orientations {orients}")
    for pi, p in enumerate(M.polygons):
        n = len(p.slots)
        if len(p.corners) != n:
            out.append(f"polygon {pi}: {len(p.corners)} corner labels for {n} slots")
        if p.junction is None and n < 2:
            out.append(f"polygon {pi}: boundary word of length {n}")
        if p.junction is not None and n < 1:
            out.append(f"polygon {pi}: junction with no legs")
        for k in range(n):
            s, t = p.slots[k], p.slots[(k + 1) % n]
            if s[1] not in (1, -1):
                out.append(f"polygon {pi}: slot {k} orientation {s[1]}")
            elif M.slot_end(s) != M.slot_start(t):
                out.append(f"polygon {pi}: slots {k} and {(k + 1) % n} do not meet")
        cross = polygon_crossings(M, p)
        if p.junction is not None:
            if len(cross) != n:
                out.append(f"polygon {pi}: junction polygon with an uncrossed edge")
            if p.junction[1] not in (1, -1):
                out.append(f"polygon {pi}: junction orientation {p.junction[1]}")
        elif cross:
            flows = [M.flow(p.slots[k]) for k in cross]
            labels = {M.edges[p.slots[k][0]].wall[0] for k in cross}
            if len(cross) != 2 or sorted(flows) != [-1, 1] or len(labels) != 1:
                out.append(f"polygon {pi}: wall pattern must be one segment entering and leaving "
                           f"via distinct edges (found {len(cross)} crossings)")
        # uncrossed slots keep the domain
        for k in range(n):
            if k not in cross and len(p.corners) == n and p.corners[k - 1] != p.corners[k]:
                out.append(f"polygon {pi}: domain changes across uncrossed slot {k}")
    if out:
        return out
    # corners around vertices
    vdom = {}
    for pi, p in enumerate(M.polygons):
        for s, d in zip(p.slots, p.corners):
            v = M.slot_end(s)
            if vdom.setdefault(v, d) != d:
                out.append(f"vertex {v}: inconsistent domain labels {vdom[v]!r} and {d!r}")
    out += _link_violations(M, bnd)
    # circles chain up
    for side, atts in (("in", M.inputs), ("out", M.outputs)):
        for ci, a in enumerate(atts):
            m = len(a.edges)
            for k in range(m):
                s1, s2 = M.slot_of(a.edges[k]), M.slot_of(a.edges[(k + 1) % m])
                ok = (M.slot_end(s1) == M.slot_start(s2)) if side == "in" else (M.slot_start(s1) == M.slot_end(s2))
                if not ok:
                    out.append(f"{side}-circle {ci}: edges at slots {k} and {(k + 1) % m} are not consecutive")
    return out


def _link_violations(M: DecoratedSurface, bnd: dict) -> list[str]:
    """Each vertex link must be a single cycle (interior) or a single path (boundary)."""
    ends_at = defaultdict(list)
    for e, E in enumerate(M.edges):
        ends_at[E.tail].append((e, 0))
        ends_at[E.head].append((e, 1))
    links = defaultdict(list)
    for p in M.polygons:
        n = len(p.slots)
        for k in range(n):
            s, t = p.slots[k], p.slots[(k + 1) % n]
            a = (s[0], 1 if s[1] > 0 else 0)     # end of s
            b = (t[0], 0 if t[1] > 0 else 1)     # start of t
            v = M.slot_end(s)
            links[v].append((a, b))
    out = []
    for v in range(M.vertices):
        nodes = ends_at.get(v, [])
        if not nodes:
            out.append(f"vertex {v} is isolated")
            continue
        deg = defaultdict(int)
        adj = defaultdict(list)
        for a, b in links[v]:
            deg[a] += 1
            deg[b] += 1
            adj[a].append(b)
            adj[b].append(a)
        seen, stack = set(), [nodes[0]]
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            stack.extend(adj[x])
        if len(seen) != len(nodes):
            out.append(f"vertex {v}: link is disconnected")
        for node in nodes:
            want = 1 if node[0] in bnd else 2
            if deg[node] != want:
                out.append(f"vertex {v}: edge end {node} meets {deg[node]} corners")
                break
    return out


def validate(sig: DefectSignature, M: DecoratedSurface) -> list[str]:
    """All violations of the decoration rules; empty when M is valid."""
    out = structural_violations(M)
    if out:
        return out
    for i, E in enumerate(M.edges):
        if E.wall is not None and E.wall[0] not in sig.walls:
            out.append(f"edge {i}: unknown wall label {E.wall[0]!r}")
    for pi, p in enumerate(M.polygons):
        for d in p.corners:
            if d not in sig.domains:
                out.append(f"polygon {pi}: unknown domain label {d!r}")
    if out:
        return out
    for pi, p in enumerate(M.polygons):
        n = len(p.slots)
        for k, s in enumerate(p.slots):
            w = M.edges[s[0]].wall
            if w is None:
                continue
            before, after = sig.ends(w[0], M.flow(s))
            if p.corners[k - 1] != before or p.corners[k] != after:
                out.append(f"polygon {pi}: domains around slot {k} do not match wall {w[0]!r}")
        if p.junction is not None:
            label, sign = p.junction
            if label not in sig.junctions:
                out.append(f"polygon {pi}: unknown junction {label!r}")
                continue
            J = sig.junctions[label]
            legs = junction_legs(M, p)
            orbit = set(rotations(J.legs))
            if sign > 0 and legs not in orbit:
                out.append(f"polygon {pi}: legs {legs} are not in the orbit of junction {label!r}")
            if sign < 0:
                if dual_word(legs) not in orbit:
                    out.append(f"polygon {pi}: reversed legs are not in the orbit of junction {label!r}")
                elif J.phi_minus is None:
                    out.append(f"polygon {pi}: junction {label!r} has no data for negative orientation")
    vdom = M.vertex_domains()
    for side, atts in (("in", M.inputs), ("out", M.outputs)):
        for ci, a in enumerate(atts):
            bad = circle_violations(sig, a.circle)
            out += [f"{side}-circle {ci}: {m}" for m in bad]
            if bad:
                continue
            for k, e in enumerate(a.edges):
                slot = a.circle.slots[k]
                E = M.edges[e]
                s = M.slot_of(e)
                cw_start = M.slot_start(s) if side == "in" else M.slot_end(s)
                vd = vdom.get(cw_start)
                if vd != slot_ends(sig, slot)[0]:
                    out.append(f"{side}-circle {ci}: slot {k} starts in {vd!r}, expected {slot_ends(sig, slot)[0]!r}")
                if isinstance(slot, Plain):
                    if E.wall is not None:
                        out.append(f"{side}-circle {ci}: plain slot {k} on a crossed edge")
                else:
                    eps = M.flow(s) if side == "in" else -M.flow(s)
                    if E.wall is None or E.wall[0] != slot.wall or eps != slot.eps:
                        out.append(f"{side}-circle {ci}: marked slot {k} does not match edge {e}")
    return out


def check(sig: DefectSignature, M: DecoratedSurface) -> DecoratedSurface:
    bad = validate(sig, M)
    if bad:
        raise ValidationFailed(bad)
    return M


def junction_legs(M: DecoratedSurface, p: Polygon) -> Word:
    return tuple((M.edges[s[0]].wall[0], M.flow(s)) for s in p.slots)


# ---------------------------------------------------------------- building

class Builder:
    """Incremental construction of a surface with domain labels read off vertices."""

    def __init__(self):
        self.vdom: list[str] = []
        self.edges: list[Edge] = []
        self.keys: dict = {}
        self.polys: list[Polygon] = []
        self.inputs: list[Attachment] = []
        self.outputs: list[Attachment] = []

    def vertex(self, domain: str) -> int:
        self.vdom.append(domain)
        return len(self.vdom) - 1

    def edge(self, tail: int, head: int, wall=None, key=None) -> int:
        if key is not None and key in self.keys:
            return self.keys[key]
        self.edges.append(Edge(tail, head, wall))
        idx = len(self.edges) - 1
        if key is not None:
            self.keys[key] = idx
        return idx

    def polygon(self, slots, junction=None) -> int:
        slots = tuple(slots)
        corners = []
        for e, o in slots:
            E = self.edges[e]
            corners.append(self.vdom[E.head if o > 0 else E.tail])
        self.polys.append(Polygon(slots, tuple(corners), junction))
        return len(self.polys) - 1

    def build(self) -> DecoratedSurface:
        return DecoratedSurface(len(self.vdom), tuple(self.edges), tuple(self.polys),
                                tuple(self.inputs), tuple(self.outputs))


def _circle_vertices(B: Builder, sig: DefectSignature, c: BoundaryCircle) -> list[int]:
    """One vertex per slot; vertex k is the clockwise start of slot k."""
    return [B.vertex(slot_ends(sig, s)[0]) for s in c.slots]


def _circle_edges(B: Builder, c: BoundaryCircle, verts: list[int]) -> list[int]:
    n = len(c.slots)
    out = []
    for k, s in enumerate(c.slots):
        wall = (s.wall, s.eps) if isinstance(s, Marked) else None
        out.append(B.edge(verts[k], verts[(k + 1) % n], wall))
    return out


def ring(sig: DefectSignature, cin: BoundaryCircle, cout: BoundaryCircle, cells, radial_walls=None,
         in_start: int = 0, out_start: int = 0) -> DecoratedSurface:
    """Annulus from ``cin`` to ``cout`` cut into cells along radial edges.

    ``cells`` lists (number of in-slots, number of out-slots) per cell in
    clockwise order, starting at stored slot ``in_start`` and ``out_start``.
    A wall inside a cell joins its two marked slots. ``radial_walls``
    optionally puts a wall (label, dir) on every radial, for circular walls.
    """
    B = Builder()
    ui = _circle_vertices(B, sig, cin)
    uo = _circle_vertices(B, sig, cout)
    ei = _circle_edges(B, cin, ui)
    eo = _circle_edges(B, cout, uo)
    n, m = len(cin.slots), len(cout.slots)
    if sum(c[0] for c in cells) != n or sum(c[1] for c in cells) != m:
        raise ValueError("cells do not cover both circles")
    i0, o0 = in_start, out_start
    for ni, no in cells:
        i1, o1 = i0 + ni, o0 + no
        rs = B.edge(ui[i0 % n], uo[o0 % m], radial_walls, key=("r", i0 % n, o0 % m))
        re = B.edge(ui[i1 % n], uo[o1 % m], radial_walls, key=("r", i1 % n, o1 % m))
        slots = [(ei[k % n], 1) for k in range(i0, i1)]
        slots.append((re, 1))
        slots += [(eo[k % m], -1) for k in reversed(range(o0, o1))]
        slots.append((rs, -1))
        B.polygon(slots)
        i0, o0 = i1, o1
    B.inputs.append(Attachment(cin, tuple(ei)))
    B.outputs.append(Attachment(cout, tuple(eo)))
    return B.build()


def cylinder(sig: DefectSignature, c: BoundaryCircle) -> DecoratedSurface:
    """C_O: one square per slot."""
    return ring(sig, c, c, [(1, 1)] * len(c.slots))


def defect_annulus(sig: DefectSignature, x: str, cells: int = 1) -> DecoratedSurface:
    """A(x): O(s(x)) -> O(t(x)) with one circular wall, ``cells`` squares."""
    w = sig.wall(x)
    cin = BoundaryCircle(tuple(Plain(w.source) for _ in range(cells)))
    cout = BoundaryCircle(tuple(Plain(w.target) for _ in range(cells)))
    return ring(sig, cin, cout, [(1, 1)] * cells, radial_walls=(x, -1))


def disc(sig: DefectSignature, cout: BoundaryCircle, junction=None) -> DecoratedSurface:
    """A single polygon bounded by an out-circle."""
    B = Builder()
    u = _circle_vertices(B, sig, cout)
    eo = _circle_edges(B, cout, u)
    B.polygon([(e, -1) for e in reversed(eo)], junction)
    B.outputs.append(Attachment(cout, tuple(eo)))
    return B.build()


def in_disc(sig: DefectSignature, cin: BoundaryCircle) -> DecoratedSurface:
    """A single polygon bounded by an in-circle."""
    B = Builder()
    u = _circle_vertices(B, sig, cin)
    ei = _circle_edges(B, cin, u)
    B.polygon([(e, 1) for e in ei])
    B.inputs.append(Attachment(cin, tuple(ei)))
    return B.build()


def junction_disc(sig: DefectSignature, label: str, sign: int = 1) -> DecoratedSurface:
    """Disc around a junction; its out-circle reads the dual of the legs."""
    J = sig.junction(label)
    legs = J.legs if sign > 0 else dual_word(J.legs)
    return disc(sig, circle_from_word(sig, dual_word(legs)), (label, sign))


def chord_disc(sig: DefectSignature, cout: BoundaryCircle, offset: int = 0) -> DecoratedSurface:
    """Disc whose walls join slot offset+k with slot offset+2n-1-k (nested chords)."""
    m = len(cout.slots)
    if m % 2:
        raise ValueError("chord disc needs an even number of slots")
    n = m // 2
    B = Builder()
    u = _circle_vertices(B, sig, cout)
    eo = _circle_edges(B, cout, u)
    V = lambda k: u[(offset + k) % m]
    S = lambda k: eo[(offset + k) % m]
    diag = [B.edge(V(k + 1), V(2 * n - 1 - k)) for k in range(n - 1)]
    for k in range(n):
        slots = [(S(k), -1)]
        if k > 0:
            slots.append((diag[k - 1], 1))
        slots.append((S(2 * n - 1 - k), -1))
        if k < n - 1:
            slots.append((diag[k], -1))
        B.polygon(slots)
    B.outputs.append(Attachment(cout, tuple(eo)))
    return B.build()


def pants(sig: DefectSignature, c1: BoundaryCircle, c2: BoundaryCircle, k: int) -> DecoratedSurface:
    """Pair of pants c1, c2 -> c3 where c3 has the slots of c2 inserted at position k of c1.

    Slots are taken in stored order; the out-circle basepoint is the one of c1
    (shifted past c2 when it lies after the insertion point).
    """
    P, Q = len(c1.slots), len(c2.slots)
    s3 = c1.slots[:k] + c2.slots + c1.slots[k:]
    base = c1.base if c1.base < k else c1.base + Q
    c3 = BoundaryCircle(s3, base)
    B = Builder()
    u = _circle_vertices(B, sig, c1)
    v = _circle_vertices(B, sig, c2)
    W = _circle_vertices(B, sig, c3)
    e1 = _circle_edges(B, c1, u)
    e2 = _circle_edges(B, c2, v)
    e3 = _circle_edges(B, c3, W)
    pos1 = lambda j: j if j < k else j + Q     # position of c1 vertex/slot j on c3
    N3 = P + Q

    def radial(a, b):
        return B.edge(a, W[b % N3], key=(a, b % N3))

    for j in range(P):
        rs = radial(u[j], pos1(j))
        re = radial(u[(j + 1) % P], pos1(j) + 1)
        B.polygon([(e1[j], 1), (re, 1), (e3[pos1(j)], -1), (rs, -1)])
    for i in range(Q):
        rs = radial(v[i], k + i)
        re = radial(v[(i + 1) % Q], k + i + 1)
        B.polygon([(e2[i], 1), (re, 1), (e3[k + i], -1), (rs, -1)])
    uk = u[k % P]
    r1 = radial(uk, k)
    r2 = radial(uk, k + Q)
    r3 = radial(v[0], k + Q)
    r4 = radial(v[0], k)
    B.polygon([(r1, -1), (r2, 1), (r3, -1), (r4, 1)])
    B.inputs += [Attachment(c1, tuple(e1)), Attachment(c2, tuple(e2))]
    B.outputs.append(Attachment(c3, tuple(e3)))
    return B.build()


def cap_pair(sig: DefectSignature, c: BoundaryCircle, k: int) -> DecoratedSurface:
    """Annulus removing the adjacent marked slots k, k+1 of c by a wall cap."""
    n = len(c.slots)
    if n == 2:
        a = slot_ends(sig, c.slots[0])[0]
        return ring(sig, c, BoundaryCircle((Plain(a), Plain(a))), [(2, 2)])
    if k == n - 1:
        raise ValueError("the capped pair must not straddle slot 0")
    slots = c.slots[:k] + c.slots[k + 2:]
    base = c.base if c.base <= k else max(k, c.base - 2)
    cout = BoundaryCircle(slots, base)
    cells = [(1, 1)] * k + [(2, 0)] + [(1, 1)] * (n - k - 2)
    return ring(sig, c, cout, cells)


def cup_pair(sig: DefectSignature, c: BoundaryCircle, k: int, pair) -> DecoratedSurface:
    """Annulus inserting the marked pair ``pair`` at position k of c via a wall cup."""
    n = len(c.slots)
    slots = c.slots[:k] + tuple(Marked(x, e) for x, e in pair) + c.slots[k:]
    base = c.base if c.base < k else c.base + 2
    cout = BoundaryCircle(slots, base)
    cells = [(1, 1)] * k + [(0, 2)] + [(1, 1)] * (n - k)
    return ring(sig, c, cout, cells)


def reduce_ring(sig: DefectSignature, c: BoundaryCircle, domain: str | None = None) -> DecoratedSurface:
    """Annulus from c to the canonical circle O(c.word()) with plain slots removed."""
    word = c.word()
    if not word:
        d = domain if domain is not None else c.slots[0].domain
        target = BoundaryCircle((Plain(d), Plain(d)))
        return ring(sig, c, target, [(len(c.slots), 2)])
    target = circle_from_word(sig, word)
    cells = [(1, 1) if isinstance(s, Marked) else (1, 0) for s in c.ordered()]
    # start the cells at the first marked slot so no cell straddles a wall awkwardly
    first = next(k for k, s in enumerate(c.ordered()) if isinstance(s, Marked))
    cells = cells[first:] + cells[:first]
    return ring(sig, c, target, cells, in_start=c.base + first, out_start=0)


def rotation(sig: DefectSignature, c: BoundaryCircle, shift: int) -> DecoratedSurface:
    """Cylinder from c to the same circle with the basepoint moved by ``shift`` slots."""
    M = cylinder(sig, c)
    out = Attachment(c.rotated(shift), M.outputs[0].edges)
    return replace(M, outputs=(out,))


def plain_disc(sig: DefectSignature, a: str, slots: int = 2) -> DecoratedSurface:
    return disc(sig, BoundaryCircle(tuple(Plain(a) for _ in range(slots))))


def torus(sig: DefectSignature, x: str | None = None, domain: str | None = None, cut: str = "cylinder") -> DecoratedSurface:
    """Closed torus, optionally with a wall loop labelled x (s(x) = t(x)).

    ``cut="cylinder"`` closes up the cylinder over O(x); ``cut="annulus"``
    closes up the defect annulus A(x), so the loop runs the other way.
    """
    if x is None:
        return close(cylinder(sig, BoundaryCircle((Plain(domain), Plain(domain)))), [(0, 0)])
    if cut == "cylinder":
        return close(cylinder(sig, circle_from_word(sig, ((x, 1),))), [(0, 0)])
    return close(defect_annulus(sig, x, 2), [(0, 0)])


# ---------------------------------------------------------------- gluing

def disjoint_union(*surfaces: DecoratedSurface) -> DecoratedSurface:
    voff = eoff = 0
    edges, polys, ins, outs = [], [], [], []
    for M in surfaces:
        for E in M.edges:
            edges.append(Edge(E.tail + voff, E.head + voff, E.wall))
        for p in M.polygons:
            polys.append(Polygon(tuple((e + eoff, o) for e, o in p.slots), p.corners, p.junction))
        ins += [Attachment(a.circle, tuple(e + eoff for e in a.edges)) for a in M.inputs]
        outs += [Attachment(a.circle, tuple(e + eoff for e in a.edges)) for a in M.outputs]
        voff += M.vertices
        eoff += len(M.edges)
    return DecoratedSurface(voff, tuple(edges), tuple(polys), tuple(ins), tuple(outs))


def close(M: DecoratedSurface, pairs) -> DecoratedSurface:
    """Identify out-circle i with in-circle j for each (i, j) in ``pairs``."""
    pairs = list(pairs)
    parent = list(range(M.vertices))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    rename = {}      # removed edge -> (kept edge, flip)
    edges = list(M.edges)
    for oi, ii in pairs:
        ao, ai = M.outputs[oi], M.inputs[ii]
        if ao.circle != ai.circle:
            raise BoundaryMismatch(f"out-circle {oi} and in-circle {ii} differ: {ao.circle} vs {ai.circle}")
        for e, f in zip(ao.edges, ai.edges):
            so, si = M.slot_of(e), M.slot_of(f)
            cw_o, cw_i = -so[1], si[1]
            flip = 1 if cw_o == cw_i else -1
            E, F = M.edges[e], M.edges[f]
            if flip > 0:
                union(E.tail, F.tail)
                union(E.head, F.head)
            else:
                union(E.tail, F.head)
                union(E.head, F.tail)
            if (E.wall is None) != (F.wall is None):
                raise BoundaryMismatch(f"edges {e} and {f}: only one is crossed")
            if E.wall is not None and (E.wall[0] != F.wall[0] or F.wall[1] * flip != E.wall[1]):
                raise BoundaryMismatch(f"edges {e} and {f}: walls do not match")
            rename[f] = (e, flip)
    keep = [e for e in range(len(edges)) if e not in rename]
    new_index = {e: i for i, e in enumerate(keep)}
    roots = sorted({find(v) for v in range(M.vertices)})
    vmap = {r: i for i, r in enumerate(roots)}
    V = lambda v: vmap[find(v)]
    new_edges = tuple(Edge(V(edges[e].tail), V(edges[e].head), edges[e].wall) for e in keep)

    def slot(s):
        e, o = s
        if e in rename:
            k, flip = rename[e]
            return new_index[k], o * flip
        return new_index[e], o

    polys = tuple(Polygon(tuple(slot(s) for s in p.slots), p.corners, p.junction) for p in M.polygons)
    used_out = {i for i, _ in pairs}
    used_in = {j for _, j in pairs}
    ins = tuple(Attachment(a.circle, tuple(new_index[e] for e in a.edges))
                for j, a in enumerate(M.inputs) if j not in used_in)
    outs = tuple(Attachment(a.circle, tuple(new_index[e] for e in a.edges))
                 for i, a in enumerate(M.outputs) if i not in used_out)
    return DecoratedSurface(len(roots), new_edges, polys, ins, outs)


def glue(M: DecoratedSurface, N: DecoratedSurface) -> DecoratedSurface:
    """N ∘ M: the out-circles of M are glued to the in-circles of N in order."""
    if len(M.outputs) != len(N.inputs):
        raise BoundaryMismatch(f"{len(M.outputs)} out-circles against {len(N.inputs)} in-circles")
    U = disjoint_union(M, N)
    nin = len(M.inputs)
    return close(U, [(k, nin + k) for k in range(len(M.outputs))])


def permute_inputs(M: DecoratedSurface, perm) -> DecoratedSurface:
    return replace(M, inputs=tuple(M.inputs[i] for i in perm))


def permute_outputs(M: DecoratedSurface, perm) -> DecoratedSurface:
    return replace(M, outputs=tuple(M.outputs[i] for i in perm))


def relabel_edges(M: DecoratedSurface, order) -> DecoratedSurface:
    """Renumber edges: new edge i is old edge order[i]."""
    idx = {old: new for new, old in enumerate(order)}
    edges = tuple(M.edges[old] for old in order)
    polys = tuple(Polygon(tuple((idx[e], o) for e, o in p.slots), p.corners, p.junction) for p in M.polygons)
    att = lambda a: Attachment(a.circle, tuple(idx[e] for e in a.edges))
    return DecoratedSurface(M.vertices, edges, polys, tuple(map(att, M.inputs)), tuple(map(att, M.outputs)))


def rotate_polygon(M: DecoratedSurface, pi: int, shift: int) -> DecoratedSurface:
    """Change the stored starting slot of a polygon (the surface is unchanged)."""
    p = M.polygons[pi]
    n = len(p.slots)
    q = Polygon(p.slots[shift % n:] + p.slots[:shift % n], p.corners[shift % n:] + p.corners[:shift % n], p.junction)
    return replace(M, polygons=M.polygons[:pi] + (q,) + M.polygons[pi + 1:])


def reverse_edge(M: DecoratedSurface, e: int) -> DecoratedSurface:
    """Swap the stored orientation of an edge (the surface is unchanged)."""
    E = M.edges[e]
    wall = None if E.wall is None else (E.wall[0], -E.wall[1])
    edges = M.edges[:e] + (Edge(E.head, E.tail, wall),) + M.edges[e + 1:]
    polys = tuple(Polygon(tuple((f, -o if f == e else o) for f, o in p.slots), p.corners, p.junction)
                  for p in M.polygons)
    return replace(M, edges=edges, polygons=polys)


# ---------------------------------------------------------------- moves

@dataclass(frozen=True)
class Move:
    kind: str       # "bigon", "add_edge", "split_edge", "unbigon", "remove_edge", "join_edges"
    args: tuple

    def __str__(self):
        return f"{self.kind}{self.args}"


def _rebuild(M: DecoratedSurface, vertices: int, edges: list, polys: list) -> DecoratedSurface:
    """Drop unused edges and vertices and renumber."""
    used_e = sorted({e for p in polys for e, _ in p.slots} | {e for a in M.inputs + M.outputs for e in a.edges})
    emap = {e: i for i, e in enumerate(used_e)}
    used_v = sorted({v for e in used_e for v in (edges[e].tail, edges[e].head)})
    vmap = {v: i for i, v in enumerate(used_v)}
    new_edges = tuple(Edge(vmap[edges[e].tail], vmap[edges[e].head], edges[e].wall) for e in used_e)
    new_polys = tuple(Polygon(tuple((emap[e], o) for e, o in p.slots), p.corners, p.junction) for p in polys)
    att = lambda a: Attachment(a.circle, tuple(emap[e] for e in a.edges))
    return DecoratedSurface(len(used_v), new_edges, new_polys,
                            tuple(map(att, M.inputs)), tuple(map(att, M.outputs)))


def _local_ok(M: DecoratedSurface) -> bool:
    return not structural_violations(M)


def _bigon(M: DecoratedSurface, pi: int, side: int) -> DecoratedSurface:
    p = M.polygons[pi]
    if len(p.slots) != 2 or p.junction is not None:
        raise PatternMismatch("bigon removal needs a 2-gon without junction")
    s0, s1 = p.slots
    v, w = M.slot_start(s0), M.slot_end(s0)
    crossed = polygon_crossings(M, p)
    vdom = M.vertex_domains()
    c = M.vertices
    dom = vdom[v] if side == 0 else vdom[w]
    edges = list(M.edges)
    wall_a = wall_b = None
    if crossed:
        label = M.edges[s0[0]].wall[0]
        # T1 holds s0, T2 holds s1; new edges have their + slot in T2
        d = 1 if M.flow(s0) > 0 else -1      # the wall runs T1 -> T2 when it enters at s0
        if side == 0:
            wall_b = (label, d)
        else:
            wall_a = (label, d)
    elif side != 0:
        raise PatternMismatch("side choice only applies to a crossed 2-gon")
    a = len(edges)
    edges.append(Edge(v, c, wall_a))
    b = len(edges)
    edges.append(Edge(c, w, wall_b))
    t1 = Polygon((s0, (b, -1), (a, -1)), (p.corners[0], dom, p.corners[1]))
    t2 = Polygon((s1, (a, 1), (b, 1)), (p.corners[1], dom, p.corners[0]))
    polys = list(M.polygons)
    polys[pi] = t1
    polys.append(t2)
    return DecoratedSurface(M.vertices + 1, tuple(edges), tuple(polys), M.inputs, M.outputs)


def _add_edge(M: DecoratedSurface, pi: int, i: int, j: int) -> DecoratedSurface:
    p = M.polygons[pi]
    n = len(p.slots)
    i, j = i % n, j % n
    if i == j:
        raise PatternMismatch("edge insertion needs two distinct corners")
    u, v = M.slot_end(p.slots[i]), M.slot_end(p.slots[j])
    idx1 = [(i + 1 + t) % n for t in range((j - i) % n)]
    idx2 = [(j + 1 + t) % n for t in range((i - j) % n)]
    cross = set(polygon_crossings(M, p))
    wall = None
    junction1 = junction2 = None
    if p.junction is not None:
        if len(idx1) == 1:
            inner, junction2 = idx1, p.junction
        elif len(idx2) == 1:
            inner, junction1 = idx2, p.junction
        else:
            raise PatternMismatch("an edge added to a junction polygon must cut off a single leg")
        s = p.slots[inner[0]]
        label = M.edges[s[0]].wall[0]
        into_p = M.flow(s) > 0
        # the leg runs from the 2-gon into the junction side when it enters p there
        target_is_p2 = (junction2 is not None) == into_p
        wall = (label, 1 if target_is_p2 else -1)
    elif cross:
        entry = next(k for k in cross if M.flow(p.slots[k]) > 0)
        exit_ = next(k for k in cross if M.flow(p.slots[k]) < 0)
        if (entry in idx1) != (exit_ in idx1):
            label = M.edges[p.slots[entry][0]].wall[0]
            wall = (label, 1 if exit_ in idx2 else -1)
    edges = list(M.edges)
    f = len(edges)
    edges.append(Edge(u, v, wall))
    p1 = Polygon(tuple(p.slots[k] for k in idx1) + ((f, -1),),
                 tuple(p.corners[k] for k in idx1) + (p.corners[i],), junction1)
    p2 = Polygon(tuple(p.slots[k] for k in idx2) + ((f, 1),),
                 tuple(p.corners[k] for k in idx2) + (p.corners[j],), junction2)
    polys = list(M.polygons)
    polys[pi] = p1
    polys.append(p2)
    return DecoratedSurface(M.vertices, tuple(edges), tuple(polys), M.inputs, M.outputs)


def _split_edge(M: DecoratedSurface, e: int, side: int) -> DecoratedSurface:
    if e in M.boundary_edges():
        raise PatternMismatch("moves never touch boundary edges")
    E = M.edges[e]
    if any(p.junction is not None and any(s[0] == e for s in p.slots) for p in M.polygons):
        raise PatternMismatch("junction polygons keep every edge crossed")
    vdom = M.vertex_domains()
    c = M.vertices
    if E.wall is None and side != 0:
        raise PatternMismatch("side choice only applies to a crossed edge")
    dom = vdom[E.tail] if side == 0 else vdom[E.head]
    edges = list(M.edges)
    # side 0: the new vertex sits next to the tail, so the wall crosses the head half
    w1, w2 = (None, E.wall) if side == 0 else (E.wall, None)
    edges[e] = Edge(E.tail, c, w1)
    e2 = len(edges)
    edges.append(Edge(c, E.head, w2))
    polys = []
    for p in M.polygons:
        slots, corners = [], []
        for s, d in zip(p.slots, p.corners):
            if s[0] != e:
                slots.append(s)
                corners.append(d)
            elif s[1] > 0:
                slots += [(e, 1), (e2, 1)]
                corners += [dom, d]
            else:
                slots += [(e2, -1), (e, -1)]
                corners += [dom, d]
        polys.append(Polygon(tuple(slots), tuple(corners), p.junction))
    return DecoratedSurface(M.vertices + 1, tuple(edges), tuple(polys), M.inputs, M.outputs)


def _remove_edge(M: DecoratedSurface, e: int) -> DecoratedSurface:
    if e in M.boundary_edges():
        raise PatternMismatch("moves never touch boundary edges")
    occ = M.occurrences()[e]
    (pa, ka), (pb, kb) = occ
    if pa == pb:
        raise PatternMismatch("the edge borders a single polygon")
    if M.polygons[pa].slots[ka][1] < 0:
        (pa, ka), (pb, kb) = (pb, kb), (pa, ka)
    P2, P1 = M.polygons[pa], M.polygons[pb]       # P2 holds (e,+), P1 holds (e,-)
    if P1.junction is not None and P2.junction is not None:
        raise PatternMismatch("cannot merge two junction polygons")
    n2, n1 = len(P2.slots), len(P1.slots)
    t_idx = [(ka + 1 + t) % n2 for t in range(n2 - 1)]
    r_idx = [(kb + 1 + t) % n1 for t in range(n1 - 1)]
    slots = tuple(P2.slots[k] for k in t_idx) + tuple(P1.slots[k] for k in r_idx)
    corners = tuple(P2.corners[k] for k in t_idx) + tuple(P1.corners[k] for k in r_idx)
    merged = Polygon(slots, corners, P1.junction or P2.junction)
    polys = [q for k, q in enumerate(M.polygons) if k not in (pa, pb)] + [merged]
    out = _rebuild(M, M.vertices, list(M.edges), polys)
    if not _local_ok(out):
        raise PatternMismatch(f"removing edge {e} gives an invalid polygon")
    return out


def _join_edges(M: DecoratedSurface, c: int) -> DecoratedSurface:
    bnd = M.boundary_edges()
    inc = [(e, end) for e, E in enumerate(M.edges) for end, v in ((0, E.tail), (1, E.head)) if v == c]
    if len(inc) != 2 or inc[0][0] == inc[1][0]:
        raise PatternMismatch("vertex must meet exactly two distinct edges")
    (e1, end1), (e2, end2) = inc
    if e1 in bnd or e2 in bnd:
        raise PatternMismatch("moves never touch boundary edges")
    E1, E2 = M.edges[e1], M.edges[e2]
    if E1.wall is not None and E2.wall is not None:
        raise PatternMismatch("both edges are crossed")
    a = E1.head if end1 == 0 else E1.tail
    b = E2.head if end2 == 0 else E2.tail
    if a == c or b == c:
        raise PatternMismatch("loop at the vertex")
    # orientation of e1, e2 relative to the new edge a -> b
    o1 = 1 if end1 == 1 else -1        # e1 goes a -> c when c is its head
    o2 = 1 if end2 == 0 else -1        # e2 goes c -> b when c is its tail
    wall = None
    if E1.wall is not None:
        wall = (E1.wall[0], E1.wall[1] * o1)
    elif E2.wall is not None:
        wall = (E2.wall[0], E2.wall[1] * o2)
    edges = list(M.edges)
    g = len(edges)
    edges.append(Edge(a, b, wall))
    polys = []
    for p in M.polygons:
        n = len(p.slots)
        keep_s, keep_c = [], []
        skip = set()
        for k in range(n):
            s, t = p.slots[k], p.slots[(k + 1) % n]
            if M.slot_end(s) == c and {s[0], t[0]} == {e1, e2}:
                skip.add(k)
        for k in range(n):
            s = p.slots[k]
            if s[0] not in (e1, e2):
                keep_s.append(s)
                keep_c.append(p.corners[k])
            elif k in skip:
                sign = (o1 if s[0] == e1 else o2) * s[1]
                keep_s.append((g, sign))
                keep_c.append(p.corners[(k + 1) % n])
        polys.append(Polygon(tuple(keep_s), tuple(keep_c), p.junction))
    out = _rebuild(M, M.vertices, edges, polys)
    if not _local_ok(out):
        raise PatternMismatch(f"joining the edges at vertex {c} fails")
    return out


def _unbigon(M: DecoratedSurface, c: int) -> DecoratedSurface:
    """Inverse of bigon insertion at a vertex of degree two between two triangles."""
    bnd = M.boundary_edges()
    inc = [e for e, E in enumerate(M.edges) if c in (E.tail, E.head)]
    if len(inc) != 2 or any(e in bnd for e in inc):
        raise PatternMismatch("vertex must meet exactly two interior edges")
    if any(M.edges[e].tail == M.edges[e].head for e in inc):
        raise PatternMismatch("loop at the vertex")
    tri = [pi for pi, p in enumerate(M.polygons) if any(s[0] in inc for s in p.slots)]
    if len(tri) != 2 or any(len(M.polygons[pi].slots) != 3 or M.polygons[pi].junction
                            or sum(s[0] in inc for s in M.polygons[pi].slots) != 2 for pi in tri):
        raise PatternMismatch("vertex must sit between two triangles")
    third = []
    for pi in tri:
        p = M.polygons[pi]
        k = next(k for k, s in enumerate(p.slots) if s[0] not in inc)
        third.append((p.slots[k], p.corners[k]))
    (s0, d0), (s1, d1) = third
    merged = Polygon((s0, s1), (d0, d1))
    polys = [q for k, q in enumerate(M.polygons) if k not in tri] + [merged]
    out = _rebuild(M, M.vertices, list(M.edges), polys)
    if not _local_ok(out):
        raise PatternMismatch(f"removing vertex {c} gives an invalid 2-gon")
    return out


def apply_move(M: DecoratedSurface, move: Move) -> DecoratedSurface:
    k, a = move.kind, move.args
    try:
        if k == "bigon":
            out = _bigon(M, *a)
        elif k == "add_edge":
            out = _add_edge(M, *a)
        elif k == "split_edge":
            out = _split_edge(M, *a)
        elif k == "remove_edge":
            out = _remove_edge(M, *a)
        elif k == "join_edges":
            out = _join_edges(M, *a)
        elif k == "unbigon":
            out = _unbigon(M, *a)
        else:
            raise PatternMismatch(f"unknown move {k!r}")
    except (IndexError, KeyError, StopIteration) as exc:
        raise PatternMismatch(f"{move}: {exc}") from None
    bad = structural_violations(out)
    if bad:
        raise PatternMismatch(f"{move}: {bad[0]}")
    return out


def applicable_moves(M: DecoratedSurface, inverse: bool = True) -> list[Move]:
    """Every move whose left-hand pattern matches somewhere in M."""
    out = []
    for pi, p in enumerate(M.polygons):
        crossed = bool(polygon_crossings(M, p))
        if len(p.slots) == 2 and p.junction is None:
            out += [Move("bigon", (pi, side)) for side in ((0, 1) if crossed else (0,))]
        n = len(p.slots)
        for i in range(n):
            for j in range(i + 1, n):
                if p.junction is not None and (j - i) % n not in (1, n - 1):
                    continue
                out.append(Move("add_edge", (pi, i, j)))
    for e in M.interior_edges():
        out += [Move("split_edge", (e, side)) for side in ((0, 1) if M.edges[e].wall else (0,))]
    if inverse:
        out += [Move("remove_edge", (e,)) for e in M.interior_edges()]
        out += [Move("join_edges", (v,)) for v in range(M.vertices)]
        out += [Move("unbigon", (v,)) for v in range(M.vertices)]
    ok = []
    for mv in out:
        try:
            apply_move(M, mv)
        except PatternMismatch:
            continue
        ok.append(mv)
    return ok


# ---------------------------------------------------------------- isomorphism

def _encode_from(M: DecoratedSurface, start_poly: int, start_slot: int, polys: set | None = None):
    """Canonical encoding of the component of ``start_poly`` by breadth-first search."""
    occ = M.occurrences()
    pidx, eidx, vidx = {}, {}, {}
    edge_or = {}          # edge -> orientation of its first occurrence
    queue = deque([(start_poly, start_slot)])
    pidx[start_poly] = 0
    order = []
    while queue:
        pi, k0 = queue.popleft()
        p = M.polygons[pi]
        n = len(p.slots)
        words = []
        for t in range(n):
            k = (k0 + t) % n
            e, o = p.slots[k]
            if e not in eidx:
                eidx[e] = len(eidx)
                edge_or[e] = o
            v = M.slot_end((e, o))
            if v not in vidx:
                vidx[v] = len(vidx)
            rel = o * edge_or[e]
            w = M.edges[e].wall
            wall = None if w is None else (w[0], w[1] * edge_or[e])
            words.append((eidx[e], rel, vidx[v], p.corners[k], wall))
            for qi, qk in occ[e]:
                if qi not in pidx:
                    pidx[qi] = len(pidx)
                    queue.append((qi, qk))
        order.append((pidx[pi], tuple(words), p.junction))
    return tuple(sorted(order)), eidx, vidx


def canonical_form(M: DecoratedSurface):
    """An invariant that agrees exactly for isomorphic decorated surfaces.

    Components touching the boundary are traversed from the first slot of
    their first boundary circle, so the boundary parametrisation is fixed.
    Closed components take the least encoding over all starting slots.
    """
    occ = M.occurrences()
    comps = M.components()
    comp_of = {p: ci for ci, c in enumerate(comps) for p in c}
    atts = [("in", i, a) for i, a in enumerate(M.inputs)] + [("out", i, a) for i, a in enumerate(M.outputs)]
    circ_codes = []
    encoded = {}
    for side, i, a in atts:
        e0 = a.edges[0]
        pi, k = occ[e0][0]
        ci = comp_of[pi]
        if ci not in encoded:
            code, eidx, vidx = _encode_from(M, pi, k)
            encoded[ci] = (code, eidx)
        code, eidx = encoded[ci]
        circ_codes.append((side, i, a.circle, ci, tuple(eidx[e] for e in a.edges)))
    # relabel components by first appearance along the boundary
    comp_order = []
    for c in circ_codes:
        if c[3] not in comp_order:
            comp_order.append(c[3])
    bcodes = tuple((s, i, circ, comp_order.index(ci), edges) for s, i, circ, ci, edges in circ_codes)
    bparts = tuple(encoded[ci][0] for ci in comp_order)
    closed = []
    for ci, comp in enumerate(comps):
        if ci in encoded:
            continue
        best = None
        for pi in sorted(comp):
            for k in range(len(M.polygons[pi].slots)):
                code = _encode_from(M, pi, k)[0]
                key = repr(code)
                if best is None or key < best[0]:
                    best = (key, code)
        closed.append(best[0])
    return (bparts, bcodes, tuple(sorted(closed)))


def isomorphic(M: DecoratedSurface, N: DecoratedSurface) -> bool:
    return canonical_form(M) == canonical_form(N)


# ---------------------------------------------------------------- library

def identity_disc(sig, word):
    """The identity 2-morphism of ``word`` as a disc bounded by O(word word*)."""
    word = tuple(word)
    return chord_disc(sig, circle_from_word(sig, word + dual_word(word)))


def standard_bordisms(sig: DefectSignature) -> dict:
    """Named library of validated surfaces built from the labels in ``sig``."""
    lib = {}
    for a in sorted(sig.domains):
        lib[f"cylinder[{a}]"] = cylinder(sig, BoundaryCircle((Plain(a), Plain(a))))
        lib[f"disc[{a}]"] = plain_disc(sig, a)
        lib[f"torus[{a}]"] = torus(sig, domain=a)
    for x in sorted(sig.walls):
        w = sig.wall(x)
        lib[f"annulus[{x}]"] = defect_annulus(sig, x)
        lib[f"cylinder[{x}]"] = cylinder(sig, circle_from_word(sig, ((x, 1), (x, -1))))
        lib[f"identity[{x}]"] = identity_disc(sig, ((x, 1),))
        lib[f"cup_annulus[{x}]"] = ring(sig, BoundaryCircle((Plain(w.target),)),
                                       circle_from_word(sig, ((x, 1), (x, -1))), [(1, 2)])
        if w.source == w.target:
            lib[f"torus[{x}]"] = torus(sig, x)
            lib[f"torus_annulus[{x}]"] = torus(sig, x, cut="annulus")
    for u in sorted(sig.junctions):
        lib[f"junction[{u}]"] = junction_disc(sig, u)
    for name, M in lib.items():
        bad = validate(sig, M)
        if bad:
            raise ValidationFailed([f"{name}: {m}" for m in bad])
    return lib
