"""One-dimensional field theory with domain walls.

Each label i in D_1 carries a vector space V_i of dimension ``dims[i]``.
A wall label x in D_0 has a source s(x) and target t(x), and two maps
L_x^+ : V_s(x) → V_t(x) and L_x^- : V_t(x) → V_s(x). A marked point with
sign + has s(x) on the left and t(x) on the right in the direction of
traversal, so reading it costs L_x^+.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import exactlin as el


class LabelMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Wall:
    source: str
    target: str
    plus: np.ndarray    # dim V_t × dim V_s
    minus: np.ndarray   # dim V_s × dim V_t


@dataclass
class OneDimTheory:
    dims: dict
    walls: dict = field(default_factory=dict)

    def __post_init__(self):
        for x, w in self.walls.items():
            s, t = self.dims.get(w.source), self.dims.get(w.target)
            if s is None or t is None:
                raise LabelMismatch(f"wall {x!r} uses an unknown point label")
            if w.plus.shape != (t, s) or w.minus.shape != (s, t):
                raise LabelMismatch(f"wall {x!r}: maps have shapes {w.plus.shape}, {w.minus.shape}")

    @property
    def field(self):
        return el.field_of(*[w.plus for w in self.walls.values()]) if self.walls else el.QQ

    def step(self, x: str, sign: int) -> tuple[str, str, np.ndarray]:
        """(label before, label after, matrix) for crossing (x, sign)."""
        try:
            w = self.walls[x]
        except KeyError:
            raise LabelMismatch(f"unknown wall label {x!r}") from None
        if sign > 0:
            return w.source, w.target, w.plus
        return w.target, w.source, w.minus

    def chain(self, start: str, points) -> tuple[str, np.ndarray]:
        cur = start
        m = el.identity(self.dims[start], self.field)
        for x, sign in points:
            before, after, L = self.step(x, sign)
            if before != cur:
                raise LabelMismatch(f"point ({x}, {sign:+d}) expects {before!r} but the segment is {cur!r}")
            m = np.dot(L, m)
            cur = after
        return cur, m


@dataclass(frozen=True)
class Interval:
    start: str
    points: tuple = ()
    end: str | None = None


@dataclass(frozen=True)
class Circle:
    points: tuple = ()
    label: str | None = None   # needed only when there are no points


@dataclass(frozen=True)
class OneDimDiagram:
    components: tuple = ()


def evaluate_1d(th: OneDimTheory, d: OneDimDiagram) -> tuple[np.ndarray, object]:
    """Return (matrix of the open part, scalar of the closed part).

    The matrix is the Kronecker product over intervals in order; with no
    intervals it is the 1×1 identity.
    """
    mat = el.identity(1, th.field)
    scalar = th.field(1)
    for c in d.components:
        if isinstance(c, Interval):
            if c.start not in th.dims:
                raise LabelMismatch(f"unknown label {c.start!r}")
            end, m = th.chain(c.start, c.points)
            if c.end is not None and c.end != end:
                raise LabelMismatch(f"interval ends in {end!r}, declared {c.end!r}")
            mat = el.kron(mat, m)
        else:
            scalar = scalar * circle_value(th, c)
    return mat, scalar


def circle_value(th: OneDimTheory, c: Circle):
    if not c.points:
        if c.label not in th.dims:
            raise LabelMismatch(f"circle label {c.label!r} unknown")
        return th.field(th.dims[c.label])
    start = th.step(*c.points[0])[0]
    end, m = th.chain(start, c.points)
    if end != start:
        raise LabelMismatch("circle labels do not close up")
    if c.label is not None and c.label != start:
        raise LabelMismatch(f"circle base label {c.label!r} differs from {start!r}")
    return sum((m[i, i] for i in range(m.shape[0])), th.field(0))
