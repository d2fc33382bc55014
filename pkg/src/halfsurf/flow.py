"""Linear action on holonomy, edge flips, Delaunay retriangulation and the
diagonal flow."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DegenerateTriangle, DomainError
from .saddle import SaddleConnection, edge_connection, locate_corner
from .surface import Surface, relabel_marked
from .vec import Vec, cross, mat_apply, norm2, vadd, vscale

MAX_STEP = Fraction(2)


@dataclass(frozen=True)
class FlowMatrix:
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    def __post_init__(self) -> None:
        for k in "abcd":
            object.__setattr__(self, k, Fraction(getattr(self, k)))
        if self.det not in (1, -1):
            raise DomainError(f"determinant {self.det} is not +-1")

    @property
    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    @property
    def entries(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.a, self.b, self.c, self.d)

    @classmethod
    def diag(cls, lam) -> "FlowMatrix":
        lam = Fraction(lam)
        return cls(lam, 0, 0, 1 / lam)

    def __matmul__(self, other: "FlowMatrix") -> "FlowMatrix":
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        return FlowMatrix(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _as_matrix(m) -> FlowMatrix:
    if isinstance(m, FlowMatrix):
        return m
    if len(m) == 2:
        (a, b), (c, d) = m
    else:
        a, b, c, d = m
    return FlowMatrix(a, b, c, d)


def apply_matrix(surface: Surface, m) -> Surface:
    """Replace every holonomy vector ``v`` by ``M v``.

    Orientation reversing matrices also reverse each triangle's side order,
    which negates every vector; gluing signs are unaffected by that gauge."""
    m = _as_matrix(m)
    ent = m.entries
    hol = [mat_apply(ent, v) for v in surface.hol]
    if m.det == 1:
        out = surface.with_holonomy(hol)
    else:
        hol = [vscale(-1, v) for v in hol]
        tris = tuple((c, b, a) for a, b, c in surface.triangles)
        probe = surface.replace(triangles=tris, hol=tuple(hol), marked=frozenset())
        marked = frozenset(probe.vertex_of[s] for s in range(surface.n_sides)
                           if surface.end_vertex(s) in surface.marked)
        out = probe.replace(marked=marked)
    for t in range(out.n_triangles):
        if out.triangle_area2(t) <= 0:
            raise DegenerateTriangle(f"triangle {t} degenerates", simplex=("triangle", t))
    return out


# flips -----------------------------------------------------------------------


@dataclass(frozen=True)
class FlipRecord:
    """Data needed to carry corners across a single flip of edge ``s``."""

    s: int
    sp: int
    a: int
    b: int
    c: int
    d: int
    frame: int


def _quad(surface: Surface, s: int):
    """Developed quadrilateral ``P X Q R`` around the edge through ``s``.

    ``s`` runs P->Q in triangle ``(s, a, b)``; the opposite triangle
    ``(s', c, d)`` is brought into that frame by ``frame``."""
    sp = surface.partner[s]
    if surface.tri_of(s) == surface.tri_of(sp):
        return None
    a, b = surface.nxt[s], surface.prv[s]
    c, d = surface.nxt[sp], surface.prv[sp]
    f = surface.sign[s]
    return sp, a, b, c, d, f


def incircle(surface: Surface, s: int) -> Fraction | None:
    """Exact incircle determinant of the far vertex of the quadrilateral
    against the triangle of ``s``; positive means strictly inside."""
    q = _quad(surface, s)
    if q is None:
        return None
    sp, a, b, c, d, f = q
    h = surface.hol
    qx, qy = h[s]
    rx, ry = vadd(h[s], h[a])
    xx, xy = vscale(f, h[c])
    # P is the origin; the expansion below tests P against Q R X, which
    # has the opposite sign of X against P Q R
    return -((qx * qx + qy * qy) * cross((rx, ry), (xx, xy))
             - (rx * rx + ry * ry) * cross((qx, qy), (xx, xy))
             + (xx * xx + xy * xy) * cross((qx, qy), (rx, ry)))


def is_delaunay_edge(surface: Surface, s: int) -> bool:
    val = incircle(surface, s)
    return val is None or val <= 0


def is_delaunay(surface: Surface) -> bool:
    return all(is_delaunay_edge(surface, e) for e in surface.edges)


def can_flip(surface: Surface, s: int) -> bool:
    q = _quad(surface, s)
    if q is None:
        return False
    sp, a, b, c, d, f = q
    h = surface.hol
    n1 = vscale(-1, vadd(h[b], vscale(f, h[c])))
    return cross(h[b], vscale(f, h[c])) > 0 and cross(vscale(f, h[d]), h[a]) > 0 and norm2(n1) > 0


def flip(surface: Surface, s: int) -> tuple[Surface, FlipRecord]:
    """Replace the diagonal through ``s`` by the other diagonal of its
    quadrilateral.  Side ids are reused: ``s`` and its partner become the new
    diagonal, and the opposite triangle adopts the frame of ``s``'s."""
    q = _quad(surface, s)
    if q is None or not can_flip(surface, s):
        raise DegenerateTriangle(f"edge {surface.edge_id(s)} cannot be flipped",
                                 simplex=("edge", surface.edge_id(s)))
    sp, a, b, c, d, f = q
    t, tp = surface.tri_of(s), surface.tri_of(sp)
    hol = list(surface.hol)
    hol[c] = vscale(f, hol[c])
    hol[d] = vscale(f, hol[d])
    n1 = vscale(-1, vadd(hol[b], hol[c]))
    hol[s] = n1
    hol[sp] = vscale(-1, n1)
    tris = list(surface.triangles)
    tris[t] = (b, c, s)
    tris[tp] = (d, a, sp)
    partner = surface.partner
    sign = list(surface.sign)
    for x in (a, b, c, d, s, sp):
        y = partner[x]
        sg = -1 if hol[y] == hol[x] else 1
        sign[x] = sign[y] = sg
    keep = [x for x in range(surface.n_sides) if x not in (s, sp)]
    marked = relabel_marked(surface, tuple(tris), partner, keep)
    out = surface.replace(triangles=tuple(tris), sign=tuple(sign), hol=tuple(hol), marked=marked)
    return out, FlipRecord(s, sp, a, b, c, d, f)


def transport_germ(before: Surface, after: Surface, rec: FlipRecord, side: int, v: Vec) -> tuple[int, Vec]:
    """Corner and vector of a germ after the flip ``rec``."""
    if before.tri_of(side) not in (before.tri_of(rec.s), before.tri_of(rec.sp)):
        return side, v
    if side in (rec.c, rec.d, rec.sp):
        v = vscale(rec.frame, v)
    if side == rec.s:
        side = rec.c
    elif side == rec.sp:
        side = rec.a
    return locate_corner(after, side, v)


def transport(before: Surface, after: Surface, rec: FlipRecord, sc: SaddleConnection) -> SaddleConnection:
    s, v = transport_germ(before, after, rec, sc.start, sc.vector)
    e, w = transport_germ(before, after, rec, sc.end, sc.end_vector)
    return SaddleConnection(after, s, v, e, w, after.vertex_of[s], after.vertex_of[e])


def transport_matrix(after: Surface, m: FlowMatrix, sc: SaddleConnection, reversed_: bool = False) -> SaddleConnection:
    ent = m.entries
    v, w = mat_apply(ent, sc.vector), mat_apply(ent, sc.end_vector)
    if m.det == -1:
        v, w = vscale(-1, v), vscale(-1, w)
        s, v = locate_corner(after, after.nxt[sc.start], v)
        e, w = locate_corner(after, after.nxt[sc.end], w)
    else:
        s, e = sc.start, sc.end
    return SaddleConnection(after, s, v, e, w, after.vertex_of[s], after.vertex_of[e])


# Delaunay ---------------------------------------------------------------------


@dataclass
class FlipLog:
    entries: list[tuple[int, Fraction]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def extend(self, other: "FlipLog") -> None:
        self.entries.extend(other.entries)

    def to_csv(self) -> str:
        lines = ["edge,lambda"]
        lines += [f"{e},{lam}" for e, lam in self.entries]
        return "\n".join(lines) + "\n"


def make_delaunay(surface: Surface, track: Sequence[SaddleConnection] = (), parameter=Fraction(1),
                  max_flips: int = 100_000):
    """Flip non-Delaunay edges, smallest edge id first, until none remain.

    Cocircular quadrilaterals count as Delaunay, so the result is a fixed
    point.  ``track`` lists saddle connections carried along; when given,
    the result is ``(surface, log, tracked)``."""
    log = FlipLog()
    tracked = list(track)
    cur = surface
    for _ in range(max_flips):
        bad = next((e for e in cur.edges if not is_delaunay_edge(cur, e)), None)
        if bad is None:
            break
        nxt, rec = flip(cur, bad)
        tracked = [transport(cur, nxt, rec, sc) for sc in tracked]
        log.entries.append((bad, Fraction(parameter)))
        cur = nxt
    else:
        raise DomainError("Delaunay flips did not terminate")
    if track:
        return cur, log, tracked
    return cur, log


def rational_sqrt_approx(x: Fraction) -> Fraction:
    """Rational within 1% of sqrt(x), strictly between 1 and x when x != 1."""
    r = Fraction(math.sqrt(x)).limit_denominator(10_000)
    if x > 1 and not 1 < r < x:
        r = (1 + x) / 2
    if x < 1 and not x < r < 1:
        r = (1 + x) / 2
    return r


def _steps(lam: Fraction) -> list[Fraction]:
    """Factors multiplying to ``lam`` exactly, each within ``MAX_STEP``."""
    if lam == 1:
        return []
    big = lam if lam > 1 else 1 / lam
    if big <= MAX_STEP:
        return [lam]
    r = rational_sqrt_approx(lam)
    return _steps(r) + _steps(lam / r)


def geodesic_flow(surface: Surface, lam, track: Sequence[SaddleConnection] = ()):
    """Apply ``diag(lam, 1/lam)`` in sub-steps, restoring the Delaunay
    property after each.  Returns ``(surface, log)`` or, when ``track`` is
    given, ``(surface, log, tracked)``."""
    lam = Fraction(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    cur = surface
    log = FlipLog()
    tracked = list(track)
    done = Fraction(1)
    for step in _steps(lam):
        m = FlowMatrix.diag(step)
        nxt = apply_matrix(cur, m)
        tracked = [transport_matrix(nxt, m, sc) for sc in tracked]
        done *= step
        cur, sub, tracked = make_delaunay(nxt, tracked, done) if tracked else (*make_delaunay(nxt, (), done), [])
        log.extend(sub)
    if track:
        return cur, log, tracked
    return cur, log


def triangulation_edges(surface: Surface) -> list[SaddleConnection]:
    return [edge_connection(surface, e) for e in surface.edges]
