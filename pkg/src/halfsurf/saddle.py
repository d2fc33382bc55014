"""Straight-line tracing and saddle connection enumeration.

Developed coordinates are kept as integers by scaling every holonomy with
the surface's common denominator, which keeps the inner loops fast while
remaining exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable

from .errors import BudgetExceeded, DomainError
from .surface import Surface
from .vec import Vec, angle, cross, dot, length, norm2, unoriented

DEFAULT_BUDGET = 3_000_000


class NotASaddleConnection(DomainError):
    pass


@dataclass(frozen=True)
class Crossing:
    """The segment leaves a triangle through ``side`` at parameter ``mu``
    along that side, moving with ``direction`` in the frame of the triangle
    it leaves."""

    side: int
    mu: Fraction
    direction: Vec


@dataclass(frozen=True, eq=False)
class SaddleConnection:
    """A straight segment between vertices with no vertex in its interior.

    ``start`` is a side whose starting corner holds the initial germ and
    ``vector`` is the holonomy in that triangle's frame; ``end`` and
    ``end_vector`` describe the reversed segment the same way.
    """

    surface: Surface = field(repr=False)
    start: int
    vector: Vec
    end: int
    end_vector: Vec
    start_vertex: int
    end_vertex: int

    @property
    def length2(self) -> Fraction:
        return norm2(self.vector)

    @property
    def length(self) -> float:
        return length(self.vector)

    @property
    def holonomy(self) -> Vec:
        """Unoriented holonomy, normalized to angle in [0, pi)."""
        return unoriented(self.vector)

    @property
    def angle(self) -> float:
        return angle(self.vector)

    @cached_property
    def _walk(self):
        return _walk(self.surface, self.start, self.vector)

    @property
    def crossings(self) -> tuple[Crossing, ...]:
        return self._walk[2]

    @property
    def edge_path(self) -> tuple[tuple[int, int], ...]:
        """Oriented edges (edge id, +-1) of a homotopic path along the triangulation."""
        return self._walk[3]

    @property
    def is_edge(self) -> bool:
        return not self.crossings

    @property
    def key(self) -> tuple:
        a = (self.start, self.vector[0], self.vector[1])
        b = (self.end, self.end_vector[0], self.end_vector[1])
        return min(a, b)

    @property
    def oriented_key(self) -> tuple:
        return (self.start, self.vector[0], self.vector[1])

    def reverse(self) -> "SaddleConnection":
        return SaddleConnection(self.surface, self.end, self.end_vector, self.start, self.vector,
                                self.end_vertex, self.start_vertex)

    def sort_key(self) -> tuple:
        return (self.length2, self.angle, self.key)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SaddleConnection):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        h = self.holonomy
        return f"SaddleConnection(({h[0]},{h[1]}), v{self.start_vertex}-v{self.end_vertex})"


def _icross(ax, ay, bx, by):
    return ax * by - ay * bx


def locate_corner(surface: Surface, s: int, v: Vec) -> tuple[int, Vec]:
    """Move the germ ``v`` (in the frame of ``s``'s triangle) to the corner at
    the same vertex whose half-open wedge ``[first ray, second ray)`` holds it.

    Rotation proceeds counterclockwise from ``s``; two turns suffice even
    at cone points of angle ``pi``."""
    hol = surface.hol
    n_corners = len(surface.corners_around(surface.vertex_of[s]))
    side, c = s, 1
    for _ in range(2 * n_corners):
        w = (c * v[0], c * v[1])
        lo = hol[side]
        hi = hol[surface.prv[side]]
        hi = (-hi[0], -hi[1])
        cl = cross(lo, w)
        if cl == 0 and dot(lo, w) > 0:
            return side, w
        if cl > 0 and cross(w, hi) > 0:
            return side, w
        p = surface.prv[side]
        c *= surface.sign[p]
        side = surface.partner[p]
    raise NotASaddleConnection("direction not found around vertex")


def _walk(surface: Surface, s: int, v: Vec):
    """Exact walk of the segment ``v`` from the corner at ``s``.

    Returns ``(end side, frame, crossings, edge path)``."""
    d0 = surface.int_frame[0]
    den = math.lcm(d0, v[0].denominator, v[1].denominator)
    k = den // d0
    ih = surface.int_frame[1]
    vx, vy = int(v[0] * den), int(v[1] * den)
    nxt, prv, partner, sign, edge_id = surface.nxt, surface.prv, surface.partner, surface.sign, surface.edge_id

    def oriented(side: int, orientation: int) -> tuple[int, int]:
        e = edge_id(side)
        return (e, orientation if e == side else -orientation)

    hx, hy = ih[s][0] * k, ih[s][1] * k
    if _icross(hx, hy, vx, vy) == 0:
        if (hx, hy) == (vx, vy):
            return surface.partner[s], 1, (), (oriented(s, 1),)
        raise NotASaddleConnection("segment along an edge does not stop at its vertex")
    p = prv[s]
    rx, ry = hx, hy
    lx, ly = -ih[p][0] * k, -ih[p][1] * k
    path = [oriented(p, -1)]
    crossings = []
    e = nxt[s]
    c = 1
    vsq = vx * vx + vy * vy
    while True:
        dx, dy = lx - rx, ly - ry
        dn = _icross(vx, vy, dx, dy)
        lam_num = _icross(rx, ry, dx, dy)
        if lam_num >= dn:
            raise NotASaddleConnection("segment ends inside a triangle")
        crossings.append(Crossing(e, Fraction(_icross(rx, ry, vx, vy), dn), (c * v[0], c * v[1])))
        ep = partner[e]
        c *= sign[e]
        f = nxt[ep]
        g = nxt[f]
        xx, xy = rx + c * ih[f][0] * k, ry + c * ih[f][1] * k
        side_x = _icross(vx, vy, xx, xy)
        if side_x == 0:
            if (xx, xy) != (vx, vy):
                raise NotASaddleConnection("segment meets a vertex in its interior"
                                           if xx * vx + xy * vy < vsq else "segment ends inside a triangle")
            path.append(oriented(g, -1))
            return g, c, tuple(crossings), tuple(path)
        if side_x > 0:
            path.append(oriented(g, -1))
            lx, ly, e = xx, xy, f
        else:
            rx, ry, e = xx, xy, g


def trace(surface: Surface, s: int, v: Vec) -> SaddleConnection:
    """Saddle connection with holonomy ``v`` leaving the start vertex of ``s``.

    Raises ``NotASaddleConnection`` if the segment runs through a vertex or
    ends away from one."""
    v = (Fraction(v[0]), Fraction(v[1]))
    if v == (0, 0):
        raise NotASaddleConnection("zero vector")
    s, v = locate_corner(surface, s, v)
    end, c, _, _ = _walk(surface, s, v)
    if end == surface.partner[s] and v == surface.hol[s]:
        end_vector = surface.hol[end]
    else:
        end_vector = (-c * v[0], -c * v[1])
    return SaddleConnection(surface, s, v, end, end_vector, surface.vertex_of[s], surface.vertex_of[end])


def edge_connection(surface: Surface, s: int) -> SaddleConnection:
    p = surface.partner[s]
    return SaddleConnection(surface, s, surface.hol[s], p, surface.hol[p],
                            surface.vertex_of[s], surface.vertex_of[p])


class Budget:
    def __init__(self, cap: int = DEFAULT_BUDGET):
        self.cap = cap
        self.used = 0

    def spend(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.cap:
            raise BudgetExceeded(f"explored more than {self.cap} developed triangles")


def _far(rx, ry, lx, ly, lnum, lden) -> bool:
    """Is the segment from r to l entirely farther than sqrt(lnum/lden)?"""
    dx, dy = lx - rx, ly - ry
    if rx * dx + ry * dy >= 0:
        return (rx * rx + ry * ry) * lden > lnum
    if lx * dx + ly * dy <= 0:
        return (lx * lx + ly * ly) * lden > lnum
    cr = rx * dy - ry * dx
    return cr * cr * lden > lnum * (dx * dx + dy * dy)


def explore_corner(surface: Surface, s: int, limit2, budget: Budget | None = None,
                   lo: Vec | None = None, hi: Vec | None = None) -> list[tuple[Vec, int, int]]:
    """Vertices visible from the corner at the start of ``s`` within squared
    distance ``limit2``.

    Returns ``(position, end side, frame)`` triples: ``position`` is the
    developed holonomy in the frame of ``s``, ``end side`` the side whose
    starting corner receives the reversed segment and ``frame`` the sign
    taking that triangle's vectors into the frame of ``s``.  The corner's
    first ray (the side ``s`` itself) is included; ``lo``/``hi`` optionally
    narrow the open wedge."""
    budget = budget or Budget()
    d0, ih = surface.int_frame
    lim = Fraction(limit2) * d0 * d0
    lnum, lden = lim.numerator, lim.denominator
    nxt, prv, partner, sign = surface.nxt, surface.prv, surface.partner, surface.sign
    qx, qy = ih[s]
    p = prv[s]
    rx, ry = -ih[p][0], -ih[p][1]
    out = []
    if lo is None:
        if (qx * qx + qy * qy) * lden <= lnum:
            out.append(((qx, qy), partner[s], 0))
        wlo = (qx, qy)
    else:
        wlo = (int(lo[0] * d0), int(lo[1] * d0)) if _integral(lo, d0) else _scale_dir(lo)
    if hi is None:
        whi = (rx, ry)
    else:
        whi = (int(hi[0] * d0), int(hi[1] * d0)) if _integral(hi, d0) else _scale_dir(hi)
    stack = [(nxt[s], qx, qy, rx, ry, 1, wlo[0], wlo[1], whi[0], whi[1])]
    spent = 0
    while stack:
        e, rx, ry, lx, ly, c, ax, ay, bx, by = stack.pop()
        spent += 1
        if _far(rx, ry, lx, ly, lnum, lden):
            continue
        ep = partner[e]
        c2 = c * sign[e]
        f = nxt[ep]
        g = nxt[f]
        hf = ih[f]
        xx, xy = rx + c2 * hf[0], ry + c2 * hf[1]
        after_lo = ax * xy - ay * xx > 0
        before_hi = xx * by - xy * bx > 0
        if after_lo and before_hi and (xx * xx + xy * xy) * lden <= lnum:
            out.append(((xx, xy), g, c2))
        if after_lo:
            if before_hi:
                stack.append((f, rx, ry, xx, xy, c2, ax, ay, xx, xy))
            else:
                stack.append((f, rx, ry, xx, xy, c2, ax, ay, bx, by))
        if before_hi:
            if after_lo:
                stack.append((g, xx, xy, lx, ly, c2, xx, xy, bx, by))
            else:
                stack.append((g, xx, xy, lx, ly, c2, ax, ay, bx, by))
    budget.spend(spent)
    return [((Fraction(x, d0), Fraction(y, d0)), end, c) for (x, y), end, c in out]


def _integral(v: Vec, d0: int) -> bool:
    return (v[0] * d0).denominator == 1 and (v[1] * d0).denominator == 1


def _scale_dir(v: Vec) -> tuple[int, int]:
    m = math.lcm(Fraction(v[0]).denominator, Fraction(v[1]).denominator)
    return int(v[0] * m), int(v[1] * m)


def connections_from_corner(surface: Surface, s: int, limit2, budget: Budget | None = None,
                            lo: Vec | None = None, hi: Vec | None = None) -> list[SaddleConnection]:
    out = []
    for x, end, c in explore_corner(surface, s, limit2, budget, lo, hi):
        if c == 0:
            out.append(edge_connection(surface, s))
        else:
            out.append(SaddleConnection(surface, s, x, end, (-c * x[0], -c * x[1]),
                                        surface.vertex_of[s], surface.vertex_of[end]))
    return out


def enumerate_saddle_connections(surface: Surface, max_length, budget: int = DEFAULT_BUDGET,
                                 oriented: bool = False) -> list[SaddleConnection]:
    """All saddle connections of length at most ``max_length``.

    The result is duplicate free, with ``v`` and ``-v`` identified unless
    ``oriented`` is set, sorted by length and then by the angle of the
    unoriented direction.
    """
    L = Fraction(max_length)
    if L <= 0:
        raise ValueError("max_length must be positive")
    limit2 = L * L
    tracker = Budget(budget)
    found: dict[tuple, SaddleConnection] = {}
    for s in range(surface.n_sides):
        for sc in connections_from_corner(surface, s, limit2, tracker):
            found.setdefault(sc.oriented_key if oriented else sc.key, sc)
    return sorted(found.values(), key=SaddleConnection.sort_key)


def systole(surface: Surface) -> Fraction:
    """Squared length of the shortest saddle connection."""
    best = min(norm2(v) for v in surface.hol)
    bound = Fraction(math.isqrt(math.ceil(best)) + 1) if best >= 1 else _upper_sqrt(best)
    return min(sc.length2 for sc in enumerate_saddle_connections(surface, bound))


def _upper_sqrt(x: Fraction) -> Fraction:
    r = Fraction(math.isqrt(x.numerator * x.denominator) + 1, x.denominator)
    assert r * r >= x
    return r


def length_spectrum(surface: Surface, max_length) -> list[Fraction]:
    """Sorted squared lengths of all saddle connections up to ``max_length``."""
    return sorted(sc.length2 for sc in enumerate_saddle_connections(surface, max_length))


def connections_from_edges(surface: Surface, sides: Iterable[int] | None = None) -> list[SaddleConnection]:
    sides = surface.edges if sides is None else sides
    return [edge_connection(surface, s) for s in sides]


# germs ---------------------------------------------------------------------
#
# A germ is a pair (side, vector): a direction leaving the starting vertex of
# ``side``, expressed in the frame of that side's triangle and lying in the
# corner's half-open wedge.


def same_direction(v: Vec, w: Vec) -> bool:
    return cross(v, w) == 0 and dot(v, w) > 0


def perp(v: Vec) -> Vec:
    """Counterclockwise quarter turn."""
    return (-v[1], v[0])


def perp_cw(v: Vec) -> Vec:
    return (v[1], -v[0])


def locate_corner_cw(surface: Surface, s: int, v: Vec) -> tuple[int, Vec]:
    """Clockwise counterpart of ``locate_corner``."""
    hol = surface.hol
    n_corners = len(surface.corners_around(surface.vertex_of[s]))
    side, c = s, 1
    for _ in range(2 * n_corners):
        w = (c * v[0], c * v[1])
        lo = hol[side]
        hi = hol[surface.prv[side]]
        hi = (-hi[0], -hi[1])
        cl = cross(lo, w)
        if cl == 0 and dot(lo, w) > 0:
            return side, w
        if cl > 0 and cross(w, hi) > 0:
            return side, w
        q = surface.partner[side]
        c *= surface.sign[q]
        side = surface.nxt[q]
    raise NotASaddleConnection("direction not found around vertex")


def quarter_turn(surface: Surface, germ: tuple[int, Vec], turns: int = 1) -> tuple[int, Vec]:
    """Rotate a germ counterclockwise (negative ``turns``: clockwise) by
    multiples of a right angle, following the cone angle at its vertex."""
    side, v = germ
    for _ in range(abs(turns)):
        if turns > 0:
            side, v = locate_corner(surface, side, perp(v))
        else:
            side, v = locate_corner_cw(surface, side, perp_cw(v))
    return side, v


def _half(d0: Vec, v: Vec) -> int:
    c = cross(d0, v)
    return 0 if c > 0 or (c == 0 and dot(d0, v) > 0) else 1


def _within(base: Vec, v: Vec) -> tuple:
    c = cross(base, v)
    if c == 0:
        return (0, Fraction(0))
    return (1, -Fraction(dot(base, v)) / c)


def turn_key(surface: Surface, g1: tuple[int, Vec], g2: tuple[int, Vec]) -> tuple:
    """Exact sortable key of the counterclockwise angle from ``g1`` to ``g2``
    at a common vertex: ``(half turns, position inside the last half turn)``.
    Equal germs give the smallest key."""
    s1, v1 = g1
    s2, v2 = g2
    if surface.vertex_of[s1] != surface.vertex_of[s2]:
        raise ValueError("germs at different vertices")
    hol, prv, partner, sign = surface.hol, surface.prv, surface.partner, surface.sign
    if s1 == s2 and (same_direction(v1, v2) or cross(v1, v2) > 0):
        return (0, _within(v1, v2))
    switches = 0
    h = 0
    side, c = s1, 1
    n = len(surface.corners_around(surface.vertex_of[s1]))
    for _ in range(n + 2):
        p = prv[side]
        ray = (-c * hol[p][0], -c * hol[p][1])
        hr = _half(v1, ray)
        if hr != h:
            switches += 1
            h = hr
        c *= sign[p]
        side = partner[p]
        if side == s2:
            w = (c * v2[0], c * v2[1])
            hw = _half(v1, w)
            if hw != h:
                switches += 1
                h = hw
            base = v1 if switches % 2 == 0 else (-v1[0], -v1[1])
            return (switches, _within(base, w))
    raise ValueError("second germ not found around vertex")


def turn_angle(surface: Surface, g1, g2) -> float:
    k, (flag, val) = turn_key(surface, g1, g2)
    if flag == 0:
        rest = 0.0
    else:
        rest = math.atan2(1.0, -float(val))
    return k * math.pi + rest


def start_germ(sc: SaddleConnection) -> tuple[int, Vec]:
    return (sc.start, sc.vector)


def end_germ(sc: SaddleConnection) -> tuple[int, Vec]:
    return (sc.end, sc.end_vector)


def shoot(surface: Surface, germ: tuple[int, Vec], max_length) -> SaddleConnection | None:
    """Follow the ray from ``germ`` to the first vertex it meets; ``None`` if
    no vertex is met within ``max_length``."""
    s, v = germ
    hol = surface.hol
    nxt, partner, sign = surface.nxt, surface.partner, surface.sign
    lim2 = Fraction(max_length) ** 2 * norm2(v)
    if same_direction(hol[s], v):
        if norm2(hol[s]) * norm2(v) <= lim2:
            return edge_connection(surface, s)
        return None
    p = surface.prv[s]
    r = hol[s]
    l = (-hol[p][0], -hol[p][1])
    e = nxt[s]
    c = 1
    while True:
        ep = partner[e]
        c *= sign[e]
        f = nxt[ep]
        g = nxt[f]
        hf = hol[f]
        x = (r[0] + c * hf[0], r[1] + c * hf[1])
        sx = cross(v, x)
        if sx == 0 and dot(v, x) > 0:
            if dot(v, x) ** 2 > lim2:
                return None
            return SaddleConnection(surface, s, x, g, (-c * x[0], -c * x[1]),
                                    surface.vertex_of[s], surface.vertex_of[g])
        if sx > 0:
            l, e = x, f
        else:
            r, e = x, g
        near = min(dot(v, r), dot(v, l))
        if near > 0 and near * near > lim2:
            return None


def oriented_chain_closed(chain: list[SaddleConnection]) -> bool:
    return all(chain[i].end_vertex == chain[(i + 1) % len(chain)].start_vertex for i in range(len(chain)))
