"""Cylinders, one sided collars of closed geodesics, extremal length
estimates, short curves and the thick-thin decomposition.

Distances are handled through exact squares wherever possible; only the
user facing lengths are floats.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count
from typing import Iterable, Sequence

import networkx as nx

from .errors import BudgetExceeded, ConstructionFailed, DoesNotCross, NotAGeodesic, SameEndpoint
from .flow import can_flip, flip, transport
from .homology import independent_rank
from .intersections import intersection_number
from .saddle import (SaddleConnection, end_germ, enumerate_saddle_connections, explore_corner, locate_corner,
                     quarter_turn, same_direction, shoot, start_germ, turn_key)
from .surface import Surface, area
from .vec import Vec, cross, dot, norm2, unoriented

EPSILON_0 = Fraction(1, 10)
COLLAR_BUDGET = 200_000
PI_KEY = (1, (0, Fraction(0)))

Germ = tuple[int, Vec]


def _sub(a: Vec, b: Vec) -> Vec:
    return (a[0] - b[0], a[1] - b[1])


def _add(a: Vec, b: Vec) -> Vec:
    return (a[0] + b[0], a[1] + b[1])


def _mul(k, a: Vec) -> Vec:
    return (k * a[0], k * a[1])


def _same_germ(g1: Germ, g2: Germ) -> bool:
    return g1[0] == g2[0] and same_direction(g1[1], g2[1])


# wedges ----------------------------------------------------------------------


def _wedge_corners(surface: Surface, g_lo: Germ, g_hi: Germ):
    """Corners met turning counterclockwise from ``g_lo`` to ``g_hi``.

    Yields ``(side, sign, lo, hi)``: ``sign`` takes vectors of the first
    frame into the corner's frame, ``lo``/``hi`` are the clipping rays in
    the corner's frame or ``None`` for the corner's own rays."""
    s, v = g_lo
    hs, hv = g_hi
    c = 1
    n = len(surface.corners_around(surface.vertex_of[s]))
    first = True
    for _ in range(n + 2):
        lo = v if first else None
        if s == hs and (not first or cross(v, hv) > 0):
            if lo is None and same_direction(surface.hol[s], hv):
                return
            yield s, c, lo, hv
            return
        yield s, c, lo, None
        p = surface.prv[s]
        c *= surface.sign[p]
        s = surface.partner[p]
        first = False
    raise ValueError("wedge end not found around vertex")


@dataclass(frozen=True)
class WedgeHit:
    pos: Vec
    back: Germ
    sign: int


def explore_wedge(surface: Surface, g_lo: Germ, g_hi: Germ, limit2, budget=None) -> list[WedgeHit]:
    """Vertices visible inside the open wedge from ``g_lo`` to ``g_hi``.

    ``pos`` is in the frame of ``g_lo``; ``back`` is the germ at the hit
    vertex pointing back; vectors of the first frame times ``sign`` are in
    the frame of ``back``."""
    out = []
    for s, c, lo, hi in _wedge_corners(surface, g_lo, g_hi):
        for x, end, ch in explore_corner(surface, s, limit2, budget, lo, hi):
            if ch == 0:
                p = surface.partner[s]
                back, sg = (p, surface.hol[p]), surface.sign[s]
            else:
                back, sg = (end, _mul(-ch, x)), ch
            out.append(WedgeHit(_mul(c, x), back, sg * c))
    return out


# cylinders -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Cylinder:
    """Maximal flat cylinder.  ``bottom`` runs along ``direction`` with the
    cylinder on its right, ``top`` runs the other way, also with the
    cylinder on its right."""

    direction: Vec
    circumference2: Fraction
    height2: Fraction
    modulus: Fraction
    area: Fraction
    bottom: tuple[SaddleConnection, ...] = field(repr=False)
    top: tuple[SaddleConnection, ...] = field(repr=False)

    @property
    def circumference(self) -> float:
        return math.sqrt(self.circumference2)

    @property
    def height(self) -> float:
        return math.sqrt(self.height2)

    @property
    def key(self) -> frozenset:
        return frozenset(sc.key for sc in self.bottom + self.top)

    def __iter__(self):
        yield unoriented(self.direction)
        yield self.circumference
        yield self.height

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Cylinder):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)


def straight_chain(surface: Surface, germ: Germ, max_length) -> list[SaddleConnection] | None:
    """Closed chain of saddle connections from ``germ`` turning by exactly pi
    on the right at every vertex, or ``None`` if it is longer than
    ``max_length``."""
    start = locate_corner(surface, germ[0], germ[1])
    u = start[1]
    nu = norm2(u)
    lim2 = Fraction(max_length) ** 2
    total = Fraction(0)
    chain = []
    g = start
    for _ in range(4 * surface.n_sides + 4):
        sc = shoot(surface, g, max_length)
        if sc is None:
            return None
        chain.append(sc)
        total += abs(dot(sc.vector, u)) / nu
        if total * total * nu > lim2:
            return None
        g = quarter_turn(surface, end_germ(sc), 2)
        if _same_germ(g, start):
            return chain
    return None


def _joints(chain: Sequence[SaddleConnection]):
    """``(incoming reversed germ, outgoing germ)`` at every vertex of a closed chain."""
    n = len(chain)
    return [(end_germ(chain[i - 1]), start_germ(chain[i])) for i in range(n)]


def _chain_lambda(chain: Sequence[SaddleConnection], u: Vec) -> Fraction:
    nu = norm2(u)
    return sum((abs(dot(sc.vector, u)) / nu for sc in chain), Fraction(0))


def cylinder_from_chain(surface: Surface, chain: Sequence[SaddleConnection], total_area=None) -> Cylinder:
    """Cylinder on the right of a straight closed chain."""
    total_area = area(surface) if total_area is None else total_area
    u = chain[0].vector
    nu = norm2(u)
    lam = _chain_lambda(chain, u)
    c2 = lam * lam * nu
    limit2 = total_area * total_area / c2 + c2
    best = None
    for in_rev, out in _joints(chain):
        ul = _mul(-1, in_rev[1])
        for hit in explore_wedge(surface, in_rev, out, limit2):
            depth = -cross(ul, hit.pos)
            if depth <= 0:
                continue
            d2 = depth * depth / norm2(ul)
            if best is None or d2 < best[0]:
                best = (d2, hit, ul)
    if best is None:
        raise ConstructionFailed("no vertex found across the cylinder")
    h2, hit, ul = best
    tside, tvec = hit.back
    top_germ = locate_corner(surface, tside, _mul(-hit.sign, ul))
    top = straight_chain(surface, top_germ, math.sqrt(c2) * (1 + 1e-9) + 1)
    if top is None:
        raise ConstructionFailed("top boundary does not close")
    # depth and circumference are parallel multiples, so these are exact
    area_c = _exact_sqrt(h2 * c2)
    mod = _exact_sqrt(h2 / c2)
    return Cylinder(u, c2, h2, mod, area_c, tuple(chain), tuple(top))


def _exact_sqrt(x: Fraction) -> Fraction:
    """Square root of a rational square (products of depth and circumference
    are rational even when each factor is not)."""
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return Fraction(math.sqrt(x))


def cylinders_up_to(surface: Surface, max_length) -> list[Cylinder]:
    """All maximal flat cylinders of circumference at most ``max_length``,
    sorted by circumference."""
    L = Fraction(max_length)
    if L <= 0:
        raise ValueError("max_length must be positive")
    total = area(surface)
    seen: set = set()
    found: dict = {}
    for sc in enumerate_saddle_connections(surface, L):
        for g, k in ((start_germ(sc), sc.oriented_key), (end_germ(sc), sc.reverse().oriented_key)):
            if k in seen:
                continue
            chain = straight_chain(surface, g, L)
            if chain is None:
                continue
            seen.update(x.oriented_key for x in chain)
            cyl = cylinder_from_chain(surface, chain, total)
            found.setdefault(cyl.key, cyl)
    return sorted(found.values(), key=lambda c: (c.circumference2, c.height2, sorted(c.key)))


# geodesic chains ---------------------------------------------------------------


def is_closed_chain(chain: Sequence[SaddleConnection]) -> bool:
    n = len(chain)
    return n > 0 and all(chain[i].end_vertex == chain[(i + 1) % n].start_vertex for i in range(n))


def joint_keys(surface: Surface, chain: Sequence[SaddleConnection]):
    """Exact ``(left, right)`` turn keys at every joint; the left angle runs
    counterclockwise from the outgoing germ to the incoming reversed germ.
    A zero key on one side stands for the full cone angle there."""
    out = []
    for in_rev, out_g in _joints(chain):
        out.append((turn_key(surface, out_g, in_rev), turn_key(surface, in_rev, out_g)))
    return out


def is_geodesic(surface: Surface, chain: Sequence[SaddleConnection]) -> bool:
    if not is_closed_chain(chain):
        return False
    return all(l >= PI_KEY and r >= PI_KEY for l, r in joint_keys(surface, chain))


def is_simple_chain(surface: Surface, chain: Sequence[SaddleConnection]) -> bool:
    """No two segments cross in their interiors."""
    return all(intersection_number(surface, a, b) == 0 for i, a in enumerate(chain) for b in chain[i + 1:])


def reverse_chain(chain: Sequence[SaddleConnection]) -> list[SaddleConnection]:
    return [sc.reverse() for sc in reversed(chain)]


def _straight_right(surface: Surface, chain) -> bool:
    return all(r == PI_KEY for _, r in joint_keys(surface, chain))


# inserting saddle connections as edges -----------------------------------------


def insert_connections(surface: Surface, conns: Sequence[SaddleConnection], track=(), max_flips: int = 10_000):
    """Flip until every connection in ``conns`` is an edge.

    Each flip removes a crossed edge and lowers the number of crossings of
    the connection being inserted.  Returns ``(surface, conns, tracked)``."""
    items = list(conns) + list(track)
    n = len(conns)
    cur = surface
    last: dict = {}
    for step in range(max_flips):
        target = next((i for i in range(n) if not items[i].is_edge), None)
        if target is None:
            return cur, items[:n], items[n:]
        sc = items[target]
        k = len(sc.crossings)
        protected = {cur.edge_id(x.start) for x in items[:n] if x.is_edge}
        crossed = [e for e in dict.fromkeys(cur.edge_id(cr.side) for cr in sc.crossings)
                   if e not in protected and can_flip(cur, e)]
        # prefer a flip that lowers the crossing count; otherwise one that
        # keeps it, rotating through candidates as in planar segment insertion
        best = None
        for e in sorted(crossed, key=lambda x: last.get(x, -1)):
            nxt, rec = flip(cur, e)
            k2 = len(transport(cur, nxt, rec, sc).crossings)
            if k2 < k:
                best = (nxt, rec, e)
                break
            if k2 == k and best is None:
                best = (nxt, rec, e)
        if best is None:
            raise ConstructionFailed("cannot insert saddle connection by flips")
        nxt, rec, e = best
        last[e] = step
        items = [transport(cur, nxt, rec, x) for x in items]
        cur = nxt
    raise ConstructionFailed("edge insertion did not terminate")


# collars ------------------------------------------------------------------------


class _Collar:
    """Best-first growth of the open one sided neighbourhood on the left of
    a chain of edges.  Neighbourhoods of segments are swept by parallel
    rays, those of vertices with extra angle by radial rays; growth stops
    at the smallest obstruction:

    * a vertex at distance d gives d, or d/2 when it is a vertex of the
      chain reached from the grown side;
    * reaching a grown-side edge of the chain gives d/2, any other chain
      edge gives d.
    """

    def __init__(self, surface: Surface, chain, own: set, block: set, budget: int = COLLAR_BUDGET):
        self.s = surface
        self.own = own
        self.block = block
        self.best: Fraction | None = None
        self.heap: list = []
        self.tick = count()
        self.budget = budget
        self.passes: dict = {}
        for in_rev, out in _joints(chain):
            self.passes.setdefault(surface.vertex_of[out[0]], []).append((out, in_rev))
        self.chain = chain

    # obstructions -----------------------------------------------------------
    def offer(self, d2: Fraction) -> None:
        if self.best is None or d2 < self.best:
            self.best = d2

    def own_side(self, germ: Germ) -> bool:
        s = self.s
        v = s.vertex_of[germ[0]]
        if v not in self.passes:
            return False
        g = locate_corner(s, germ[0], germ[1])
        for out, in_rev in self.passes[v]:
            if _same_germ(out, in_rev):
                if not _same_germ(g, out):
                    return True
                continue
            if turn_key(s, out, g) < turn_key(s, out, in_rev):
                return True
        return False

    def vertex(self, d2: Fraction, back: Germ) -> None:
        self.offer(d2 / 4 if self.own_side(back) else d2)

    def barrier(self, side: int) -> int:
        """0 open, 1 chain edge from the grown side, 2 other chain edge."""
        if side in self.own:
            return 1
        if side in self.block:
            return 2
        return 0

    def push(self, d2: Fraction, item) -> None:
        if self.best is not None and d2 >= self.best:
            return
        heapq.heappush(self.heap, (d2, next(self.tick), item))

    # strips -------------------------------------------------------------------
    def add_strip(self, sc: SaddleConnection) -> None:
        side = sc.start
        u = self.s.hol[side]
        self._strip_triangle(side, u, (0, 0), 1, 0, norm2(u), u, norm2(u))

    def _strip_point(self, r, l, sv, u):
        sr, sl = dot(r, u), dot(l, u)
        return _add(l, _mul(Fraction(sv - sl) / (sr - sl), _sub(r, l)))

    def _strip_push(self, e, r, l, c, lo, hi, u, nu):
        sr, sl = dot(r, u), dot(l, u)
        if sr == sl or lo >= hi:
            return
        t = min(cross(u, self._strip_point(r, l, lo, u)), cross(u, self._strip_point(r, l, hi, u)))
        d2 = max(t, 0) ** 2 / nu
        kind = self.barrier(e)
        if kind:
            self.offer(d2 / 4 if kind == 1 else d2)
            return
        self.push(d2, ("strip", e, r, l, c, lo, hi, u, nu))

    def _strip_triangle(self, ep, r, l, c, lo, hi, u, nu):
        s = self.s
        f = s.nxt[ep]
        g = s.nxt[f]
        x = _add(r, _mul(c, s.hol[f]))
        sx = dot(x, u)
        if lo <= sx <= hi:
            t = cross(u, x)
            self.vertex(Fraction(t * t) / nu, (g, _mul(c, (u[1], -u[0]))))
        self._strip_push(f, r, x, c, max(lo, sx), hi, u, nu)
        self._strip_push(g, x, l, c, lo, min(hi, sx), u, nu)

    # fans -----------------------------------------------------------------------
    def add_fans(self) -> None:
        s = self.s
        for in_rev, out in _joints(self.chain):
            if _same_germ(out, in_rev):
                if s.cone_angles[s.vertex_of[out[0]]] <= 1:
                    continue
            elif turn_key(s, out, in_rev) <= PI_KEY:
                continue
            a = quarter_turn(s, out, 1)
            b = quarter_turn(s, in_rev, -1)
            for side, _, lo, hi in _wedge_corners(s, a, b):
                self._fan_corner(side, lo, hi)

    def _fan_corner(self, side, lo, hi):
        s = self.s
        q = s.hol[side]
        p = s.prv[side]
        rr = _mul(-1, s.hol[p])
        if lo is None:
            kind = max(self.barrier(side), self.barrier(s.partner[side]))
            if kind:
                self.offer(Fraction(0))
                return
            pp = s.partner[side]
            self.vertex(norm2(q), (pp, s.hol[pp]))
            lo = q
        hi = rr if hi is None else hi
        self._fan_push(s.nxt[side], q, rr, 1, lo, hi)

    @staticmethod
    def _ray_point(r, l, ray):
        d = _sub(l, r)
        k = Fraction(cross(r, d)) / cross(ray, d)
        return _mul(k, ray)

    def _fan_push(self, e, r, l, c, lo, hi):
        a = self._ray_point(r, l, lo)
        b = self._ray_point(r, l, hi)
        ab = _sub(b, a)
        if dot(a, ab) >= 0:
            d2 = norm2(a)
        elif dot(b, ab) <= 0:
            d2 = norm2(b)
        else:
            d2 = Fraction(cross(a, ab)) ** 2 / norm2(ab)
        kind = self.barrier(e)
        if kind:
            self.offer(d2 / 4 if kind == 1 else d2)
            return
        self.push(d2, ("fan", e, r, l, c, lo, hi))

    def _fan_triangle(self, ep, r, l, c, lo, hi):
        s = self.s
        f = s.nxt[ep]
        g = s.nxt[f]
        x = _add(r, _mul(c, s.hol[f]))
        after_lo = cross(lo, x)
        before_hi = cross(x, hi)
        if after_lo >= 0 and before_hi >= 0:
            self.vertex(norm2(x), (g, _mul(-c, x)))
        if after_lo > 0:
            self._fan_push(f, r, x, c, lo, x if before_hi > 0 else hi)
        if before_hi > 0:
            self._fan_push(g, x, l, c, x if after_lo > 0 else lo, hi)

    # driver ------------------------------------------------------------------------
    def run(self) -> Fraction:
        s = self.s
        spent = 0
        while self.heap:
            d2, _, item = heapq.heappop(self.heap)
            if self.best is not None and d2 >= self.best:
                break
            spent += 1
            if spent > self.budget:
                raise BudgetExceeded("collar growth exceeded its budget")
            e = item[1]
            ep = s.partner[e]
            c2 = item[4] * s.sign[e]
            if item[0] == "strip":
                _, _, r, l, _, lo, hi, u, nu = item
                self._strip_triangle(ep, r, l, c2, lo, hi, u, nu)
            else:
                _, _, r, l, _, lo, hi = item
                self._fan_triangle(ep, r, l, c2, lo, hi)
        if self.best is None:
            raise BudgetExceeded("collar growth found no obstruction")
        return self.best


def collar_radius2(surface: Surface, chain: Sequence[SaddleConnection], own: set, block: set) -> Fraction:
    """Squared radius of the left collar of ``chain``, whose segments must be edges."""
    col = _Collar(surface, chain, own, block)
    for sc in chain:
        col.add_strip(sc)
    col.add_fans()
    return col.run()


# annuli and extremal length estimates --------------------------------------------


@dataclass(frozen=True)
class AnnulusData:
    """Flat length ``l``, cylinder height ``f`` and collar radii ``e``, ``g``
    of a closed geodesic; ``exact`` optionally holds the four squares."""

    curve: object
    l: float
    f: float
    e: float
    g: float
    exact: tuple | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.l <= 0:
            raise ValueError("curve length must be positive")
        if min(self.e, self.f, self.g) < 0:
            raise ValueError("radii must be non-negative")

    @property
    def modulus(self) -> float:
        return self.f / self.l

    def is_cylinder(self) -> bool:
        return self.f > 0

    def swapped(self) -> "AnnulusData":
        ex = None if self.exact is None else (self.exact[0], self.exact[1], self.exact[3], self.exact[2])
        return AnnulusData(self.curve, self.l, self.f, self.g, self.e, ex)

    def scaled(self, k: float) -> "AnnulusData":
        return AnnulusData(self.curve, self.l * k, self.f * k, self.e * k, self.g * k)


def Log(t: float) -> float:
    """Logarithm floored at one; ``Log(0) = 1``."""
    if t <= 0:
        return 1.0
    return max(math.log(t), 1.0)


def ext_estimate_curve(data: AnnulusData) -> float:
    inv = Log(data.e / data.l) + data.f / data.l + Log(data.g / data.l)
    return 1.0 / inv


def _chain_sides(chains: Iterable[Sequence[SaddleConnection]]) -> set:
    out = set()
    for ch in chains:
        for sc in ch:
            out.add(sc.start)
    return out


def _sqrt(x: Fraction) -> float:
    return math.sqrt(x)


def _cylinder_annulus(surface: Surface, cyl: Cylinder, curve) -> AnnulusData:
    m = len(cyl.bottom)
    cur, segs, _ = insert_connections(surface, list(cyl.bottom) + list(cyl.top))
    bottom, top = segs[:m], segs[m:]
    inward = {cur.partner[sc.start] for sc in bottom + top}
    radii = []
    for grow, other in ((bottom, top), (top, bottom)):
        own = {sc.start for sc in grow}
        if own & inward:
            radii.append(Fraction(0))
            continue
        block = {cur.partner[x] for x in own} | {sc.start for sc in other} | {cur.partner[sc.start] for sc in other}
        block -= own
        radii.append(collar_radius2(cur, grow, own, block))
    e2, g2 = radii
    return AnnulusData(curve, cyl.circumference, cyl.height, _sqrt(e2), _sqrt(g2),
                       (cyl.circumference2, cyl.height2, e2, g2))


def maximal_annuli(surface: Surface, curve) -> AnnulusData:
    """Cylinder and expanding annuli of a closed geodesic.

    ``curve`` is a ``Cylinder`` or a closed chain of saddle connections;
    chains that are straight on one side are treated as that side's
    cylinder."""
    if isinstance(curve, Cylinder):
        return _cylinder_annulus(surface, curve, curve)
    chain = list(curve)
    if not is_geodesic(surface, chain):
        raise NotAGeodesic("chain is not a closed flat geodesic")
    if _straight_right(surface, chain):
        return _cylinder_annulus(surface, cylinder_from_chain(surface, chain), curve)
    rev = reverse_chain(chain)
    if _straight_right(surface, rev):
        return _cylinder_annulus(surface, cylinder_from_chain(surface, rev), curve).swapped()
    l = sum(sc.length for sc in chain)
    l2 = Fraction(l) ** 2
    if len(chain) == 1:
        l2 = chain[0].length2
    cur, segs, _ = insert_connections(surface, chain)
    radii = []
    for grow in (segs, reverse_chain(segs)):
        own = {sc.start for sc in grow}
        block = {cur.partner[x] for x in own} - own
        radii.append(collar_radius2(cur, grow, own, block))
    e2, g2 = radii
    return AnnulusData(chain, l, 0.0, _sqrt(e2), _sqrt(g2), (l2, Fraction(0), e2, g2))


def saddle_disk_radius2(surface: Surface, omega: SaddleConnection) -> Fraction:
    """Squared radius of the largest neighbourhood of ``omega`` that is a disk."""
    if omega.start_vertex == omega.end_vertex:
        raise SameEndpoint("saddle connection is a loop")
    cur, (w,), _ = insert_connections(surface, [omega])
    chain = [w, w.reverse()]
    own = {w.start, cur.partner[w.start]}
    return collar_radius2(cur, chain, own, set())


def ext_estimate_saddle(surface: Surface, omega: SaddleConnection) -> float:
    e = _sqrt(saddle_disk_radius2(surface, omega))
    return 1.0 / Log(e / omega.length)


# short curves ---------------------------------------------------------------------


def closed_geodesics(surface: Surface, max_length, max_segments: int = 8) -> list[list[SaddleConnection]]:
    """Closed chains of saddle connections of total length at most
    ``max_length`` with angle at least pi on both sides everywhere.

    One representative per unoriented curve; chains straight on a side
    (cylinder boundaries) are included."""
    L = float(max_length)
    conns = enumerate_saddle_connections(surface, max_length)
    oriented = conns + [sc.reverse() for sc in conns]
    order = {sc.oriented_key: i for i, sc in enumerate(sorted(oriented, key=lambda x: x.oriented_key))}
    by_start: dict = {}
    for sc in oriented:
        by_start.setdefault(sc.start_vertex, []).append(sc)
    found: dict = {}

    def ok_joint(a: SaddleConnection, b: SaddleConnection) -> bool:
        in_rev, out = end_germ(a), start_germ(b)
        if _same_germ(in_rev, out):
            return False
        return turn_key(surface, out, in_rev) >= PI_KEY and turn_key(surface, in_rev, out) >= PI_KEY

    def canon(chain):
        keys = [order[x.oriented_key] for x in chain]
        rots = [tuple(keys[i:] + keys[:i]) for i in range(len(keys))]
        return min(rots)

    def dfs(path, used, total):
        first, last = path[0], path[-1]
        if last.end_vertex == first.start_vertex and ok_joint(last, first):
            key = canon(path)
            rkey = canon(reverse_chain(path))
            found.setdefault(min(key, rkey), list(path))
        if len(path) >= max_segments:
            return
        for nxt in by_start.get(last.end_vertex, ()):
            k = order[nxt.oriented_key]
            if k <= order[first.oriented_key] or k in used:
                continue
            t = total + nxt.length
            if t > L * (1 + 1e-12):
                continue
            if not ok_joint(last, nxt):
                continue
            path.append(nxt)
            used.add(k)
            dfs(path, used, t)
            used.discard(k)
            path.pop()

    for sc in oriented:
        if sc.length <= L * (1 + 1e-12):
            dfs([sc], {order[sc.oriented_key]}, sc.length)
    return [found[k] for k in sorted(found)]


LARGE_CYLINDER = "largeCylinder"
SMALL = "small"


@dataclass(frozen=True)
class ShortCurve:
    curve: object
    ext: float
    kind: str
    annulus: AnnulusData = field(repr=False)

    @property
    def chains(self) -> list[list[SaddleConnection]]:
        """Geodesic representatives: cylinder boundaries or the chain itself."""
        if isinstance(self.curve, Cylinder):
            return [list(self.curve.bottom), list(self.curve.top)]
        return [list(self.curve)]

    @property
    def connections(self) -> list[SaddleConnection]:
        out = {}
        for ch in self.chains:
            for sc in ch:
                out.setdefault(sc.key, sc)
        return list(out.values())


def candidate_bound(surface: Surface, eps0) -> float:
    return math.sqrt(float(eps0) * float(area(surface)))


def large_cylinder_threshold(tau: float) -> float:
    return math.exp(-2 * tau)


def short_curves(surface: Surface, eps0=EPSILON_0, tau: float = 3.0) -> list[ShortCurve]:
    """Curves with estimated extremal length at most ``eps0``.

    Candidates have flat length at most ``sqrt(eps0 * area)``: cylinders
    of that circumference, and closed geodesic chains that bound no
    cylinder."""
    bound = candidate_bound(surface, eps0)
    b = Fraction(bound).limit_denominator(10 ** 9) * (1 + Fraction(1, 10 ** 9))
    cands: list = list(cylinders_up_to(surface, b))
    for chain in closed_geodesics(surface, b):
        if _straight_right(surface, chain) or _straight_right(surface, reverse_chain(chain)):
            continue
        if not is_simple_chain(surface, chain):
            continue
        cands.append(chain)
    out = []
    for cand in cands:
        data = maximal_annuli(surface, cand)
        ext = ext_estimate_curve(data)
        if ext <= float(eps0):
            kind = LARGE_CYLINDER if data.f > 0 and data.modulus >= large_cylinder_threshold(tau) else SMALL
            out.append(ShortCurve(cand, ext, kind, data))
    out.sort(key=lambda c: c.ext)
    for i, a in enumerate(out):
        for bb in out[i + 1:]:
            assert intersection_number(surface, a.connections, bb.connections) == 0, "short curves intersect"
    return out


# thick-thin ------------------------------------------------------------------------


@dataclass(frozen=True)
class ThickPiece:
    """Triangles of ``surface`` (a retriangulation containing every short
    curve) forming one component; degenerate pieces have no triangles and
    list their ``edges``."""

    surface: Surface = field(repr=False)
    triangles: tuple[int, ...]
    edges: tuple[int, ...]
    size: float
    boundary: tuple[int, ...]

    @property
    def degenerate(self) -> bool:
        return not self.triangles


def _piece_size(surface: Surface, edges: Iterable[int]) -> float:
    adj: dict = {}
    longest = 0.0
    for e in edges:
        a, b = surface.vertex_of[e], surface.vertex_of[surface.partner[e]]
        w = math.sqrt(norm2(surface.hol[e]))
        longest = max(longest, w)
        adj.setdefault(a, []).append((b, w))
        adj.setdefault(b, []).append((a, w))
    diam = 0.0
    for src in adj:
        dist = {src: 0.0}
        heap = [(0.0, src)]
        while heap:
            d, v = heapq.heappop(heap)
            if d > dist.get(v, math.inf):
                continue
            for w, wt in adj[v]:
                nd = d + wt
                if nd < dist.get(w, math.inf):
                    dist[w] = nd
                    heapq.heappush(heap, (nd, w))
        diam = max(diam, max(dist.values()))
    return diam + longest


def thick_thin(surface: Surface, eps0=EPSILON_0, tau: float = 3.0, shorts: list[ShortCurve] | None = None):
    """Thick pieces: components left after cutting along short curves and
    removing the interiors of their cylinders."""
    shorts = short_curves(surface, eps0, tau) if shorts is None else shorts
    chains = [ch for sc in shorts for ch in sc.chains]
    flat = [x for ch in chains for x in ch]
    cur, segs, _ = insert_connections(surface, flat)
    owner = []
    for i, sc in enumerate(shorts):
        for ch in sc.chains:
            owner += [i] * len(ch)
    cut = {cur.edge_id(x.start) for x in segs}
    inside: set = set()
    pos = 0
    for i, sc in enumerate(shorts):
        n_b = len(sc.chains[0])
        if isinstance(sc.curve, Cylinder):
            bottom = segs[pos:pos + n_b]
            stack = [cur.tri_of(cur.partner[x.start]) for x in bottom]
            while stack:
                t = stack.pop()
                if t in inside:
                    continue
                inside.add(t)
                for side in cur.triangles[t]:
                    if cur.edge_id(side) in cut:
                        continue
                    stack.append(cur.tri_of(cur.partner[side]))
        pos += sum(len(ch) for ch in sc.chains)
    seen: set = set()
    pieces = []
    for t0 in range(cur.n_triangles):
        if t0 in inside or t0 in seen:
            continue
        comp = []
        stack = [t0]
        while stack:
            t = stack.pop()
            if t in seen:
                continue
            seen.add(t)
            comp.append(t)
            for side in cur.triangles[t]:
                if cur.edge_id(side) in cut:
                    continue
                nt = cur.tri_of(cur.partner[side])
                if nt not in inside:
                    stack.append(nt)
        edges = sorted({cur.edge_id(s) for t in comp for s in cur.triangles[t]})
        bnd = sorted({owner[j] for j, x in enumerate(segs) if cur.edge_id(x.start) in edges})
        pieces.append(ThickPiece(cur, tuple(sorted(comp)), tuple(edges), _piece_size(cur, edges), tuple(bnd)))
    # chain edges with the cylinder on both sides form zero-area pieces
    degen = sorted({cur.edge_id(x.start) for x in segs
                    if cur.tri_of(x.start) in inside and cur.tri_of(cur.partner[x.start]) in inside})
    groups: list[set] = []
    for e in degen:
        vs = {cur.vertex_of[e], cur.vertex_of[cur.partner[e]]}
        hit = [g for g in groups if g[0] & vs]
        merged = [vs, {e}]
        for g in hit:
            merged[0] |= g[0]
            merged[1] |= g[1]
            groups.remove(g)
        groups.append(merged)
    for vs, es in groups:
        es = sorted(es)
        bnd = sorted({owner[j] for j, x in enumerate(segs) if cur.edge_id(x.start) in es})
        pieces.append(ThickPiece(cur, (), tuple(es), _piece_size(cur, es), tuple(bnd)))
    return pieces


# short saddle connections -----------------------------------------------------------


@dataclass(frozen=True)
class ShortSet:
    epsilon: float
    connections: tuple[SaddleConnection, ...]
    rank: int


def saddle_candidate_bound(surface: Surface, eps) -> float:
    """Longest saddle connection that can have estimate at most ``eps``: a
    disk collar of radius ``r`` around a segment of length ``l`` has area at
    least ``2 r l``, and the estimate needs ``r >= l exp(1/eps)``."""
    return math.sqrt(float(area(surface)) / (2 * math.exp(1 / float(eps))))


def disjoint_families(surface: Surface, conns: Sequence[SaddleConnection]) -> list[list[SaddleConnection]]:
    """Maximal subsets with pairwise zero intersection number."""
    g = nx.Graph()
    g.add_nodes_from(range(len(conns)))
    for i in range(len(conns)):
        for j in range(i + 1, len(conns)):
            if intersection_number(surface, conns[i], conns[j]) == 0:
                g.add_edge(i, j)
    fams = [sorted(c) for c in nx.find_cliques(g)]
    return [[conns[i] for i in f] for f in sorted(fams)]


def omega_set(surface: Surface, eps=EPSILON_0, tau: float = 3.0) -> ShortSet:
    """Saddle connections with estimate at most ``eps`` together with the
    edges of short curves; ``rank`` is the largest homological rank of a
    disjoint family."""
    found: dict = {}
    b = Fraction(saddle_candidate_bound(surface, eps)).limit_denominator(10 ** 9)
    if b > 0:
        for sc in enumerate_saddle_connections(surface, b * (1 + Fraction(1, 10 ** 9))):
            if sc.start_vertex == sc.end_vertex:
                continue
            if ext_estimate_saddle(surface, sc) <= float(eps):
                found.setdefault(sc.key, sc)
    for c in short_curves(surface, eps, tau):
        for sc in c.connections:
            found.setdefault(sc.key, sc)
    conns = sorted(found.values(), key=lambda x: x.sort_key())
    rk = 0
    if conns:
        rk = max(independent_rank(surface, f) for f in disjoint_families(surface, conns))
    return ShortSet(float(eps), tuple(conns), rk)


# twisting in cylinders -----------------------------------------------------------------


def twist_in_cylinder(surface: Surface, arc: SaddleConnection, cylinder: Cylinder) -> int:
    """Signed number of full turns around the core made by ``arc`` while
    crossing ``cylinder`` once, rounded toward zero.  Positive means the arc
    drifts along the bottom direction as it climbs."""
    u = cylinder.direction
    v = arc.vector
    t = cross(u, v)
    if t == 0:
        raise DoesNotCross("arc is parallel to the core")
    bverts = {sc.start_vertex for sc in cylinder.bottom}
    tverts = {sc.start_vertex for sc in cylinder.top}
    ends = (arc.start_vertex, arc.end_vertex)
    meets = intersection_number(surface, arc, list(cylinder.bottom) + list(cylinder.top)) > 0
    spans = (ends[0] in bverts and ends[1] in tverts) or (ends[0] in tverts and ends[1] in bverts)
    if not (meets or spans):
        raise DoesNotCross("arc does not enter the cylinder")
    # along-core drift per unit height is dot/|cross|; height h gives drift h*dot/|cross|
    ratio2 = cylinder.height2 * Fraction(dot(u, v)) ** 2 / (Fraction(t) ** 2 * cylinder.circumference2)
    n = math.isqrt(ratio2.numerator // ratio2.denominator)
    while (n + 1) ** 2 <= ratio2:
        n += 1
    while n * n > ratio2:
        n -= 1
    return n if dot(u, v) * t > 0 else -n
