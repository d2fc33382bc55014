"""Geometric intersection numbers of saddle connections on a common surface."""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import VertexSetMismatch
from .saddle import SaddleConnection, end_germ, start_germ, turn_key
from .surface import Surface
from .vec import cross


def _pieces(sc: SaddleConnection):
    """Per triangle chords ``(triangle, pos_a, pos_b)`` with boundary
    positions ``i + mu`` (side index ``i`` in the triangle, parameter ``mu``
    along it); corners have integral positions."""
    s = sc.surface
    pos = s._position
    out = []
    t, i = pos[sc.start]
    cur_t, cur_pos = t, Fraction(i)
    for cr in sc.crossings:
        te, ie = pos[cr.side]
        out.append((cur_t, cur_pos, ie + cr.mu))
        ep = s.partner[cr.side]
        tp, ip = pos[ep]
        cur_t, cur_pos = tp, ip + (1 - cr.mu)
    if not sc.crossings:
        # a triangulation edge: a chord along side ``i`` or along the previous side
        along = sc.vector == s.hol[sc.start]
        out.append((t, Fraction(i), Fraction((i + 1) % 3 if along else (i - 1) % 3)))
        return out
    tg, ig = pos[sc.end]
    out.append((cur_t, cur_pos, Fraction(ig)))
    return out


def _edge_points(sc: SaddleConnection):
    """Crossing points keyed by ``(edge id, parameter along the edge id side)``."""
    s = sc.surface
    out = {}
    for cr in sc.crossings:
        e = s.edge_id(cr.side)
        mu = cr.mu if e == cr.side else 1 - cr.mu
        out.setdefault((e, mu), []).append(cr.direction)
    return out


def _between(lo: Fraction, x: Fraction, hi: Fraction) -> bool:
    """Is ``x`` strictly inside the counterclockwise arc from ``lo`` to ``hi``
    on the circle of positions [0, 3)?"""
    if lo < hi:
        return lo < x < hi
    return x > lo or x < hi


def _chords_cross(p1, p2, q1, q2) -> bool:
    if len({p1, p2, q1, q2}) < 4:
        return False
    return _between(p1, q1, p2) != _between(p1, q2, p2)


def _germ_alternations(a: SaddleConnection, b: SaddleConnection) -> int:
    if not (a.start_vertex == a.end_vertex == b.start_vertex == b.end_vertex):
        return 0
    s = a.surface
    ga1, ga2 = start_germ(a), end_germ(a)
    k2 = turn_key(s, ga1, ga2)
    kb = [turn_key(s, ga1, g) for g in (start_germ(b), end_germ(b))]
    zero = turn_key(s, ga1, ga1)
    if any(k in (zero, k2) for k in kb):
        return 0
    inside = [k < k2 for k in kb]
    return 1 if inside[0] != inside[1] else 0


def intersection_number(surface: Surface, a, b, at_singularities: bool = False) -> int:
    """Number of transverse interior intersection points.

    Shared sub-segments and meetings at endpoints count zero.  With
    ``at_singularities`` a transverse meeting of two loops at their common
    vertex also counts, which matches closed-curve intersection on tori.
    ``a`` and ``b`` may be saddle connections or lists of them (curves)."""
    if not isinstance(a, SaddleConnection):
        return sum(intersection_number(surface, x, b, at_singularities) for x in a)
    if not isinstance(b, SaddleConnection):
        return sum(intersection_number(surface, a, y, at_singularities) for y in b)
    if a == b:
        return 0
    count = 0
    pa = defaultdict(list)
    for t, x, y in _pieces(a):
        pa[t].append((x, y))
    for t, x, y in _pieces(b):
        for u, w in pa.get(t, ()):
            if _chords_cross(u, w, x, y):
                count += 1
    ea = _edge_points(a)
    for key, dirs in _edge_points(b).items():
        for da in ea.get(key, ()):
            for db in dirs:
                if cross(da, db) != 0:
                    count += 1
    if at_singularities:
        count += _germ_alternations(a, b)
    return count


def edge_crossings(sc: SaddleConnection, edge: int) -> int:
    """Crossings of ``sc`` with a triangulation edge of its own surface."""
    s = sc.surface
    return sum(1 for cr in sc.crossings if s.edge_id(cr.side) == edge)


def intersection_matrix(surface: Surface, ta: Sequence[SaddleConnection], tb: Sequence[SaddleConnection],
                        at_singularities: bool = False) -> list[list[int]]:
    va = {v for sc in ta for v in (sc.start_vertex, sc.end_vertex)}
    vb = {v for sc in tb for v in (sc.start_vertex, sc.end_vertex)}
    if va != vb:
        raise VertexSetMismatch(f"vertex sets differ: {sorted(va)} vs {sorted(vb)}")
    return [[intersection_number(surface, a, b, at_singularities) for b in tb] for a in ta]


def slope(sc: SaddleConnection) -> Fraction | float:
    x, y = sc.vector
    if x == 0:
        return float("inf")
    return Fraction(y) / x


def essentially_positive(surface: Surface, a: SaddleConnection, b: SaddleConnection, slack: int,
                         count: int | None = None) -> bool:
    """Slope of ``b`` exceeds that of ``a``, or they meet at most ``slack``
    times.  ``count`` may supply a precomputed intersection number."""
    if slope(b) > slope(a):
        return True
    if count is None:
        count = intersection_number(surface, a, b)
    return count <= slack


def relation_residual(surface: Surface, relation: Mapping, target, edges: Mapping | None = None) -> int:
    """Signed sum of intersections of a relation's edges with ``target``.

    ``relation`` maps keys to integer coefficients; ``edges`` maps the same
    keys to saddle connections on ``surface`` (default: the triangulation
    edges of ``surface`` keyed by edge id)."""
    from .saddle import edge_connection
    coeffs = getattr(relation, "coefficients", relation)
    total = 0
    for key, c in coeffs.items():
        if c == 0:
            continue
        sc = edges[key] if edges is not None else edge_connection(surface, key)
        total += c * intersection_number(surface, sc, target)
    return total
