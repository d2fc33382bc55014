"""Triangulated half-translation surfaces with exact rational holonomy."""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .errors import (
    ClosureViolation,
    Disconnected,
    GaussBonnetMismatch,
    GluingInconsistency,
    NonPositiveTriangle,
    SurfaceFormatError,
    ZeroArea,
)
from .vec import Vec, cross, half_plane, neg, vadd, vscale

__all__ = [
    "Surface",
    "StratumSignature",
    "ValidationReport",
    "validate",
    "stratum_signature",
    "is_orientable",
    "area",
    "normalize_area",
    "scale",
    "loads",
    "dumps",
    "load",
    "save",
    "from_polygon",
]


def _parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise SurfaceFormatError(f"not an exact rational: {text!r}") from exc


def _parse_vector(text: str) -> Vec:
    parts = text.split(",")
    if len(parts) != 2:
        raise SurfaceFormatError(f"holonomy must be 'x,y', got {text!r}")
    return (_parse_rational(parts[0]), _parse_rational(parts[1]))


def _format_vector(v: Vec) -> str:
    return f"{v[0]},{v[1]}"


@dataclass(frozen=True, eq=False)
class Surface:
    """A triangulated flat surface whose charts change by ``v -> +-v + c``.

    Sides are integers ``0..n-1``.  ``triangles[t]`` lists three sides in
    counterclockwise order, each side oriented along the triangle boundary.
    ``partner[s]`` is the side glued to ``s`` and ``sign[s]`` the gluing sign:
    ``+1`` means ``hol[partner] == -hol[s]`` (translation), ``-1`` means
    ``hol[partner] == hol[s]`` (half-turn).  Vertices are numbered
    canonically by first appearance of a side's starting corner.
    """

    triangles: tuple[tuple[int, int, int], ...]
    partner: tuple[int, ...]
    sign: tuple[int, ...]
    hol: tuple[Vec, ...]
    marked: frozenset[int] = frozenset()
    names: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.names:
            object.__setattr__(self, "names", tuple(str(i) for i in range(len(self.hol))))

    # combinatorics -------------------------------------------------------

    @property
    def n_sides(self) -> int:
        return len(self.hol)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def _position(self) -> tuple[tuple[int, int], ...]:
        pos: list[tuple[int, int] | None] = [None] * self.n_sides
        for t, tri in enumerate(self.triangles):
            for i, s in enumerate(tri):
                pos[s] = (t, i)
        return tuple(p if p is not None else (-1, -1) for p in pos)

    @cached_property
    def nxt(self) -> tuple[int, ...]:
        return tuple(self.triangles[t][(i + 1) % 3] for t, i in self._position)

    @cached_property
    def prv(self) -> tuple[int, ...]:
        return tuple(self.triangles[t][(i + 2) % 3] for t, i in self._position)

    def tri_of(self, s: int) -> int:
        return self._position[s][0]

    def next_side(self, s: int) -> int:
        t, i = self._position[s]
        return self.triangles[t][(i + 1) % 3]

    def prev_side(self, s: int) -> int:
        t, i = self._position[s]
        return self.triangles[t][(i + 2) % 3]

    def edge_id(self, s: int) -> int:
        """Edges are named by the smaller of their two side ids."""
        return min(s, self.partner[s])

    @cached_property
    def edges(self) -> tuple[int, ...]:
        return tuple(sorted({self.edge_id(s) for s in range(self.n_sides)}))

    @cached_property
    def vertex_of(self) -> tuple[int, ...]:
        """Canonical vertex id of the starting point of every side."""
        parent = list(range(self.n_sides))

        def find(a: int) -> int:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for s in range(self.n_sides):
            p = self.partner[s]
            ra, rb = find(p), find(self.next_side(s))
            if ra != rb:
                parent[ra] = rb
        ids: dict[int, int] = {}
        out = [0] * self.n_sides
        for tri in self.triangles:
            for s in tri:
                root = find(s)
                if root not in ids:
                    ids[root] = len(ids)
        for s in range(self.n_sides):
            out[s] = ids[find(s)]
        return tuple(out)

    @property
    def n_vertices(self) -> int:
        return max(self.vertex_of) + 1 if self.n_sides else 0

    def end_vertex(self, s: int) -> int:
        return self.vertex_of[self.next_side(s)]

    def corners_around(self, v: int) -> list[tuple[int, int]]:
        """Corners at vertex ``v`` in counterclockwise order.

        Each entry is ``(side, frame)``: the corner sits at the start of
        ``side`` and ``frame`` is the +-1 factor taking that triangle's
        vectors into the frame of the first corner.
        """
        start = min(s for s in range(self.n_sides) if self.vertex_of[s] == v)
        out = []
        s, c = start, 1
        while True:
            out.append((s, c))
            p = self.prev_side(s)
            c *= self.sign[p]
            s = self.partner[p]
            if s == start:
                return out

    @cached_property
    def cone_angles(self) -> tuple[int, ...]:
        """Total angle at each vertex, as a multiple of pi."""
        out = []
        for v in range(self.n_vertices):
            k = 0
            for s, c in self.corners_around(v):
                u = vscale(c, self.hol[s])
                w = vscale(-c, self.hol[self.prev_side(s)])
                if half_plane(u) != half_plane(w):
                    k += 1
            out.append(k)
        return tuple(out)

    @property
    def genus(self) -> int:
        chi = self.n_vertices - self.n_sides // 2 + self.n_triangles
        return (2 - chi) // 2

    @cached_property
    def int_frame(self) -> tuple[int, tuple[tuple[int, int], ...]]:
        """Common denominator ``D`` and the holonomies scaled to integers."""
        d = 1
        for x, y in self.hol:
            d = math.lcm(d, x.denominator, y.denominator)
        return d, tuple((int(x * d), int(y * d)) for x, y in self.hol)

    def triangle_vectors(self, t: int) -> tuple[Vec, Vec, Vec]:
        a, b, c = self.triangles[t]
        return self.hol[a], self.hol[b], self.hol[c]

    def triangle_area2(self, t: int) -> Fraction:
        u, w, _ = self.triangle_vectors(t)
        return cross(u, w)

    # transformations -------------------------------------------------------

    def replace(self, **changes) -> "Surface":
        data = {
            "triangles": self.triangles,
            "partner": self.partner,
            "sign": self.sign,
            "hol": self.hol,
            "marked": self.marked,
            "names": self.names,
        }
        data.update(changes)
        return Surface(**data)

    def with_holonomy(self, hol: Sequence[Vec]) -> "Surface":
        return self.replace(hol=tuple(hol))

    def signature_key(self) -> tuple:
        """Hashable summary used to compare surfaces bit-exactly."""
        return (self.triangles, self.partner, self.sign, self.hol,
                tuple(sorted(self.marked)), self.names)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Surface):
            return NotImplemented
        return self.signature_key() == other.signature_key()

    def __hash__(self) -> int:
        return hash(self.signature_key())

    def __repr__(self) -> str:
        return (f"Surface(triangles={self.n_triangles}, vertices={self.n_vertices}, "
                f"genus={self.genus})")


def relabel_marked(old: Surface, new_triangles, new_partner, keep_sides: Iterable[int]) -> frozenset[int]:
    """Carry marked vertices across a combinatorial change.

    ``keep_sides`` must contain, for every vertex, a side whose starting
    vertex is unchanged by the modification.
    """
    probe = Surface(new_triangles, new_partner, old.sign, old.hol, frozenset(), old.names)
    reps: dict[int, int] = {}
    for s in keep_sides:
        reps.setdefault(old.vertex_of[s], s)
    return frozenset(probe.vertex_of[reps[v]] for v in old.marked)


# validation ---------------------------------------------------------------


@dataclass
class ValidationReport:
    ok: bool
    genus: int | None
    vertex_count: int
    area: Fraction
    connected: bool
    problems: list[Exception]
    notes: list[str]

    def raise_first(self) -> None:
        if self.problems:
            raise self.problems[0]

    def summary(self) -> str:
        if self.ok:
            return (f"ok: genus {self.genus}, {self.vertex_count} vertices, "
                    f"area {self.area}")
        return "invalid: " + "; ".join(str(p) for p in self.problems)


def _components(surface: Surface) -> list[set[int]]:
    seen: set[int] = set()
    comps = []
    for t0 in range(surface.n_triangles):
        if t0 in seen:
            continue
        comp = {t0}
        seen.add(t0)
        queue = deque([t0])
        while queue:
            t = queue.popleft()
            for s in surface.triangles[t]:
                u = surface.tri_of(surface.partner[s])
                if u >= 0 and u not in seen:
                    seen.add(u)
                    comp.add(u)
                    queue.append(u)
        comps.append(comp)
    return comps


def validate(surface: Surface) -> ValidationReport:
    problems: list[Exception] = []
    notes: list[str] = []
    n = surface.n_sides
    counts = [0] * n
    for tri in surface.triangles:
        for s in tri:
            if 0 <= s < n:
                counts[s] += 1
    for s in range(n):
        if counts[s] != 1:
            problems.append(GluingInconsistency(f"side {surface.names[s]} lies in {counts[s]} triangles",
                                                simplex=("side", surface.names[s])))
    structural = bool(problems)
    if not structural:
        for s in range(n):
            p = surface.partner[s]
            if not 0 <= p < n or p == s or surface.partner[p] != s:
                problems.append(GluingInconsistency(f"side {surface.names[s]} is not in a glued pair",
                                                    simplex=("side", surface.names[s])))
                structural = True
            elif surface.sign[s] not in (1, -1) or surface.sign[p] != surface.sign[s]:
                problems.append(GluingInconsistency(f"bad gluing sign on side {surface.names[s]}",
                                                    simplex=("side", surface.names[s])))
    for t, tri in enumerate(surface.triangles):
        total = (Fraction(0), Fraction(0))
        for s in tri:
            total = vadd(total, surface.hol[s])
        if total != (0, 0):
            problems.append(ClosureViolation(f"triangle {t} does not close (sum {total[0]},{total[1]})",
                                             simplex=("triangle", t)))
        elif surface.triangle_area2(t) <= 0:
            problems.append(NonPositiveTriangle(f"triangle {t} has non-positive area",
                                                simplex=("triangle", t)))
    if not structural:
        for s in range(n):
            p = surface.partner[s]
            if s < p and surface.hol[p] != vscale(-surface.sign[s], surface.hol[s]):
                problems.append(GluingInconsistency(
                    f"sides {surface.names[s]} and {surface.names[p]} do not match under sign {surface.sign[s]}",
                    simplex=("edge", surface.names[s])))
    connected = True
    if not structural:
        comps = _components(surface)
        if len(comps) != 1:
            connected = False
            lonely = min(min(c) for c in comps[1:])
            problems.append(Disconnected(f"{len(comps)} components; triangle {lonely} is cut off",
                                         simplex=("triangle", lonely)))
    total_area = sum((surface.triangle_area2(t) for t in range(surface.n_triangles)), Fraction(0)) / 2
    genus = None
    vcount = 0
    if not structural:
        vcount = surface.n_vertices
        if connected:
            genus = surface.genus
    if not problems and total_area <= 0:
        problems.append(ZeroArea("total area is not positive"))
    if not problems:
        for v, k in enumerate(surface.cone_angles):
            if k == 1 and v not in surface.marked:
                notes.append(f"vertex {v} is a pole but not marked")
            if k == 2 and v not in surface.marked:
                notes.append(f"vertex {v} is a regular point but not marked")
    return ValidationReport(not problems, genus, vcount, total_area, connected, problems, notes)


def _require_valid(surface: Surface) -> None:
    validate(surface).raise_first()


# signatures --------------------------------------------------------------


@dataclass(frozen=True)
class StratumSignature:
    nu: tuple[int, ...]
    varsigma: int

    def __str__(self) -> str:
        inner = ",".join(str(x) for x in self.nu)
        return f"Q({inner}; {'+1' if self.varsigma > 0 else '-1'})"


def orientation_gauge(surface: Surface) -> tuple[list[int], list[int]]:
    """Spanning-tree gauge on triangles.

    Returns ``(gauge, twisted)`` where ``gauge[t]`` is +-1 and ``twisted``
    lists the edges whose gauged gluing is still a half-turn.
    """
    gauge = [0] * surface.n_triangles
    gauge[0] = 1
    queue = deque([0])
    while queue:
        t = queue.popleft()
        for s in surface.triangles[t]:
            p = surface.partner[s]
            u = surface.tri_of(p)
            if gauge[u] == 0:
                gauge[u] = gauge[t] * surface.sign[s]
                queue.append(u)
    twisted = []
    for e in surface.edges:
        p = surface.partner[e]
        if gauge[surface.tri_of(e)] * gauge[surface.tri_of(p)] * surface.sign[e] != 1:
            twisted.append(e)
    return gauge, twisted


def is_orientable(surface: Surface) -> bool:
    return not orientation_gauge(surface)[1]


def stratum_signature(surface: Surface) -> StratumSignature:
    _require_valid(surface)
    nu = tuple(sorted((k - 2 for k in surface.cone_angles), reverse=True))
    if sum(nu) != 4 * surface.genus - 4:
        raise GaussBonnetMismatch(f"orders {nu} do not sum to 4g-4 = {4 * surface.genus - 4}")
    return StratumSignature(nu, 1 if is_orientable(surface) else -1)


def area(surface: Surface) -> Fraction:
    total = sum((surface.triangle_area2(t) for t in range(surface.n_triangles)), Fraction(0)) / 2
    if total <= 0:
        raise ZeroArea("total area is not positive")
    return total


def scale(surface: Surface, c: Fraction) -> Surface:
    c = Fraction(c)
    return surface.with_holonomy([vscale(c, v) for v in surface.hol])


def _rational_sqrt(x: Fraction, digits: int = 30) -> tuple[Fraction, bool]:
    """Square root of a positive rational, exact when possible."""
    p, q = x.numerator, x.denominator
    rp, rq = math.isqrt(p), math.isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rp, rq), True
    big = 10 ** digits
    root = math.isqrt(p * q * big * big)
    return Fraction(root, q * big), False


def normalize_area(surface: Surface) -> tuple[Surface, Fraction, float]:
    """Rescale to unit area; returns (surface, scale factor, area residual)."""
    a = area(surface)
    root, _ = _rational_sqrt(a)
    c = 1 / root
    out = scale(surface, c)
    residual = float(area(out) - 1)
    return out, c, residual


# serialization -------------------------------------------------------------


def loads(text: str) -> Surface:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SurfaceFormatError(f"not JSON: {exc}") from exc
    return from_dict(data)


def from_dict(data: dict) -> Surface:
    try:
        tri_names = [list(map(str, tri)) for tri in data["triangles"]]
        gluing = data["gluing"]
        holonomy = data["holonomy"]
        marked = data.get("marked", [])
    except (KeyError, TypeError) as exc:
        raise SurfaceFormatError(f"missing field: {exc}") from exc
    names: list[str] = []
    index: dict[str, int] = {}
    triangles = []
    for tri in tri_names:
        if len(tri) != 3:
            raise SurfaceFormatError(f"triangle {tri} does not have three sides")
        ids = []
        for name in tri:
            if name in index:
                raise SurfaceFormatError(f"side {name} appears twice")
            index[name] = len(names)
            names.append(name)
            ids.append(index[name])
        triangles.append(tuple(ids))
    n = len(names)
    partner = [-1] * n
    sign = [0] * n
    for entry in gluing:
        if len(entry) != 3:
            raise SurfaceFormatError(f"gluing entry {entry} must be [sideA, sideB, sign]")
        a, b, sgn = str(entry[0]), str(entry[1]), int(entry[2])
        if a not in index or b not in index:
            raise SurfaceFormatError(f"gluing mentions unknown side in {entry}")
        ia, ib = index[a], index[b]
        if partner[ia] != -1 or partner[ib] != -1:
            raise SurfaceFormatError(f"side glued twice in {entry}")
        partner[ia], partner[ib] = ib, ia
        sign[ia] = sign[ib] = sgn
    if -1 in partner:
        missing = names[partner.index(-1)]
        raise SurfaceFormatError(f"side {missing} is not glued")
    hol = []
    for name in names:
        if name not in holonomy:
            raise SurfaceFormatError(f"no holonomy for side {name}")
        hol.append(_parse_vector(str(holonomy[name])))
    return Surface(tuple(triangles), tuple(partner), tuple(sign), tuple(hol),
                   frozenset(int(v) for v in marked), tuple(names))


def to_dict(surface: Surface) -> dict:
    names = surface.names
    gluing = []
    for s in range(surface.n_sides):
        p = surface.partner[s]
        if s < p:
            gluing.append([names[s], names[p], surface.sign[s]])
    return {
        "triangles": [[names[s] for s in tri] for tri in surface.triangles],
        "gluing": gluing,
        "holonomy": {names[s]: _format_vector(surface.hol[s])
                     for tri in surface.triangles for s in tri},
        "marked": sorted(surface.marked),
    }


def dumps(surface: Surface) -> str:
    return json.dumps(to_dict(surface), indent=1) + "\n"


def load(path) -> Surface:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def save(surface: Surface, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(surface))


# construction from polygons -----------------------------------------------


def from_polygon(points: Sequence[Vec], triangles: Sequence[tuple[int, int, int]],
                 pairs: Sequence[tuple[int, int]], marked_points: Sequence[int] = ()) -> Surface:
    """Build a surface from a triangulated polygon with paired boundary edges.

    ``points`` are the polygon vertices in counterclockwise order, boundary
    edge ``i`` runs from ``points[i]`` to ``points[i+1]``.  ``pairs`` lists
    identified boundary edges; the gluing sign is read off the vectors.
    ``marked_points`` are polygon vertex indices whose image is marked.
    """
    pts = [(Fraction(x), Fraction(y)) for x, y in points]
    npts = len(pts)
    tris = []
    hol: list[Vec] = []
    side_at: dict[tuple[int, int], int] = {}
    start_point: list[int] = []
    for a, b, c in triangles:
        ids = []
        for u, w in ((a, b), (b, c), (c, a)):
            sid = len(hol)
            hol.append((pts[w][0] - pts[u][0], pts[w][1] - pts[u][1]))
            if (u, w) in side_at:
                raise ValueError(f"segment {u}->{w} used twice")
            side_at[(u, w)] = sid
            start_point.append(u)
            ids.append(sid)
        tris.append(tuple(ids))
    partner = [-1] * len(hol)
    sign = [0] * len(hol)
    boundary = {(i, (i + 1) % npts) for i in range(npts)}
    for (u, w), sid in side_at.items():
        if (u, w) in boundary:
            continue
        other = side_at.get((w, u))
        if other is None:
            raise ValueError(f"diagonal {u}->{w} has no opposite triangle")
        partner[sid], sign[sid] = other, 1
    for i, j in pairs:
        si = side_at[(i, (i + 1) % npts)]
        sj = side_at[(j, (j + 1) % npts)]
        if hol[si] == neg(hol[sj]):
            sgn = 1
        elif hol[si] == hol[sj]:
            sgn = -1
        else:
            raise ValueError(f"boundary edges {i} and {j} are not parallel of equal length")
        partner[si], partner[sj] = sj, si
        sign[si] = sign[sj] = sgn
    if -1 in partner:
        raise ValueError("some boundary edge is not paired")
    surf = Surface(tuple(tris), tuple(partner), tuple(sign), tuple(hol))
    marked = frozenset(surf.vertex_of[start_point.index(p)] for p in marked_points)
    return surf.replace(marked=marked)
