"""Triangulations by saddle connections adapted to the thick-thin picture:
large cylinders are left out whole, edges are short relative to the thick
piece they meet, and edges wrap boundedly around the remaining cylinders."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import CannotPerturb, ConstructionFailed, DoesNotCross, DomainError, SeedNotDisjoint, SeedNotShort
from .geometry import (EPSILON_0, LARGE_CYLINDER, Cylinder, ShortCurve, cylinder_from_chain, insert_connections,
                       omega_set, short_curves, thick_thin, twist_in_cylinder)
from .intersections import intersection_number
from .saddle import SaddleConnection, enumerate_saddle_connections
from .surface import Surface
from .vec import norm2

C2 = 8
C3 = 4
MAX_DOUBLINGS = 8


def epsilon_1(tau: float, eps0=EPSILON_0) -> float:
    return min(float(eps0), math.exp(-2 * tau) / 4)


def curve_length(chain: Sequence[SaddleConnection]) -> float:
    return sum(sc.length for sc in chain)


def perturbed_boundary(surface: Surface, short: ShortCurve, omega: Sequence[SaddleConnection] = ()):
    """Saddle connection chains representing ``short`` and missing ``omega``.

    Large cylinders give both boundary chains, other cylinders their bottom
    chain, other curves their own geodesic chain.  Representatives already
    disjoint from ``omega`` are returned unchanged; anything else signals
    that the threshold is too coarse."""
    if isinstance(short.curve, Cylinder):
        chains = [list(short.curve.bottom), list(short.curve.top)]
        if short.kind != LARGE_CYLINDER:
            chains = chains[:1]
    else:
        chains = [list(short.curve)]
    l = curve_length(chains[0])
    for ch in chains:
        for sc in ch:
            if any(intersection_number(surface, sc, w) for w in omega):
                raise CannotPerturb("short curve representative crosses the seed; lower epsilon")
            if sc.length > 2 * l * (1 + 1e-12):
                raise CannotPerturb("representative edge longer than twice the curve")
    return chains


@dataclass(frozen=True)
class ConditionResult:
    name: str
    passed: bool
    margin: float
    detail: str = ""


@dataclass(frozen=True)
class RegularityReport:
    conditions: tuple[ConditionResult, ...]
    max_length_ratio: float
    max_twist_count: int
    faces: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.conditions)

    def failed(self) -> list[str]:
        return [c.name for c in self.conditions if not c.passed]

    def __getitem__(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "maxLengthRatio": self.max_length_ratio, "maxTwistCount": self.max_twist_count,
                "faces": dict(self.faces),
                "conditions": [{"name": c.name, "passed": c.passed, "margin": c.margin, "detail": c.detail}
                               for c in self.conditions]}


@dataclass(frozen=True)
class RegularTriangulation:
    surface: Surface = field(repr=False)
    edges: tuple[SaddleConnection, ...]
    tau: float
    excluded_cylinders: tuple[Cylinder, ...]
    report: RegularityReport
    tracked: tuple[SaddleConnection, ...] = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {"tau": self.tau,
                "edges": [edge_record(sc) for sc in self.edges],
                "excludedCylinders": [{"direction": [str(x) for x in c.direction],
                                       "circumference2": str(c.circumference2), "height2": str(c.height2)}
                                      for c in self.excluded_cylinders],
                "report": self.report.to_dict()}


def edge_record(sc: SaddleConnection) -> dict:
    return {"start": sc.start, "vector": [str(sc.vector[0]), str(sc.vector[1])]}


def euler_edge_count(surface: Surface) -> int:
    """Edges of any triangulation with the surface's vertex set."""
    v = surface.n_vertices
    chi = 2 - 2 * surface.genus
    return 3 * (v - chi)


def _inside(surface: Surface, bottoms: Iterable[Sequence[SaddleConnection]], cut: set) -> set:
    """Triangles reached from the right of each chain without crossing ``cut``."""
    inside: set = set()
    for chain in bottoms:
        stack = [surface.tri_of(surface.partner[sc.start]) for sc in chain]
        while stack:
            t = stack.pop()
            if t in inside:
                continue
            inside.add(t)
            for side in surface.triangles[t]:
                if surface.edge_id(side) not in cut:
                    stack.append(surface.tri_of(surface.partner[side]))
    return inside


def _visits(surface: Surface, sc: SaddleConnection, inside: set) -> bool:
    if not sc.crossings:
        return surface.tri_of(sc.start) in inside and surface.tri_of(surface.partner[sc.start]) in inside
    tris = {surface.tri_of(sc.start)} | {surface.tri_of(surface.partner[cr.side]) for cr in sc.crossings}
    return bool(tris & inside)


def _check_seed(surface: Surface, seed: Sequence[SaddleConnection], eps) -> None:
    for i, a in enumerate(seed):
        for b in seed[i + 1:]:
            if a != b and intersection_number(surface, a, b):
                raise SeedNotDisjoint(f"seed connections {a} and {b} cross")
    if not seed:
        return
    keys = {sc.key for sc in omega_set(surface, eps).connections}
    for sc in seed:
        if sc.key not in keys:
            raise SeedNotShort(f"seed connection {sc} is not short at epsilon {float(eps)}")


def build_regular_triangulation(surface: Surface, tau: float, seed: Sequence[SaddleConnection] = (),
                                eps0=EPSILON_0, c2: float = C2, c3: int = C3,
                                track: Sequence[SaddleConnection] = ()) -> RegularTriangulation:
    """Extend ``seed`` by short curve representatives and then greedily by
    the shortest saddle connections disjoint from everything chosen and
    outside large cylinders, until a full triangulation is reached.
    ``track`` is carried to the output surface as ``tracked``."""
    seed = list(dict.fromkeys(seed))
    _check_seed(surface, seed, eps0)
    shorts = short_curves(surface, eps0, tau)
    chains = []
    wall_keys = set()
    for s in shorts:
        try:
            got = perturbed_boundary(surface, s, seed)
        except CannotPerturb as exc:
            raise ConstructionFailed(f"condition 1: {exc}") from exc
        chains += got
        if s.kind == LARGE_CYLINDER:
            wall_keys |= {sc.key for ch in got for sc in ch}
    large = [s for s in shorts if s.kind == LARGE_CYLINDER]
    protected = list(dict.fromkeys(seed + [sc for ch in chains for sc in ch]))
    is_wall = [sc.key in wall_keys for sc in protected]
    bottoms = [list(s.curve.bottom) for s in large]
    nb = [len(b) for b in bottoms]
    cur, prot, tracked = insert_connections(surface, protected, [sc for b in bottoms for sc in b] + list(track))
    bottoms, pos = [], 0
    for n in nb:
        bottoms.append(tracked[pos:pos + n])
        pos += n
    cut = {cur.edge_id(sc.start) for sc in prot}
    inside = _inside(cur, bottoms, cut)
    if any(_visits(cur, sc, inside) and not w for sc, w in zip(prot, is_wall)):
        raise ConstructionFailed("condition 1: a seed or representative lies inside a large cylinder")
    interior = sum(1 for e in cur.edges
                   if cur.tri_of(e) in inside and cur.tri_of(cur.partner[e]) in inside and e not in cut)
    target = cur.n_sides // 2 - interior
    chosen = list(prot)
    keys = {sc.key for sc in chosen}
    L = Fraction(max(math.isqrt(int(norm2(cur.hol[e]) + 1)) + 1 for e in cur.edges))
    done = Fraction(0)
    for _ in range(MAX_DOUBLINGS):
        if len(chosen) >= target:
            break
        cands = [sc for sc in enumerate_saddle_connections(cur, L) if sc.length2 > done * done]
        for sc in cands:
            if len(chosen) >= target:
                break
            if sc.key in keys or _visits(cur, sc, inside):
                continue
            if any(intersection_number(cur, sc, x) for x in chosen):
                continue
            chosen.append(sc)
            keys.add(sc.key)
        done, L = L, 2 * L
    if len(chosen) != target:
        raise ConstructionFailed(f"greedy extension found {len(chosen)} of {target} edges")
    carried = tracked[sum(nb):]
    final, edges, tracked = insert_connections(cur, chosen, [sc for b in bottoms for sc in b] + carried)
    carried = tracked[sum(nb):]
    bottoms, pos = [], 0
    for n in nb:
        bottoms.append(tracked[pos:pos + n])
        pos += n
    excluded = tuple(cylinder_from_chain(final, b) for b in bottoms)
    report = verify_regular(final, edges, tau, eps0, c2, c3)
    if not report.ok:
        raise ConstructionFailed(f"conditions failed: {', '.join(report.failed())}")
    return RegularTriangulation(final, tuple(edges), float(tau), excluded, report, tuple(carried))


def verify_regular(surface: Surface, T, tau: float, eps0=EPSILON_0, c2: float = C2, c3: int = C3,
                   cylinders: Sequence[Cylinder] = ()) -> RegularityReport:
    """Check the edge set ``T`` (saddle connections on ``surface``, or a
    ``RegularTriangulation``).  ``cylinders`` adds cylinders to the
    bounded-twisting check beyond the short ones that are not large.
    Failures are reported, never raised."""
    if isinstance(T, RegularTriangulation):
        surface, T = T.surface, T.edges
    T = list(dict.fromkeys(T))
    results = []
    faces: dict = {}
    # pairwise disjoint
    bad = [(i, j) for i in range(len(T)) for j in range(i + 1, len(T))
           if intersection_number(surface, T[i], T[j])]
    results.append(ConditionResult("disjoint", not bad, -len(bad), f"{len(bad)} crossing pairs"))
    try:
        cur, edges, _ = insert_connections(surface, T)
    except DomainError as exc:
        results.append(ConditionResult("complement", False, -1, str(exc)))
        return RegularityReport(tuple(results), math.inf, -1, faces)
    tkeys = {cur.edge_id(sc.start) for sc in edges}
    shorts = short_curves(cur, eps0, tau)
    large = [s for s in shorts if s.kind == LARGE_CYLINDER]
    # condition 1: large cylinders have boundaries in T and nothing inside
    missing = 0
    for s in large:
        for sc in s.curve.bottom + s.curve.top:
            if not any(sc == x for x in edges):
                missing += 1
    bottoms = [list(s.curve.bottom) for s in large]
    inside = _inside(cur, bottoms, tkeys) if not missing else set()
    walls = {cur.edge_id(sc.start) for s in large for sc in s.curve.bottom + s.curve.top}
    inner = [sc for sc in edges if _visits(cur, sc, inside) and cur.edge_id(sc.start) not in walls]
    results.append(ConditionResult("condition1", missing == 0 and not inner, -(missing + len(inner)),
                                   f"{missing} boundary segments missing, {len(inner)} edges inside"))
    # complement faces
    n_tri = n_cyl = n_other = 0
    for t in range(cur.n_triangles):
        if t in inside:
            n_cyl += 1
        elif all(cur.edge_id(x) in tkeys for x in cur.triangles[t]):
            n_tri += 1
        else:
            n_other += 1
    faces = {"triangle": n_tri, "cylinder": n_cyl, "other": n_other}
    interior = sum(1 for e in cur.edges
                   if cur.tri_of(e) in inside and cur.tri_of(cur.partner[e]) in inside and e not in tkeys)
    euler_ok = len(tkeys) + interior == euler_edge_count(cur)
    results.append(ConditionResult("complement", n_other == 0 and euler_ok, -n_other,
                                   f"faces {faces}, edges {len(tkeys)} + {interior} interior"))
    # condition 2: edge length against the size of every thick piece it meets
    ratio = 0.0
    try:
        pieces = thick_thin(cur, eps0, tau, shorts)
        for p in pieces:
            if p.size <= 0:
                continue
            pe = set(p.edges)
            for sc in edges:
                if p.surface.edge_id(sc.start) in pe or cur.edge_id(sc.start) in pe:
                    ratio = max(ratio, sc.length / p.size)
        results.append(ConditionResult("condition2", ratio <= c2, c2 - ratio, f"max length ratio {ratio:.4g}"))
    except DomainError as exc:
        results.append(ConditionResult("condition2", False, -1, str(exc)))
    # condition 3: bounded twisting in cylinders that stay in the triangulated part
    twisting = [(cur, edges, s.curve) for s in shorts if isinstance(s.curve, Cylinder) and s.kind != LARGE_CYLINDER]
    twisting += [(surface, T, c) for c in cylinders]
    worst = 0
    for surf, conns, cyl in twisting:
        for sc in conns:
            try:
                worst = max(worst, abs(twist_in_cylinder(surf, sc, cyl)))
            except DoesNotCross:
                continue
    results.append(ConditionResult("condition3", worst <= c3, c3 - worst, f"max twist {worst}"))
    return RegularityReport(tuple(results), ratio, worst, faces)
