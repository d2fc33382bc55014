"""Relative homology H1(S, vertices; Q) over triangulation edges, period
coordinates, the orientation double cover and relation systems on edges."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import (AlreadyOrientable, DependentFixedEdges, DomainError, NotABasis, RankMismatch)
from .saddle import SaddleConnection, edge_connection, systole
from .surface import Surface, is_orientable, orientation_gauge, stratum_signature
from .vec import Vec, cross

# linear algebra -----------------------------------------------------------------


def rank(rows: Iterable[Mapping[int, object]]) -> int:
    """Rank over Q of sparse rows (dicts column -> number)."""
    pivots: dict[int, dict[int, Fraction]] = {}
    r = 0
    for row in rows:
        vec = {k: Fraction(v) for k, v in row.items() if v}
        while vec:
            col = min(vec)
            if col not in pivots:
                pivots[col] = vec
                r += 1
                break
            piv = pivots[col]
            f = vec[col] / piv[col]
            for k, v in piv.items():
                nv = vec.get(k, 0) - f * v
                if nv:
                    vec[k] = nv
                else:
                    vec.pop(k, None)
    return r


def rank_mod2(rows: Iterable[Mapping[int, object]]) -> int:
    pivots: dict[int, int] = {}
    r = 0
    for row in rows:
        bits = 0
        for k, v in row.items():
            if int(v) % 2:
                bits |= 1 << k
        while bits:
            top = bits.bit_length() - 1
            if top not in pivots:
                pivots[top] = bits
                r += 1
                break
            bits ^= pivots[top]
    return r


def solve(columns: Sequence[Mapping[int, object]], target: Mapping[int, object],
          extra: Sequence[Mapping[int, object]] = ()) -> list[Fraction] | None:
    """Coefficients ``x`` with ``sum x_i columns[i] = target`` modulo the span
    of ``extra``; ``None`` if there is no solution."""
    n = len(columns)
    m = len(extra)
    keys = sorted({k for c in list(columns) + list(extra) + [target] for k in c})
    idx = {k: i for i, k in enumerate(keys)}
    mat = []
    for k in keys:
        row = [Fraction(columns[j].get(k, 0)) for j in range(n)]
        row += [Fraction(extra[j].get(k, 0)) for j in range(m)]
        row.append(Fraction(target.get(k, 0)))
        mat.append(row)
    width = n + m
    piv_cols = []
    r = 0
    for col in range(width):
        p = next((i for i in range(r, len(mat)) if mat[i][col] != 0), None)
        if p is None:
            continue
        mat[r], mat[p] = mat[p], mat[r]
        pv = mat[r][col]
        mat[r] = [x / pv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        piv_cols.append(col)
        r += 1
    for i in range(r, len(mat)):
        if mat[i][width] != 0:
            return None
    x = [Fraction(0)] * width
    for i, col in enumerate(piv_cols):
        x[col] = mat[i][width]
    return x[:n]


# chains -------------------------------------------------------------------------


@dataclass(frozen=True)
class RelativeChain:
    """Integer combination of edges, each oriented like its edge id side."""

    coefficients: Mapping[int, int] = field(default_factory=dict)

    def __add__(self, other: "RelativeChain") -> "RelativeChain":
        out = dict(self.coefficients)
        for k, v in other.coefficients.items():
            out[k] = out.get(k, 0) + v
        return RelativeChain({k: v for k, v in out.items() if v})

    def __neg__(self) -> "RelativeChain":
        return RelativeChain({k: -v for k, v in self.coefficients.items()})

    def __rmul__(self, k: int) -> "RelativeChain":
        return RelativeChain({e: k * v for e, v in self.coefficients.items() if k * v})


def side_chain(surface: Surface, s: int) -> RelativeChain:
    e = surface.edge_id(s)
    return RelativeChain({e: 1 if e == s else -1})


def connection_chain(surface: Surface, sc: SaddleConnection) -> RelativeChain:
    out: dict[int, int] = {}
    for e, o in sc.edge_path:
        out[e] = out.get(e, 0) + o
    return RelativeChain({k: v for k, v in out.items() if v})


def as_chain(surface: Surface, x) -> RelativeChain:
    if isinstance(x, RelativeChain):
        return x
    if isinstance(x, SaddleConnection):
        return connection_chain(surface, x)
    return side_chain(surface, int(x))


def boundaries(surface: Surface) -> list[dict[int, int]]:
    out = []
    for tri in surface.triangles:
        row: dict[int, int] = {}
        for s in tri:
            e = surface.edge_id(s)
            row[e] = row.get(e, 0) + (1 if e == s else -1)
        out.append({k: v for k, v in row.items() if v})
    return out


def chain_rank(surface: Surface) -> int:
    """Dimension of H1(S, vertices; Q) from the chain complex."""
    return len(surface.edges) - rank(boundaries(surface))


def h_dimension(surface: Surface) -> int:
    sig = stratum_signature(surface)
    g, k = surface.genus, surface.n_vertices
    formula = 2 * g + k - 1
    got = chain_rank(surface)
    if got != formula:
        raise RankMismatch(f"chain complex gives {got}, formula {formula}")
    return formula if sig.varsigma > 0 else formula - 1


def independent_rank(surface: Surface, items: Iterable) -> int:
    """Rank over Q of the classes of saddle connections (or sides) in H1(S, vertices)."""
    bnd = boundaries(surface)
    base = rank(bnd)
    rows = [dict(as_chain(surface, x).coefficients) for x in items]
    return rank(bnd + rows) - base


def homology_coordinates(surface: Surface, basis: Sequence, x) -> list[Fraction]:
    """Coefficients of the class of ``x`` in ``basis`` (which must span)."""
    cols = [dict(as_chain(surface, b).coefficients) for b in basis]
    sol = solve(cols, dict(as_chain(surface, x).coefficients), boundaries(surface))
    if sol is None:
        raise NotABasis("class is not in the span of the basis")
    return sol


# period coordinates --------------------------------------------------------------


def _oriented_hol(surface: Surface, x) -> Vec:
    if isinstance(x, SaddleConnection):
        return x.vector
    return surface.hol[int(x)]


def _check_basis(surface: Surface, basis: Sequence) -> None:
    h = h_dimension(surface)
    if len(basis) != h or independent_rank(surface, basis) != h:
        raise NotABasis(f"need {h} independent edges")


def period_coordinates(surface: Surface, basis: Sequence) -> list[Vec]:
    """Holonomy of each basis element; for orientable surfaces these are
    coordinates on the stratum."""
    _check_basis(surface, basis)
    return [_oriented_hol(surface, b) for b in basis]


def coordinate_change(surface: Surface, basis_from: Sequence, basis_to: Sequence) -> list[list[Fraction]]:
    """Matrix ``A`` with ``class(basis_to[j]) = sum_i A[i][j] class(basis_from[i])``;
    then ``coords_to[j] = sum_i A[i][j] coords_from[i]``."""
    cols = [homology_coordinates(surface, basis_from, b) for b in basis_to]
    return [[cols[j][i] for j in range(len(basis_to))] for i in range(len(basis_from))]


def apply_change(a: Sequence[Sequence[Fraction]], coords: Sequence[Vec]) -> list[Vec]:
    n, m = len(a), len(a[0]) if a else 0
    return [(sum((a[i][j] * coords[i][0] for i in range(n)), Fraction(0)),
             sum((a[i][j] * coords[i][1] for i in range(n)), Fraction(0))) for j in range(m)]


def with_periods(surface: Surface, basis: Sequence[int], coords: Sequence[Vec]) -> Surface:
    """Same triangulation with the basis sides given new holonomy (in their
    own frames); every other side follows linearly.  Orientable only."""
    gauge, twisted = orientation_gauge(surface)
    if twisted:
        raise DomainError("period coordinates need an orientable surface")
    g = [gauge[surface.tri_of(s)] for s in range(surface.n_sides)]
    gc = [(g[b] * v[0], g[b] * v[1]) for b, v in zip(basis, coords)]
    new_edge: dict[int, Vec] = {}
    for e in surface.edges:
        c = homology_coordinates(surface, basis, e)
        new_edge[e] = (sum((k * v[0] for k, v in zip(c, gc)), Fraction(0)),
                       sum((k * v[1] for k, v in zip(c, gc)), Fraction(0)))
    hol = []
    for s in range(surface.n_sides):
        e = surface.edge_id(s)
        v = new_edge[e] if s == e else (-new_edge[e][0], -new_edge[e][1])
        hol.append((g[s] * v[0], g[s] * v[1]))
    return surface.with_holonomy(hol)


# double cover -----------------------------------------------------------------------


@dataclass(frozen=True)
class DoubleCover:
    cover: Surface
    base: Surface = field(repr=False)
    projection: tuple[int, ...]
    deck: tuple[int, ...]
    ramification: tuple[int, ...]

    def lift_side(self, s: int, sheet: int = 0) -> int:
        return s + sheet * self.base.n_sides

    def lift(self, sc: SaddleConnection, sheet: int = 0) -> SaddleConnection:
        from .saddle import trace
        return trace(self.cover, self.lift_side(sc.start, sheet),
                     sc.vector if sheet == 0 else (-sc.vector[0], -sc.vector[1]))

    @property
    def genus(self) -> int:
        return self.cover.genus


def orientation_double_cover(surface: Surface) -> DoubleCover:
    """Orientation double cover: sheet 0 keeps the frames, sheet 1 negates
    them.  A side on sheet ``e`` is glued to its partner on the sheet that
    makes the gluing a translation."""
    if is_orientable(surface):
        raise AlreadyOrientable("surface is already a translation surface")
    n = surface.n_sides
    tris = [tuple(surface.triangles[t]) for t in range(surface.n_triangles)]
    tris += [tuple(s + n for s in tri) for tri in surface.triangles]
    hol = list(surface.hol) + [(-v[0], -v[1]) for v in surface.hol]
    partner = [0] * (2 * n)
    for sheet in (0, 1):
        for s in range(n):
            p = surface.partner[s]
            other = sheet if surface.sign[s] == 1 else 1 - sheet
            partner[s + sheet * n] = p + other * n
    sign = [1] * (2 * n)
    cov = Surface(tuple(tris), tuple(partner), tuple(sign), tuple(hol))
    marked = frozenset(v for v in range(cov.n_vertices) if cov.cone_angles[v] == 2)
    base_marked = {cov.vertex_of[s] for s in range(2 * n) if surface.end_vertex(s % n) in surface.marked}
    cov = cov.replace(marked=marked | frozenset(base_marked))
    projection = tuple(t % surface.n_triangles for t in range(2 * surface.n_triangles))
    deck = tuple((t + surface.n_triangles) % (2 * surface.n_triangles) for t in range(2 * surface.n_triangles))
    ram = []
    for v in range(cov.n_vertices):
        sides = [s for s in range(2 * n) if cov.vertex_of[s] == v]
        base_v = surface.vertex_of[sides[0] % n]
        if surface.cone_angles[base_v] % 2 == 1:
            ram.append(v)
    return DoubleCover(cov, surface, projection, deck, tuple(ram))


def riemann_hurwitz_genus(surface: Surface) -> int:
    """Genus of the orientation cover predicted from odd cone points."""
    r = sum(1 for k in surface.cone_angles if k % 2 == 1)
    return 2 * surface.genus - 1 + r // 2


def cover_systole_ok(surface: Surface) -> bool:
    return systole(orientation_double_cover(surface).cover) >= systole(surface)


# relations ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Relation:
    coefficients: Mapping[int, int]
    bound: int
    kind: str


@dataclass(frozen=True)
class RelationSet:
    relations: tuple[Relation, ...]

    def __len__(self) -> int:
        return len(self.relations)

    def __iter__(self):
        return iter(self.relations)

    def rows(self) -> list[dict[int, int]]:
        return [dict(r.coefficients) for r in self.relations]

    def __add__(self, other: "RelationSet") -> "RelationSet":
        return RelationSet(self.relations + other.relations)


def _span_key(v: Vec) -> tuple:
    """Sort key for the horizontal span of an edge after an infinitesimal
    clockwise rotation (x -> x + eps*y), which breaks ties between equal ``|Re|``."""
    x, y = v
    if x == 0:
        return (Fraction(0), abs(Fraction(y)))
    return (abs(Fraction(x)), Fraction(y) * (1 if x > 0 else -1))


def triangle_relation(surface: Surface, t: int) -> Relation:
    sides = surface.triangles[t]
    long_side = max(sides, key=lambda s: _span_key(surface.hol[s]))
    coeffs: dict[int, int] = {}
    for s in sides:
        e = surface.edge_id(s)
        coeffs[e] = coeffs.get(e, 0) + (-1 if s == long_side else 1)
    return Relation({k: v for k, v in coeffs.items() if v}, 1, "triangle")


def triangle_relations(surface: Surface, triangles: Iterable[int] | None = None) -> RelationSet:
    ts = range(surface.n_triangles) if triangles is None else triangles
    return RelationSet(tuple(triangle_relation(surface, t) for t in ts))


def twisted_edges(surface: Surface) -> list[int]:
    return orientation_gauge(surface)[1]


def nonorientable_relation(surface: Surface, edges: Iterable[int] | None = None) -> Relation:
    """Signed sum over the edges where the gauged gluing stays a half turn;
    the sign is that of the horizontal component in the gauged frame."""
    gauge, twisted = orientation_gauge(surface)
    if not twisted:
        raise AlreadyOrientable("no twisted edges")
    allowed = None if edges is None else {surface.edge_id(e) for e in edges}
    coeffs = {}
    for e in twisted:
        if allowed is not None and e not in allowed:
            continue
        x, y = surface.hol[e]
        g = gauge[surface.tri_of(e)]
        sx = g * (x if x != 0 else y)
        coeffs[e] = 1 if sx > 0 else -1
    return Relation(coeffs, 2, "nonorientable")


def all_relations(surface: Surface) -> RelationSet:
    rel = triangle_relations(surface)
    if not is_orientable(surface):
        rel = rel + RelationSet((nonorientable_relation(surface),))
    return rel


def h_R(surface: Surface, edges: Iterable[int] | None = None, relations: RelationSet | None = None,
        fixed: Sequence = ()) -> int:
    """Dimension over Q of Z[edges] modulo the relations and the fixed edges."""
    U = sorted({surface.edge_id(e) for e in (surface.edges if edges is None else edges)})
    relations = all_relations(surface) if relations is None else relations
    if fixed and independent_rank(surface, fixed) != len(fixed):
        raise DependentFixedEdges("fixed edges are dependent in relative homology")
    rows = relations.rows()
    for f in fixed:
        rows.append({surface.edge_id(f.start if isinstance(f, SaddleConnection) else int(f)): 1})
    return len(U) - rank(rows)


def mod2_gain(surface: Surface) -> int:
    """How much the non-orientable relation raises the rank mod 2."""
    tri = triangle_relations(surface).rows()
    rel = nonorientable_relation(surface)
    return rank_mod2(tri + [dict(rel.coefficients)]) - rank_mod2(tri)


# pairings ------------------------------------------------------------------------------


def rightward(v: Vec) -> int:
    return 1 if v[0] > 0 or (v[0] == 0 and v[1] > 0) else -1


def relation_chain(surface: Surface, rel: Relation) -> RelativeChain:
    """Relation as a chain, with every edge oriented to the right (needs a
    translation surface so that this is meaningful)."""
    return RelativeChain({e: c * rightward(surface.hol[e]) for e, c in rel.coefficients.items()})


def dual_pairing(surface: Surface, chain: RelativeChain, cycle: Sequence[int]) -> int:
    """Algebraic intersection of a chain with a closed path in the dual
    graph, given as the sides it leaves each triangle through."""
    total = 0
    for s in cycle:
        e = surface.edge_id(s)
        c = chain.coefficients.get(e, 0)
        total += c if s == e else -c
    return total


def random_dual_cycle(surface: Surface, rng, steps: int = 12) -> list[int]:
    """A closed walk in the dual graph: a random walk closed by a tree path."""
    from collections import deque
    t = rng.randrange(surface.n_triangles)
    walk = []
    cur = t
    for _ in range(steps):
        s = rng.choice(surface.triangles[cur])
        walk.append(s)
        cur = surface.tri_of(surface.partner[s])
    prev = {cur: None}
    q = deque([cur])
    while q:
        x = q.popleft()
        if x == t:
            break
        for s in surface.triangles[x]:
            y = surface.tri_of(surface.partner[s])
            if y not in prev:
                prev[y] = (x, s)
                q.append(y)
    back = []
    x = t
    while prev[x] is not None:
        px, s = prev[x]
        back.append(s)
        x = px
    return walk + back[::-1]
