"""Random walks on weighted nets: the thin averaging operator, exact
trajectory counts and the step recursion bounding them."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import BudgetExceeded, NotContractive

DP_BUDGET = 5_000_000


def _frac(x) -> Fraction:
    return Fraction(str(x)) if isinstance(x, str) else Fraction(x)


@dataclass(frozen=True)
class NetEdge:
    source: object
    target: object
    thin: int


@dataclass
class NetGraph:
    """Nodes with weights ``G >= 1``; edges flagged with a thin level.

    ``lam`` is ``e^tau`` as an exact rational, ``h`` and ``j`` are integers
    so that ``lam^h`` and ``lam^j`` stay exact; ``m`` and ``c`` are the
    constants of the contraction hypothesis."""

    weights: dict
    edges: list[NetEdge]
    h: int = 2
    lam: Fraction = Fraction(2)
    j: int = 1
    m: int = 1
    c: Fraction = Fraction(1)
    _out: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self.weights = {k: _frac(v) for k, v in self.weights.items()}
        self.lam = _frac(self.lam)
        self.c = _frac(self.c)
        if any(w < 1 for w in self.weights.values()):
            raise ValueError("node weights must be at least 1")
        if self.lam <= 1:
            raise ValueError("lambda must exceed 1")
        out: dict = {v: [] for v in self.weights}
        for e in self.edges:
            if e.source not in out or e.target not in out:
                raise ValueError(f"edge {e} uses an unknown node")
            out[e.source].append(e)
        self._out = out

    @property
    def nodes(self) -> list:
        return list(self.weights)

    @property
    def tau(self) -> float:
        return math.log(self.lam)

    def out_edges(self, v) -> list[NetEdge]:
        return self._out[v]

    def is_thin(self, e: NetEdge, j: int | None = None) -> bool:
        j = self.j if j is None else j
        return e.thin >= max(j, 1)

    @classmethod
    def from_dict(cls, data: Mapping) -> "NetGraph":
        weights = {n["id"]: n.get("G", 1) for n in data["nodes"]}
        edges = [NetEdge(e["from"], e["to"], int(e.get("thin", 0))) for e in data.get("edges", [])]
        return cls(weights, edges, int(data.get("h", 2)), _frac(data.get("lambda", 2)), int(data.get("j", 1)),
                   int(data.get("m", 1)), _frac(data.get("c", 1)))

    def to_dict(self) -> dict:
        return {"nodes": [{"id": k, "G": str(v)} for k, v in self.weights.items()],
                "edges": [{"from": e.source, "to": e.target, "thin": e.thin} for e in self.edges],
                "h": self.h, "lambda": str(self.lam), "j": self.j, "m": self.m, "c": str(self.c)}


def load_net(path) -> NetGraph:
    with open(path, encoding="utf-8") as fh:
        return NetGraph.from_dict(json.load(fh))


def average_operator(graph: NetGraph, f: Mapping, j: int | None = None) -> dict:
    """``(A f)(v) = lam^-h * sum of f over thin out-neighbours of v``, exactly."""
    scale = Fraction(1) / graph.lam ** graph.h
    out = {}
    for v in graph.nodes:
        s = sum((_frac(f[e.target]) for e in graph.out_edges(v) if graph.is_thin(e, j)), Fraction(0))
        out[v] = scale * s
    return out


@dataclass(frozen=True)
class TrajectoryQuery:
    start: object
    n: int
    theta: Fraction = Fraction(0)
    end: object = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("need at least one step")
        object.__setattr__(self, "theta", _frac(self.theta))
        if not 0 <= self.theta <= 1:
            raise ValueError("theta must lie in [0, 1]")

    @property
    def min_thin(self) -> int:
        return math.ceil(self.theta * self.n)


def _layers(graph: NetGraph, start, n: int, j: int | None, weight=None):
    """Per node, per thin count: number of walks (or ``weight``-weighted
    sums) of ``n`` steps from ``start``."""
    if n * len(graph.nodes) * (n + 1) > DP_BUDGET:
        raise BudgetExceeded("trajectory table too large")
    cur = {start: {0: 1}}
    for _ in range(n):
        nxt: dict = {}
        for v, by_k in cur.items():
            for e in graph.out_edges(v):
                dk = 1 if graph.is_thin(e, j) else 0
                slot = nxt.setdefault(e.target, {})
                for k, cnt in by_k.items():
                    slot[k + dk] = slot.get(k + dk, 0) + cnt
        cur = nxt
    return cur


def count_trajectories(graph: NetGraph, query: TrajectoryQuery, j: int | None = None) -> int:
    """Walks of ``n`` steps from ``start`` with at least ``theta * n`` thin
    steps, ending at ``end`` when given."""
    table = _layers(graph, query.start, query.n, j)
    total = 0
    for v, by_k in table.items():
        if query.end is not None and v != query.end:
            continue
        total += sum(c for k, c in by_k.items() if k >= query.min_thin)
    return total


# the bound --------------------------------------------------------------------------


@dataclass(frozen=True)
class CountingCertificate:
    n_max: int
    holds: bool
    rows: tuple = ()

    def failures(self) -> list:
        return [r for r in self.rows if not r["holds"]]


def check_contraction(graph: NetGraph, j: int | None = None) -> None:
    """Raise ``NotContractive`` at the first node where the thin operator
    fails ``A G <= c tau^m lam^-j G`` or the remaining steps fail
    ``lam^-h sum G <= c tau^m G``."""
    j = graph.j if j is None else j
    k = float(graph.c) * graph.tau ** graph.m
    a_thin = average_operator(graph, graph.weights, j)
    scale = Fraction(1) / graph.lam ** graph.h
    for v in graph.nodes:
        g = graph.weights[v]
        if float(a_thin[v] * graph.lam ** j / g) > k * (1 + 1e-12):
            raise NotContractive(f"thin averaging does not contract at node {v!r}", node=v)
        rest = scale * sum((graph.weights[e.target] for e in graph.out_edges(v) if not graph.is_thin(e, j)),
                           Fraction(0))
        if float(rest / g) > k * (1 + 1e-12):
            raise NotContractive(f"step growth too large at node {v!r}", node=v)


def verify_counting_bound(graph: NetGraph, start, n_max: int = 20, thetas=(0, Fraction(1, 2), 1),
                          end=None, j: int | None = None) -> CountingCertificate:
    """Check the hypotheses, then for every ``n <= n_max`` compare

    * ``V(n, k)``, the sum of ``G(end) lam^(j k)`` over walks with ``k`` thin
      steps, against the recursion ``Vb(n, k) = K lam^h (Vb(n-1, k) + Vb(n-1, k-1))``
      with ``K = c tau^m``;
    * ``V(n) = sum_k V(n, k)`` against ``G(start) (kinds K lam^h)^n``, where
      ``kinds`` is the number of step kinds present (1 or 2);
    * the trajectory count with at least ``theta n`` thin steps ending at
      ``w`` against ``V(n) / (G(w) lam^(j ceil(theta n)))``, for every
      end node ``w`` (or only ``end``)."""
    j = graph.j if j is None else j
    check_contraction(graph, j)
    lam_j = graph.lam ** j
    K = float(graph.c) * graph.tau ** graph.m
    step = K * float(graph.lam) ** graph.h
    has_thin = any(graph.is_thin(e, j) for e in graph.edges)
    has_thick = any(not graph.is_thin(e, j) for e in graph.edges)
    kinds = max(1, int(has_thin) + int(has_thick))
    g0 = graph.weights[start]
    rows = []
    ok = True
    bound = {0: float(g0)}
    ends = graph.nodes if end is None else [end]
    for n in range(1, n_max + 1):
        nb: dict = {}
        for k, val in bound.items():
            nb[k] = nb.get(k, 0.0) + step * val
            nb[k + 1] = nb.get(k + 1, 0.0) + step * val
        bound = nb
        table = _layers(graph, start, n, j)
        V_k: dict = {}
        for v, by_k in table.items():
            for k, cnt in by_k.items():
                V_k[k] = V_k.get(k, Fraction(0)) + cnt * graph.weights[v] * lam_j ** k
        V = sum(V_k.values(), Fraction(0))
        rec_ok = all(float(val) <= bound.get(k, 0.0) * (1 + 1e-9) for k, val in V_k.items())
        total_bound = float(g0) * (kinds * step) ** n
        tot_ok = float(V) <= total_bound * (1 + 1e-9)
        traj_ok = True
        for th in thetas:
            q_min = math.ceil(_frac(th) * n)
            for w in ends:
                cnt = sum(c for k, c in table.get(w, {}).items() if k >= q_min)
                if cnt and Fraction(cnt) > V / (graph.weights[w] * lam_j ** q_min):
                    traj_ok = False
        holds = rec_ok and tot_ok and traj_ok
        ok = ok and holds
        rows.append({"n": n, "R": n * graph.tau, "V": V, "bound": total_bound, "recursion": rec_ok,
                     "total": tot_ok, "trajectories": traj_ok, "holds": holds})
    return CountingCertificate(n_max, ok, tuple(rows))
