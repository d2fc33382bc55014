"""Command line entry point.  Exit codes: 0 ok, 1 domain error, 2 usage."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

from . import __version__
from .errors import ConstructionFailed, DomainError

TOOL = "halfsurf"


# plumbing ------------------------------------------------------------------------------


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _positive_rational(text: str) -> Fraction:
    x = _rational(text)
    if x <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return x


def _unit(text: str) -> Fraction:
    x = _rational(text)
    if not 0 <= x <= 1:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1]: {text!r}")
    return x


def _params(args: argparse.Namespace) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in ("func",):
            continue
        out[k] = str(v) if isinstance(v, Fraction) else v
    return out


def header(args: argparse.Namespace) -> dict:
    return {"tool": TOOL, "version": __version__, "seed": args.seed, "params": _params(args)}


def csv_header(args: argparse.Namespace) -> str:
    h = header(args)
    return f"# {h['tool']} {h['version']} seed={h['seed']} params={json.dumps(h['params'], sort_keys=True)}"


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _json(args, body: dict) -> str:
    return json.dumps({"header": header(args), **body}, indent=1, sort_keys=True, default=str) + "\n"


def load_surface(ref: str):
    """A path to a surface file, or the name of a bundled fixture."""
    from .fixtures import FIXTURE_NAMES, load_fixture
    from .surface import load

    if os.path.exists(ref):
        return load(ref)
    stem = os.path.splitext(os.path.basename(ref))[0]
    if stem in FIXTURE_NAMES:
        return load_fixture(stem)
    raise DomainError(f"no such surface file: {ref}")


def _records(data) -> list:
    if isinstance(data, dict):
        data = data["edges"]
    return list(data)


def connections_from_records(surface, records) -> list:
    """Edge ids, or ``{"start": side, "vector": [x, y]}`` records."""
    from .saddle import edge_connection, trace

    out = []
    for r in records:
        if isinstance(r, int):
            if not 0 <= r < surface.n_sides:
                raise DomainError(f"no side {r}")
            out.append(edge_connection(surface, r))
        else:
            s = int(r["start"])
            if not 0 <= s < surface.n_sides:
                raise DomainError(f"no side {s}")
            out.append(trace(surface, s, (Fraction(r["vector"][0]), Fraction(r["vector"][1]))))
    return out


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: not JSON: {exc}") from exc


# subcommands -----------------------------------------------------------------------------


def cmd_validate(args) -> int:
    from .surface import stratum_signature, validate

    s = load_surface(args.surface or args.path)
    rep = validate(s)
    print(rep.summary())
    for note in rep.notes:
        print(f"note: {note}")
    if not rep.ok:
        return 1
    print(f"stratum: {stratum_signature(s)}")
    return 0


def cmd_flow(args) -> int:
    from .flow import geodesic_flow
    from .surface import to_dict

    s = load_surface(args.surface)
    if args.lam <= 0:
        raise DomainError("lambda must be positive")
    out, log = geodesic_flow(s, args.lam)
    if args.log:
        _emit(csv_header(args) + "\n" + log.to_csv(), args.log)
    _emit(_json(args, to_dict(out)), args.out)
    print(f"{len(log)} flips", file=sys.stderr)
    return 0


def cmd_saddles(args) -> int:
    from .saddle import enumerate_saddle_connections

    s = load_surface(args.surface)
    conns = enumerate_saddle_connections(s, args.max_length)
    lines = [csv_header(args), "hx,hy,length2,length,start_vertex,end_vertex,start_side"]
    for sc in conns:
        h = sc.holonomy
        lines.append(f"{h[0]},{h[1]},{sc.length2},{sc.length:.12g},{sc.start_vertex},{sc.end_vertex},{sc.start}")
    _emit("\n".join(lines) + "\n", args.csv)
    return 0


def cmd_cylinders(args) -> int:
    from .geometry import cylinders_up_to

    s = load_surface(args.surface)
    lines = [csv_header(args), "dx,dy,circumference2,height2,modulus,area,bottom_size,top_size"]
    for c in cylinders_up_to(s, args.max_length):
        d = c.direction
        lines.append(f"{d[0]},{d[1]},{c.circumference2},{c.height2},{c.modulus},{c.area},"
                     f"{len(c.bottom)},{len(c.top)}")
    _emit("\n".join(lines) + "\n", args.csv)
    return 0


def cmd_shortset(args) -> int:
    from .geometry import omega_set, short_curves
    from .regular_triangulation import edge_record

    s = load_surface(args.surface)
    shorts = short_curves(s, args.epsilon, float(args.tau))
    om = omega_set(s, args.epsilon, float(args.tau))
    body = {"shortCurves": [{"kind": c.kind, "ext": c.ext,
                             "connections": [edge_record(sc) for sc in c.connections]} for c in shorts],
            "omega": [dict(edge_record(sc), length2=str(sc.length2)) for sc in om.connections],
            "rank": om.rank}
    _emit(_json(args, body), args.out)
    return 0


def _upper(x2: Fraction) -> Fraction:
    r = Fraction(math.isqrt(x2.numerator * x2.denominator) + 1, x2.denominator)
    return r


def triangulate(surface, tau: float, seed, eps0):
    """Build, then express the edges in the coordinates of ``surface`` by
    carrying every short enough connection through the construction."""
    from .regular_triangulation import build_regular_triangulation
    from .saddle import enumerate_saddle_connections

    first = build_regular_triangulation(surface, tau, seed, eps0=eps0)
    L = _upper(max(sc.length2 for sc in first.edges)) + 1
    cands = enumerate_saddle_connections(surface, L)
    T = build_regular_triangulation(surface, tau, seed, eps0=eps0, track=cands)
    index = {sc.key: c for sc, c in zip(T.tracked, cands)}
    missing = [sc for sc in T.edges if sc.key not in index]
    if missing:
        raise ConstructionFailed(f"{len(missing)} edges could not be carried back to the input surface")
    return T, [index[sc.key] for sc in T.edges]


def cmd_triangulate(args) -> int:
    from .regular_triangulation import edge_record
    from .surface import to_dict

    s = load_surface(args.surface)
    seed = connections_from_records(s, _records(_read_json(args.seed_edges))) if args.seed_edges else []
    T, edges = triangulate(s, float(args.tau), seed, args.epsilon)
    body = T.to_dict()
    body["retriangulatedEdges"] = body.pop("edges")
    body["edges"] = [edge_record(sc) for sc in edges]
    body["surface"] = to_dict(T.surface)
    _emit(_json(args, body), args.out)
    return 0


def cmd_imatrix(args) -> int:
    from .intersections import intersection_matrix

    s = load_surface(args.surface)
    ta = connections_from_records(s, _records(_read_json(args.tri_a)))
    tb = connections_from_records(s, _records(_read_json(args.tri_b)))
    M = intersection_matrix(s, ta, tb, args.at_singularities)
    lines = [csv_header(args), ",".join(["row"] + [f"b{j}" for j in range(len(tb))])]
    for i, row in enumerate(M):
        lines.append(",".join([f"a{i}"] + [str(x) for x in row]))
    _emit("\n".join(lines) + "\n", args.csv)
    return 0


def cmd_cover(args) -> int:
    from .homology import orientation_double_cover, riemann_hurwitz_genus
    from .surface import to_dict

    s = load_surface(args.surface)
    cov = orientation_double_cover(s)
    body = dict(to_dict(cov.cover), cover={"genus": cov.genus, "predictedGenus": riemann_hurwitz_genus(s),
                                           "ramification": list(cov.ramification)})
    _emit(_json(args, body), args.out)
    print(f"cover genus {cov.genus}, predicted {riemann_hurwitz_genus(s)}, "
          f"{len(cov.ramification)} ramification points", file=sys.stderr)
    return 0


def cmd_hdim(args) -> int:
    from .homology import chain_rank, h_dimension, h_R
    from .surface import is_orientable, stratum_signature

    s = load_surface(args.surface)
    body = {"h": h_dimension(s), "chainRank": chain_rank(s), "hR": h_R(s), "orientable": is_orientable(s),
            "genus": s.genus, "stratum": str(stratum_signature(s))}
    _emit(_json(args, body), args.out)
    return 0


def growth_svg(rows, h: int = 2, width: int = 480, height: int = 320) -> str:
    """Plot of ``log count`` against ``R``, with a reference line of slope ``h``."""
    pts = [(r.R, math.log(r.count)) for r in rows if r.count > 0]
    pad = 40
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>']
    if pts:
        x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
        y0, y1 = min(0.0, min(p[1] for p in pts)), max(p[1] for p in pts)
        x1 = x1 if x1 > x0 else x0 + 1
        y1 = y1 if y1 > y0 else y0 + 1

        def X(x):
            return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

        def Y(y):
            return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

        lines.append(f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>')
        lines.append(f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>')
        lines.append(f'<text x="{width / 2:.0f}" y="{height - 8}" font-size="12" text-anchor="middle">R</text>')
        lines.append(f'<text x="12" y="{height / 2:.0f}" font-size="12" '
                     f'transform="rotate(-90 12 {height / 2:.0f})" text-anchor="middle">log count</text>')
        xr, yr = pts[-1]
        ref = [(x, yr - h * (xr - x)) for x in (x0, x1)]
        ref = [(x, y) for x, y in ref if y0 <= y <= y1] or ref[1:]
        if len(ref) == 2:
            lines.append(f'<line x1="{X(ref[0][0]):.2f}" y1="{Y(ref[0][1]):.2f}" x2="{X(ref[1][0]):.2f}" '
                         f'y2="{Y(ref[1][1]):.2f}" stroke="gray" stroke-dasharray="4 3"/>')
        poly = " ".join(f"{X(x):.2f},{Y(y):.2f}" for x, y in pts)
        lines.append(f'<polyline points="{poly}" fill="none" stroke="steelblue" stroke-width="2"/>')
        for x, y in pts:
            lines.append(f'<circle cx="{X(x):.2f}" cy="{Y(y):.2f}" r="3" fill="steelblue"/>')
        for x in sorted({p[0] for p in pts}):
            lines.append(f'<text x="{X(x):.2f}" y="{height - pad + 14}" font-size="10" '
                         f'text-anchor="middle">{x:g}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def cmd_count_torus(args) -> int:
    from .counting_modular import count_report

    if args.step <= 0 or args.r_max < args.r_min:
        raise DomainError("need step > 0 and r-max >= r-min")
    n = int((args.r_max - args.r_min) / args.step)
    Rs = [float(args.r_min + i * args.step) for i in range(n + 1)]
    rep = count_report(Rs, m=args.thin, theta=float(args.theta))
    _emit(rep.to_csv(csv_header(args)), args.csv)
    if args.svg:
        _emit(growth_svg(rep.rows, rep.h), args.svg)
    return 0


def _node(graph, text):
    for v in graph.nodes:
        if str(v) == text:
            return v
    raise DomainError(f"no node {text!r}")


def cmd_walk_sim(args) -> int:
    from .walk_model import TrajectoryQuery, count_trajectories, load_net, verify_counting_bound

    g = load_net(args.net)
    start = _node(g, args.start) if args.start is not None else g.nodes[0]
    end = _node(g, args.end) if args.end is not None else None
    if args.steps < 1:
        raise DomainError("need at least one step")
    lines = [csv_header(args)]
    if args.certify:
        cert = verify_counting_bound(g, start, args.steps, thetas=(args.theta,), end=end)
        lines.append("n,count,V,bound,holds")
        for row in cert.rows:
            n = row["n"]
            c = count_trajectories(g, TrajectoryQuery(start, n, args.theta, end))
            lines.append(f"{n},{c},{float(row['V']):.12g},{row['bound']:.12g},{int(row['holds'])}")
    else:
        lines.append("n,count")
        for n in range(1, args.steps + 1):
            lines.append(f"{n},{count_trajectories(g, TrajectoryQuery(start, n, args.theta, end))}")
    _emit("\n".join(lines) + "\n", args.csv)
    return 0


def cmd_acceptance(args) -> int:
    from .experiments import CRITERIA, run_criterion

    numbers = sorted(CRITERIA) if args.criterion is None else [args.criterion]
    ok = True
    for n in numbers:
        res = run_criterion(n)
        print(res.line(), flush=True)
        ok = ok and res.passed
    return 0 if ok else 1


# parser ----------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=TOOL, description="Exact flat geometry of half-translation surfaces.")
    p.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    p.add_argument("--seed", type=int, default=0, help="seed recorded in output headers")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("validate", cmd_validate, "check a surface file")
    sp.add_argument("path", nargs="?")
    sp.add_argument("--surface")

    sp = add("flow", cmd_flow, "apply diag(lambda, 1/lambda) keeping the triangulation Delaunay")
    sp.add_argument("--surface", required=True)
    sp.add_argument("--lambda", dest="lam", type=_positive_rational, required=True)
    sp.add_argument("--log")
    sp.add_argument("--out")

    sp = add("saddles", cmd_saddles, "enumerate saddle connections")
    sp.add_argument("--surface", required=True)
    sp.add_argument("--max-length", type=_positive_rational, required=True)
    sp.add_argument("--csv")

    sp = add("cylinders", cmd_cylinders, "enumerate maximal cylinders")
    sp.add_argument("--surface", required=True)
    sp.add_argument("--max-length", type=_positive_rational, required=True)
    sp.add_argument("--csv")

    sp = add("shortset", cmd_shortset, "short curves and short saddle connections")
    sp.add_argument("--surface", required=True)
    sp.add_argument("--epsilon", type=_positive_rational, default=Fraction(1, 10))
    sp.add_argument("--tau", type=_positive_rational, default=Fraction(3))
    sp.add_argument("--out")

    sp = add("triangulate", cmd_triangulate, "build and verify a regular triangulation")
    sp.add_argument("--surface", required=True)
    sp.add_argument("--tau", type=_positive_rational, required=True)
    sp.add_argument("--epsilon", type=_positive_rational, default=Fraction(1, 10))
    sp.add_argument("--seed", dest="seed_edges", help="JSON list of edge ids or {start, vector} records")
    sp.add_argument("--out")

    sp = add("imatrix", cmd_imatrix, "intersection matrix of two edge sets")
    sp.add_argument("--surface", required=True)
    sp.add_argument("--tri-a", required=True)
    sp.add_argument("--tri-b", required=True)
    sp.add_argument("--at-singularities", action="store_true")
    sp.add_argument("--csv")

    sp = add("cover", cmd_cover, "orientation double cover")
    sp.add_argument("--surface", required=True)
    sp.add_argument("--out")

    sp = add("hdim", cmd_hdim, "relative homology dimensions")
    sp.add_argument("--surface", required=True)
    sp.add_argument("--out")

    sp = add("count-torus", cmd_count_torus, "count closed geodesics of the modular surface")
    sp.add_argument("--r-min", type=_rational, default=Fraction(4))
    sp.add_argument("--r-max", type=_rational, default=Fraction(8))
    sp.add_argument("--step", type=_positive_rational, default=Fraction(1, 2))
    sp.add_argument("--thin", type=int, default=1)
    sp.add_argument("--theta", type=_unit, default=Fraction(0))
    sp.add_argument("--csv")
    sp.add_argument("--svg")

    sp = add("walk-sim", cmd_walk_sim, "count thin trajectories on a weighted net")
    sp.add_argument("--net", required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--theta", type=_unit, default=Fraction(0))
    sp.add_argument("--start")
    sp.add_argument("--end")
    sp.add_argument("--certify", action="store_true")
    sp.add_argument("--csv")

    sp = add("acceptance", cmd_acceptance, "run one acceptance experiment, or all")
    sp.add_argument("--criterion", type=int, choices=range(1, 11))
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "validate" and not (args.path or args.surface):
        parser.error("validate needs a surface")
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
