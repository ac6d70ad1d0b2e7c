"""Command-line interface.

Every command prints a JSON document to stdout embedding the full
invocation; file outputs (graphs, CSV curves) carry the invocation in
``#`` comment headers.  Exit codes: 0 success, 1 usage error, 2 data
error.  Commands with sampling require an explicit seed, so identical
invocations produce identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .asrel import ParseError, SnapshotMeta, parse_caida, write_graph
from .game import GameParams, clique_size_bound, cone_size_bound, enumerate_equilibria
from .graph import GraphConstructionError, spider_coverage, top_clique, verify_spider
from .metrics import (
    basic_metrics,
    cone_ccdf,
    degree_ccdf,
    overlap_ccdf,
    peering_likelihood,
    write_curve_csv,
)
from .theory import bound_timeseries, estimate_phis, peering_prob, solve_cone_profile
from .yeas import CalibrationError, YeasParams, calibrate_q, generate


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1 instead of argparse's 2
        raise _UsageError(message)


def _invocation(argv: list[str]) -> list[str]:
    return ["aslab", *argv]


def _emit(doc: dict, argv: list[str]) -> None:
    doc = {"invocation": _invocation(argv), **doc}
    json.dump(doc, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _load_graph(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_caida(fh, source_path=path)


def _curve_comments(argv: list[str]) -> list[str]:
    return [f"invocation: {' '.join(_invocation(argv))}"]


# ---------------------------------------------------------------------------
# commands


def _cmd_generate(args, argv):
    params = YeasParams(
        n=args.n, q=args.q, alpha=args.alpha, beta=args.beta, radius=args.radius, seed=args.seed
    )
    if args.calibrate_k is not None:
        q_used = calibrate_q(params, target_clique_size=args.calibrate_k)
        params = replace(params, q=q_used)
    result = generate(params, phase2_method=args.phase2_method)
    g = result.graph
    comments = (
        f"# invocation: {' '.join(_invocation(argv))}",
        f"# generator: yeas n={params.n} q={params.q!r} alpha={params.alpha!r} "
        f"beta={params.beta!r} radius={params.radius!r} seed={params.seed}",
        f"# clique: {' '.join(str(u) for u in sorted(result.clique))}",
    )
    meta = SnapshotMeta.identity(g.node_count, comments)
    with open(args.out, "w", encoding="utf-8") as fh:
        write_graph(g, meta, fh)
    if args.coords:
        with open(args.coords, "w", encoding="utf-8") as fh:
            fh.write(f"# invocation: {' '.join(_invocation(argv))}\n")
            fh.write("node,r,phi\n")
            for node, pt in enumerate(result.coords):
                fh.write(f"{node},{pt.r!r},{pt.phi!r}\n")
    if args.clique:
        with open(args.clique, "w", encoding="utf-8") as fh:
            for u in sorted(result.clique):
                fh.write(f"{u}\n")
    _emit(
        {
            "command": "generate",
            "n": params.n,
            "q": params.q,
            "alpha": params.alpha,
            "beta": params.beta,
            "radius": params.radius,
            "seed": params.seed,
            "clique_size": len(result.clique),
            "peer_edges": len(g.peer_edges),
            "cp_edges": len(g.cp_edges),
            "out": args.out,
        },
        argv,
    )
    return 0


def _cmd_metrics(args, argv):
    g, _ = _load_graph(args.graph)
    mode = args.mode
    if mode == "auto":
        mode = "exact" if g.node_count <= args.exact_threshold else "sampled"
    if mode == "sampled" and args.seed is None:
        raise _UsageError("sampled distance mode requires --seed")
    report = basic_metrics(
        g,
        mode=mode,
        exact_threshold=args.exact_threshold,
        sample_sources=args.sample_sources,
        seed=args.seed,
    )
    if args.degree_ccdf:
        with open(args.degree_ccdf, "w", encoding="utf-8") as fh:
            write_curve_csv(degree_ccdf(g), fh, comments=_curve_comments(argv))
    if args.cone_ccdf:
        with open(args.cone_ccdf, "w", encoding="utf-8") as fh:
            write_curve_csv(cone_ccdf(g), fh, comments=_curve_comments(argv))
    _emit({"command": "metrics", "graph": args.graph, "report": report.to_dict()}, argv)
    return 0


def _cmd_spider(args, argv):
    g, meta = _load_graph(args.graph)
    report = verify_spider(g, pair_cap=args.pair_cap, seed=args.seed)
    ext = meta.external_of()
    _emit(
        {
            "command": "spider",
            "graph": args.graph,
            "provider_free_nodes": len(report.clique_nodes),
            "is_peer_clique": report.is_peer_clique,
            "forest_ok": report.forest_ok,
            "cone_disjointness_violations": report.cone_disjointness_violations,
            "clique_internal_edges_exempted": report.clique_internal_edges_exempted,
            "is_spider": report.is_spider,
            "coverage": spider_coverage(g),
            "top_clique": sorted(ext[u] for u in top_clique(g)),
        },
        argv,
    )
    return 0


def _cmd_overlap(args, argv):
    g, _ = _load_graph(args.graph)
    curve, zero_fraction = overlap_ccdf(g, samples=args.samples, seed=args.seed)
    if args.curve:
        with open(args.curve, "w", encoding="utf-8") as fh:
            write_curve_csv(curve, fh, comments=_curve_comments(argv))
    _emit(
        {
            "command": "overlap",
            "graph": args.graph,
            "samples": args.samples,
            "seed": args.seed,
            "zero_fraction": zero_fraction,
        },
        argv,
    )
    return 0


def _cmd_peering(args, argv):
    g, _ = _load_graph(args.graph)
    curve = peering_likelihood(g)
    if args.curve:
        with open(args.curve, "w", encoding="utf-8") as fh:
            write_curve_csv(curve, fh, comments=_curve_comments(argv))
    _emit(
        {
            "command": "peering",
            "graph": args.graph,
            "rows": [list(row) for row in curve.rows()],
        },
        argv,
    )
    return 0


def _cmd_game_enumerate(args, argv):
    params = GameParams(args.phi_p, args.phi_r)
    found = enumerate_equilibria(args.n, params, include_cp_additions=args.include_cp_additions)
    equilibria = []
    for profile, g in found:
        equilibria.append(
            {
                "peer_edges": [list(e) for e in sorted(g.peer_edges)],
                "cp_edges": [list(e) for e in sorted(g.cp_edges)],
                "clique": sorted(verify_spider(g).clique_nodes),
                "is_spider": verify_spider(g).is_spider,
                "profile_actions": [int(a) for a in profile.actions],
            }
        )
    _emit(
        {
            "command": "game-enumerate",
            "n": args.n,
            "phi_p": args.phi_p,
            "phi_r": args.phi_r,
            "equilibria": equilibria,
        },
        argv,
    )
    return 0


def _cmd_bounds(args, argv):
    params = GameParams(args.phi_p, args.phi_r)
    doc = {
        "command": "bounds",
        "phi_p": args.phi_p,
        "phi_r": args.phi_r,
        "clique_size_bound": clique_size_bound(params),
    }
    if args.n is not None and args.clique_size is not None:
        doc["cone_size_bound"] = float(cone_size_bound(args.n, args.clique_size, params))
    _emit(doc, argv)
    return 0


def _cmd_theory_cone_profile(args, argv):
    profile = solve_cone_profile(args.radius, args.grid, scheme=args.scheme)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            for line in _curve_comments(argv):
                fh.write(f"# {line}\n")
            fh.write("r,expected_cone\n")
            for r, v in zip(profile.grid, profile.values):
                fh.write(f"{r!r},{v!r}\n")
    _emit(
        {
            "command": "theory-cone-profile",
            "radius": args.radius,
            "grid": args.grid,
            "scheme": args.scheme,
            "value_at_zero": profile.values[0],
            "value_at_half_radius": profile.value_at(args.radius / 2.0),
        },
        argv,
    )
    return 0


def _cmd_theory_peering(args, argv):
    r2s = np.linspace(args.radius / args.grid, args.radius, args.grid)
    rows = []
    for r2 in r2s:
        exact, approx = peering_prob(float(r2), args.radius)
        rows.append((float(r2), exact, approx))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            for line in _curve_comments(argv):
                fh.write(f"# {line}\n")
            fh.write("r2,exact,approx\n")
            for r2, exact, approx in rows:
                fh.write(f"{r2!r},{exact!r},{approx!r}\n")
    _emit(
        {
            "command": "theory-peering",
            "radius": args.radius,
            "grid": args.grid,
            "max_ratio": max(e / a for _, e, a in rows if a > 0),
        },
        argv,
    )
    return 0


def _cmd_estimate_phis(args, argv):
    g, _ = _load_graph(args.graph)
    params = estimate_phis(g, c1=args.c1, c2=args.c2)
    _emit(
        {
            "command": "estimate-phis",
            "graph": args.graph,
            "c1": args.c1,
            "c2": args.c2,
            "nodes": g.node_count,
            "peer_edges": len(g.peer_edges),
            "cp_edges": len(g.cp_edges),
            "phi_p": float(params.phi_p),
            "phi_r": float(params.phi_r),
        },
        argv,
    )
    return 0


def _cmd_timeseries(args, argv):
    directory = Path(args.snapshots)
    if not directory.is_dir():
        raise FileNotFoundError(f"snapshot directory not found: {directory}")
    snapshots = []
    for path in sorted(directory.iterdir()):
        if path.is_file():
            with open(path, "r", encoding="utf-8") as fh:
                g, _ = parse_caida(fh, source_path=str(path))
            snapshots.append((path.name, g))
    rows = bound_timeseries(snapshots, c1=args.c1, c2=args.c2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            for line in _curve_comments(argv):
                fh.write(f"# {line}\n")
            header = list(rows[0].to_dict())
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(repr(v) for v in row.to_dict().values()) + "\n")
    _emit(
        {"command": "timeseries", "rows": [row.to_dict() for row in rows]},
        argv,
    )
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> _Parser:
    parser = _Parser(prog="aslab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"aslab {__version__}")
    sub = parser.add_subparsers(dest="subcommand")

    p = sub.add_parser("generate", help="generate a topology", add_help=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=float, default=5.0)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="graph file to write")
    p.add_argument("--coords", help="CSV of node coordinates")
    p.add_argument("--clique", help="file listing clique node ids")
    p.add_argument("--calibrate-k", type=int, help="calibrate q to this clique size")
    p.add_argument("--phase2-method", choices=("auto", "brute", "bucket"), default="auto")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("metrics", help="headline metrics of a graph file")
    p.add_argument("graph")
    p.add_argument("--mode", choices=("auto", "exact", "sampled"), default="auto")
    p.add_argument("--exact-threshold", type=int, default=50_000)
    p.add_argument("--sample-sources", type=int, default=1_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--degree-ccdf", help="write the degree CCDF as CSV")
    p.add_argument("--cone-ccdf", help="write the cone-size CCDF as CSV")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("spider", help="spider-structure report and coverage")
    p.add_argument("graph")
    p.add_argument("--pair-cap", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_spider)

    p = sub.add_parser("overlap", help="cone-overlap sampling")
    p.add_argument("graph")
    p.add_argument("--samples", type=int, default=500_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--curve", help="write the overlap CCDF as CSV")
    p.set_defaults(func=_cmd_overlap)

    p = sub.add_parser("peering", help="peering likelihood by minimum cone size")
    p.add_argument("graph")
    p.add_argument("--curve", help="write the likelihood curve as CSV")
    p.set_defaults(func=_cmd_peering)

    p = sub.add_parser("game", help="formation-game tools")
    game_sub = p.add_subparsers(dest="game_command")
    pe = game_sub.add_parser("enumerate", help="enumerate pairwise-stable states")
    pe.add_argument("--n", type=int, required=True)
    pe.add_argument("--phi-p", type=float, required=True)
    pe.add_argument("--phi-r", type=float, required=True)
    pe.add_argument("--include-cp-additions", action="store_true")
    pe.set_defaults(func=_cmd_game_enumerate)

    p = sub.add_parser("bounds", help="stability bounds for given maintenance costs")
    p.add_argument("--phi-p", type=float, required=True)
    p.add_argument("--phi-r", type=float, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--clique-size", type=int)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("theory", help="numerical theory curves")
    theory_sub = p.add_subparsers(dest="theory_command")
    pc = theory_sub.add_parser("cone-profile", help="expected-cone profile")
    pc.add_argument("--radius", type=float, required=True)
    pc.add_argument("--grid", type=int, default=1024)
    pc.add_argument("--scheme", choices=("order3", "trapezoid"), default="order3")
    pc.add_argument("--out", help="write the profile as CSV")
    pc.set_defaults(func=_cmd_theory_cone_profile)
    pp = theory_sub.add_parser("peering", help="peering probability vs radius")
    pp.add_argument("--radius", type=float, required=True)
    pp.add_argument("--grid", type=int, default=256)
    pp.add_argument("--out", help="write the curve as CSV")
    pp.set_defaults(func=_cmd_theory_peering)

    p = sub.add_parser("estimate-phis", help="maintenance costs from edge counts")
    p.add_argument("graph")
    p.add_argument("--c1", type=float, default=1.1)
    p.add_argument("--c2", type=float, default=0.05)
    p.set_defaults(func=_cmd_estimate_phis)

    p = sub.add_parser("timeseries", help="bound-vs-measurement table over snapshots")
    p.add_argument("--snapshots", required=True, help="directory of relationship files")
    p.add_argument("--c1", type=float, default=1.1)
    p.add_argument("--c2", type=float, default=0.05)
    p.add_argument("--out", help="write the table as CSV")
    p.set_defaults(func=_cmd_timeseries)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    func = getattr(args, "func", None)
    if func is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return func(args, argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (
        ParseError,
        GraphConstructionError,
        CalibrationError,
        FileNotFoundError,
        IsADirectoryError,
        PermissionError,
        ValueError,
        MemoryError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


cli_main = main


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
