"""Command-line interface.

Subcommands: run, compare, bench-frontier, bench-planner, plot.
Exit codes: 0 success, 1 usage/parse error, 2 runtime invariant
violation, 3 stuck/failure outcome.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (benchmark_frontier, benchmark_planner, compare,
                    frontier_bench_csv, planner_bench_csv)
from .episode import EpisodeConfig, InvariantViolation, run_episode
from .scenario import ScenarioError, builtin_scenario_names
from .svgplot import emit_plots

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVARIANT = 2
EXIT_STUCK = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _parse_seeds(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(tok) for tok in text.split(",") if tok]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="srmexplore",
                     description="Roadmap-guided 2D exploration engine and benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one exploration episode")
    run_p.add_argument("--scenario", required=True,
                       help="scenario file or bundled name "
                            f"(bundled: {', '.join(builtin_scenario_names())})")
    run_p.add_argument("--strategy", default="srm",
                       choices=["srm", "nearest", "maxent", "combined"])
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--gamma1", type=float, default=1.0)
    run_p.add_argument("--gamma2", type=float, default=0.5)
    run_p.add_argument("--speed", type=float, default=0.3)
    run_p.add_argument("--dt", type=float, default=0.5)
    run_p.add_argument("--max-sim-time", type=float, default=2400.0)
    run_p.add_argument("--out", type=Path, default=None)

    cmp_p = sub.add_parser("compare", help="strategy comparison cross product")
    cmp_p.add_argument("--scenarios", nargs="+", required=True)
    cmp_p.add_argument("--strategies", default="srm,nearest,maxent",
                       help="comma-separated strategy list")
    cmp_p.add_argument("--seeds", required=True, help="A..B range or comma list")
    cmp_p.add_argument("--jobs", type=int, default=1)
    cmp_p.add_argument("--out", type=Path, required=True)

    bf_p = sub.add_parser("bench-frontier", help="frontier detector benchmark")
    bf_p.add_argument("--scenario", required=True)
    bf_p.add_argument("--seed", type=int, default=0)
    bf_p.add_argument("--out", type=Path, required=True)

    bp_p = sub.add_parser("bench-planner", help="roadmap-A* vs RRT* timing")
    bp_p.add_argument("--scenarios", nargs="+", required=True)
    bp_p.add_argument("--queries", type=int, default=50)
    bp_p.add_argument("--seed", type=int, default=0)
    bp_p.add_argument("--out", type=Path, required=True)

    plot_p = sub.add_parser("plot", help="render SVG plots from output dirs")
    plot_p.add_argument("--in", dest="in_dir", type=Path, required=True)
    plot_p.add_argument("--out", type=Path, required=True)
    return parser


def _cmd_run(args) -> int:
    cfg = EpisodeConfig(scenario=args.scenario, strategy=args.strategy,
                        seed=args.seed, speed=args.speed, dt=args.dt,
                        max_sim_time=args.max_sim_time, gamma1=args.gamma1,
                        gamma2=args.gamma2)
    metrics = run_episode(cfg)
    print(f"{metrics.scenario} strategy={metrics.strategy} seed={metrics.seed} "
          f"status={metrics.status} path={metrics.total_path_length:.2f}m "
          f"time={metrics.total_sim_time:.1f}s nodes={metrics.node_count} "
          f"map_match={metrics.match_fraction:.4f}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "metrics.csv").write_text(metrics.metrics_csv())
        (args.out / "decisions.jsonl").write_text(metrics.decisions_jsonl())
        summary = {
            "scenario": metrics.scenario, "strategy": metrics.strategy,
            "seed": metrics.seed, "status": metrics.status,
            "path_length_m": metrics.total_path_length,
            "sim_time_s": metrics.total_sim_time,
            "nodes": metrics.node_count,
            "match_fraction": metrics.match_fraction,
        }
        (args.out / "summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    return EXIT_STUCK if metrics.status == "Stuck" else EXIT_OK


def _cmd_compare(args) -> int:
    report = compare(args.scenarios, args.strategies.split(","),
                     _parse_seeds(args.seeds), jobs=args.jobs)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "compare_runs.csv").write_text(report.runs_csv())
    (args.out / "compare_summary.csv").write_text(report.summary_csv())
    for agg in report.aggregate():
        print(f"{agg['scenario']} {agg['strategy']}: "
              f"path {agg['mean_path']:.1f}±{agg['std_path']:.1f} m, "
              f"time {agg['mean_time']:.0f}±{agg['std_time']:.0f} s"
              + (f" ({agg['n_stuck']} stuck)" if agg["n_stuck"] else ""))
    return EXIT_OK


def _cmd_bench_frontier(args) -> int:
    rows = benchmark_frontier(args.scenario, args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "frontier_bench.csv").write_text(frontier_bench_csv(rows))
    with_p = sum(r["ops_pruned"] for r in rows)
    without = sum(r["ops_unpruned"] for r in rows)
    print(f"{len(rows)} steps, total detection ops with pruning {with_p}, "
          f"without {without}")
    return EXIT_OK


def _cmd_bench_planner(args) -> int:
    rows = benchmark_planner(args.scenarios, n_queries=args.queries, seed=args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "planner_bench.csv").write_text(planner_bench_csv(rows))
    import statistics
    for name in sorted({r["map"] for r in rows}):
        for planner in ("srm_astar", "rrt_star"):
            times = [r["elapsed_us"] for r in rows
                     if r["map"] == name and r["planner"] == planner]
            print(f"{name} {planner}: median {statistics.median(times):.0f} us")
    return EXIT_OK


def _cmd_plot(args) -> int:
    written = emit_plots(args.in_dir, args.out)
    for path in written:
        print(path)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "compare": _cmd_compare,
        "bench-frontier": _cmd_bench_frontier,
        "bench-planner": _cmd_bench_planner,
        "plot": _cmd_plot,
    }
    try:
        return handlers[args.command](args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
