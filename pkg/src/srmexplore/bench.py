"""Benchmarks and multi-run comparisons.

Three experiment surfaces:

- ``compare``: strategy cross-product over scenarios and seeds with
  mean/std aggregation of path length and exploration time.
- ``benchmark_frontier``: replays one exploration episode evaluating the
  node-anchored detector with pruning, without pruning, and the full-grid
  oracle side by side, checking soundness and cluster closure per step.
- ``benchmark_planner``: freezes a built roadmap + belief per map, then
  times roadmap-A* against RRT* on identical query sets.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.ndimage import label as cc_label

from .ceplan import CEConfig
from .episode import EpisodeConfig, EpisodeMetrics, run_episode
from .frontier import FrontierIndex, detect_frontiers, oracle_full_scan
from .rng import Stream
from .roadmap import UnreachableError, shortest_path
from .rrt import RrtConfig, rrt_star_plan
from .scenario import resolve_scenario
from .world import Pose


# -- strategy comparison ----------------------------------------------------

@dataclass
class CompareRow:
    scenario: str
    strategy: str
    seed: int
    status: str
    path_length: float
    sim_time: float
    nodes: int


@dataclass
class CompareReport:
    rows: list
    runs: dict  # (scenario, strategy, seed) -> EpisodeMetrics

    def aggregate(self) -> list[dict]:
        """Mean/std (n-1 denominator) per (scenario, strategy), Stuck excluded."""
        groups: dict = {}
        for row in self.rows:
            groups.setdefault((row.scenario, row.strategy), []).append(row)
        out = []
        for (scenario, strategy), rows in sorted(groups.items()):
            ok = [r for r in rows if r.status != "Stuck"]
            lengths = np.array([r.path_length for r in ok])
            times = np.array([r.sim_time for r in ok])
            out.append({
                "scenario": scenario, "strategy": strategy,
                "n_seeds": len(rows), "n_stuck": len(rows) - len(ok),
                "mean_path": float(lengths.mean()) if len(ok) else math.nan,
                "std_path": float(lengths.std(ddof=1)) if len(ok) > 1 else 0.0,
                "mean_time": float(times.mean()) if len(ok) else math.nan,
                "std_time": float(times.std(ddof=1)) if len(ok) > 1 else 0.0,
            })
        return out

    def runs_csv(self) -> str:
        lines = ["scenario,strategy,seed,status,path_length_m,sim_time_s,nodes"]
        for r in self.rows:
            lines.append(f"{r.scenario},{r.strategy},{r.seed},{r.status},"
                         f"{r.path_length!r},{r.sim_time!r},{r.nodes}")
        return "\n".join(lines) + "\n"

    def summary_csv(self) -> str:
        lines = ["scenario,strategy,n_seeds,n_stuck,mean_path_m,std_path_m,"
                 "mean_time_s,std_time_s"]
        for a in self.aggregate():
            lines.append(f"{a['scenario']},{a['strategy']},{a['n_seeds']},"
                         f"{a['n_stuck']},{a['mean_path']!r},{a['std_path']!r},"
                         f"{a['mean_time']!r},{a['std_time']!r}")
        return "\n".join(lines) + "\n"


def _run_one(cfg: EpisodeConfig) -> EpisodeMetrics:
    return run_episode(cfg)


def compare(scenarios, strategies, seeds, base_cfg: EpisodeConfig | None = None,
            jobs: int = 1) -> CompareReport:
    """Full cross product of runs, merged in (scenario, strategy, seed) order.

    Episodes share nothing, so ``jobs > 1`` distributes them over worker
    processes; results are identical to the sequential run.
    """
    if len(list(seeds)) < 1:
        raise ValueError("need at least one seed")
    configs = []
    for scenario in scenarios:
        for strategy in strategies:
            for seed in seeds:
                if base_cfg is not None:
                    cfg = replace(base_cfg, scenario=scenario, strategy=strategy,
                                  seed=seed)
                else:
                    cfg = EpisodeConfig(scenario=scenario, strategy=strategy,
                                        seed=seed)
                configs.append(cfg)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, configs))
    else:
        results = [run_episode(cfg) for cfg in configs]

    rows = []
    runs = {}
    for cfg, metrics in zip(configs, results):
        rows.append(CompareRow(metrics.scenario, cfg.strategy, metrics.seed,
                               metrics.status, metrics.total_path_length,
                               metrics.total_sim_time, metrics.node_count))
        runs[(metrics.scenario, cfg.strategy, metrics.seed)] = metrics
    return CompareReport(rows=rows, runs=runs)


# -- frontier detection benchmark -------------------------------------------

FRONTIER_BENCH_HEADER = (
    "step,sim_time,ops_pruned,ops_unpruned,ops_oracle,"
    "wall_us_pruned,wall_us_unpruned,wall_us_oracle,"
    "nodes_scanned_pruned,nodes_scanned_unpruned,closed_nodes,"
    "detected_cells,oracle_cells,soundness_ok,closure_ok")


def _oracle_components(grid) -> list[set]:
    from .frontier import frontier_mask

    mask = frontier_mask(grid)
    labels, n = cc_label(mask, structure=np.ones((3, 3), dtype=int))
    comps = []
    for i in range(1, n + 1):
        rows, cols = np.nonzero(labels == i)
        comps.append(set(zip(cols.tolist(), rows.tolist())))
    return comps


def benchmark_frontier(scenario, seed: int, cfg: EpisodeConfig | None = None,
                       max_steps: int | None = None) -> list[dict]:
    """Replay one roadmap-building episode, scoring detectors per step.

    Per step: (a) node-anchored detection with the episode's closed set,
    (b) the same detector with pruning disabled, (c) the exhaustive
    full-grid oracle.  Soundness (detected cells all pass the frontier
    test) and cluster closure (touched oracle components fully recovered)
    are asserted on variant (a); any violation aborts.
    """
    if cfg is None:
        cfg = EpisodeConfig(scenario=scenario, strategy="srm", seed=seed,
                            ce=CEConfig(sample_count=20, max_iters=8))
    else:
        cfg = replace(cfg, scenario=scenario, seed=seed)
    rows: list[dict] = []
    unpruned_index: dict = {}

    def observer(step_i, sim_time, grid, graph, index, label_fn):
        if max_steps is not None and step_i >= max_steps:
            return
        # pruned variant: re-run with a copy of the episode's closed set
        a_index = FrontierIndex(index.raycast_radius, index.n_rays,
                                closed_nodes=set(index.closed_nodes))
        t0 = time.perf_counter_ns()
        detect_frontiers(grid, graph, a_index, label_fn=None, assign_gains=False)
        wall_a = (time.perf_counter_ns() - t0) / 1000.0
        # unpruned variant: closed set disabled
        b_index = FrontierIndex(index.raycast_radius, index.n_rays)
        t0 = time.perf_counter_ns()
        detect_frontiers(grid, graph, b_index, label_fn=None, use_pruning=False,
                         assign_gains=False)
        wall_b = (time.perf_counter_ns() - t0) / 1000.0
        # oracle
        t0 = time.perf_counter_ns()
        oracle = oracle_full_scan(grid)
        wall_c = (time.perf_counter_ns() - t0) / 1000.0
        ops_oracle = grid.width_cells * grid.height_cells

        detected = a_index.all_cells()
        sound = detected <= oracle
        closure = True
        for comp in _oracle_components(grid):
            if comp & detected and not comp <= detected:
                closure = False
                break
        if not (sound and closure):
            raise AssertionError(
                f"frontier detector violation at step {step_i}: "
                f"soundness={sound} closure={closure}")
        rows.append({
            "step": step_i, "sim_time": sim_time,
            "ops_pruned": a_index.last_stats.ops,
            "ops_unpruned": b_index.last_stats.ops,
            "ops_oracle": ops_oracle,
            "wall_us_pruned": wall_a, "wall_us_unpruned": wall_b,
            "wall_us_oracle": wall_c,
            "nodes_scanned_pruned": a_index.last_stats.nodes_scanned,
            "nodes_scanned_unpruned": b_index.last_stats.nodes_scanned,
            "closed_nodes": len(index.closed_nodes),
            "detected_cells": len(detected), "oracle_cells": len(oracle),
            "soundness_ok": int(sound), "closure_ok": int(closure),
        })

    run_episode(cfg, observer=observer)
    return rows


def frontier_bench_csv(rows: list[dict]) -> str:
    lines = [FRONTIER_BENCH_HEADER]
    for r in rows:
        lines.append(",".join(repr(r[k]) if isinstance(r[k], float) else str(r[k])
                              for k in FRONTIER_BENCH_HEADER.split(",")))
    return "\n".join(lines) + "\n"


# -- planner timing benchmark ------------------------------------------------

PLANNER_BENCH_HEADER = ("map,planner,query_id,elapsed_us,collision_checks,"
                        "nodes_expanded,success,first_solution_sample")


def benchmark_planner(scenarios, n_queries: int = 50, seed: int = 0,
                      rrt_cfg: RrtConfig | None = None,
                      build_cfg: EpisodeConfig | None = None,
                      frozen_state=None) -> list[dict]:
    """Time roadmap-A* against RRT* on identical query sets per map.

    Each map runs one roadmap-building episode (nearest-frontier strategy:
    the planner comparison keeps the decision layer fixed), freezes graph
    and belief, and draws ``n_queries`` random node pairs.
    """
    rrt_cfg = rrt_cfg or RrtConfig()
    rows: list[dict] = []
    for scenario in scenarios:
        if frozen_state is not None and scenario in frozen_state:
            graph, grid, name = frozen_state[scenario]
        else:
            cfg = build_cfg or EpisodeConfig(scenario=scenario, strategy="nearest",
                                             seed=seed)
            cfg = replace(cfg, scenario=scenario, seed=seed)
            graph, grid, name = _build_frozen(cfg)
        r_robot = 2.0 * grid.resolution
        rng = Stream(seed).child("planner-bench", name).generator()
        n_nodes = len(graph)
        queries = []
        while len(queries) < n_queries:
            a = int(rng.integers(0, n_nodes))
            b = int(rng.integers(0, n_nodes))
            if a != b:
                queries.append((a, b))
        for qid, (a, b) in enumerate(queries):
            stats: dict = {}
            t0 = time.perf_counter_ns()
            try:
                shortest_path(graph, a, b, stats=stats)
                success = True
            except UnreachableError:
                success = False
            elapsed = (time.perf_counter_ns() - t0) / 1000.0
            rows.append({"map": name, "planner": "srm_astar", "query_id": qid,
                         "elapsed_us": elapsed, "collision_checks": 0,
                         "nodes_expanded": stats.get("nodes_expanded", 0),
                         "success": int(success), "first_solution_sample": -1})

            na, nb = graph.nodes[a], graph.nodes[b]
            rstats: dict = {}
            t0 = time.perf_counter_ns()
            traj = rrt_star_plan(grid, Pose(na.x, na.y), Pose(nb.x, nb.y),
                                 rrt_cfg, Stream(seed).child("rrt", name, qid),
                                 r_robot, stats=rstats)
            elapsed = (time.perf_counter_ns() - t0) / 1000.0
            rows.append({"map": name, "planner": "rrt_star", "query_id": qid,
                         "elapsed_us": elapsed,
                         "collision_checks": rstats.get("collision_checks", 0),
                         "nodes_expanded": rstats.get("samples", 0),
                         "success": int(traj is not None),
                         "first_solution_sample": rstats.get("first_solution_sample", -1)})
    return rows


def _build_frozen(cfg: EpisodeConfig):
    """Run an episode and return its final graph and belief grid."""
    holder: dict = {}

    def observer(step_i, sim_time, grid, graph, index, label_fn):
        holder["grid"] = grid
        holder["graph"] = graph

    metrics = run_episode(cfg, observer=observer)
    scen = resolve_scenario(cfg.scenario)
    return holder["graph"], holder["grid"], scen.name


def planner_bench_csv(rows: list[dict]) -> str:
    lines = [PLANNER_BENCH_HEADER]
    for r in rows:
        lines.append(",".join(repr(r[k]) if isinstance(r[k], float) else str(r[k])
                              for k in PLANNER_BENCH_HEADER.split(",")))
    return "\n".join(lines) + "\n"
