"""Episode loop: sense, map, grow the roadmap, detect, decide, move.

One episode is a pure function of its config (scenario + strategy + seed
+ parameters): identical configs produce byte-identical metrics and
decision logs.  Simulated time advances in fixed ``dt`` steps; wall time
never influences behavior.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .ceplan import CEConfig, ce_optimize
from .decide import (TargetCandidate, enumerate_candidates, select_nbt_combined,
                     select_nbt_max_entropy, select_nbt_nearest_frontier,
                     select_nbt_srm)
from .frontier import (FrontierConfig, FrontierIndex, detect_frontiers,
                       oracle_full_scan, reopen_nodes)
from .grid import (FREE, GridParams, OccupancyGrid, cell_entropy,
                   integrate_scan, map_entropy)
from .paths import Trajectory
from .rng import Stream
from .roadmap import (SrmGraph, UnreachableError, invalidate_and_replan,
                      nearest_node, sample_candidates, shortest_path, try_insert)
from .rrt import RrtConfig
from .scenario import Scenario, resolve_scenario
from .world import (Pose, reachable_free_mask, semantic_label_at, simulate_scan,
                    step_motion)

STRATEGIES = ("srm", "nearest", "maxent", "combined")


class InvariantViolation(RuntimeError):
    """A runtime consistency check failed; the episode state is suspect."""


@dataclass(frozen=True)
class EpisodeConfig:
    scenario: str
    strategy: str = "srm"
    seed: int | None = None          # None -> the scenario file's seed
    speed: float = 0.3
    dt: float = 0.5
    max_sim_time: float = 2400.0
    gamma1: float = 1.0
    gamma2: float = 0.5
    grid_params: GridParams = field(default_factory=GridParams)
    ce: CEConfig = field(default_factory=CEConfig)
    frontier: FrontierConfig = field(default_factory=FrontierConfig)
    # budgeted first-solution RRT* keeps the combined baseline affordable
    rrt: RrtConfig = field(default_factory=lambda: RrtConfig(
        max_samples=1500, stop_at_first_solution=True))
    r_robot: float | None = None     # None -> 2 * grid resolution
    min_edge_len: float = 0.3
    sample_margin: float = 0.05
    stuck_limit: int = 3

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.max_sim_time < 0:
            raise ValueError("max_sim_time must be >= 0")


@dataclass
class MetricsRow:
    sim_time: float
    map_entropy_bits: float
    normalized_entropy: float
    traveled_length_m: float
    frontier_cells: int
    srm_nodes: int
    closed_nodes: int
    detection_op_count: int


METRICS_HEADER = ("sim_time,map_entropy_bits,normalized_entropy,traveled_length_m,"
                  "frontier_cells,srm_nodes,closed_nodes,detection_op_count")


@dataclass
class EpisodeMetrics:
    scenario: str
    strategy: str
    seed: int
    status: str                      # Complete | Timeout | Stuck
    rows: list
    decisions: list
    total_path_length: float
    total_sim_time: float
    node_count: int
    reachable_free_cells: int
    matched_reachable_free_cells: int
    reachable_entropy_bits_per_cell: float

    @property
    def match_fraction(self) -> float:
        if self.reachable_free_cells == 0:
            return 1.0
        return self.matched_reachable_free_cells / self.reachable_free_cells

    def entropy_at(self, sim_time: float) -> float:
        """Normalized entropy at a sim time (step curve, clamped at the ends)."""
        times = [r.sim_time for r in self.rows]
        idx = int(np.searchsorted(times, sim_time, side="right")) - 1
        idx = max(0, min(idx, len(self.rows) - 1))
        return self.rows[idx].normalized_entropy

    def metrics_csv(self) -> str:
        lines = [METRICS_HEADER]
        for r in self.rows:
            lines.append(f"{r.sim_time!r},{r.map_entropy_bits!r},"
                         f"{r.normalized_entropy!r},{r.traveled_length_m!r},"
                         f"{r.frontier_cells},{r.srm_nodes},{r.closed_nodes},"
                         f"{r.detection_op_count}")
        return "\n".join(lines) + "\n"

    def decisions_jsonl(self) -> str:
        return "".join(json.dumps(d, sort_keys=True) + "\n" for d in self.decisions)


def _dense_trajectory(robot: Pose, positions: np.ndarray) -> Trajectory:
    points = [[robot.x, robot.y]]
    for x, y in positions:
        if math.hypot(x - points[-1][0], y - points[-1][1]) > 1e-9:
            points.append([float(x), float(y)])
    if len(points) == 1:
        points.append(points[0][:])
    return Trajectory(np.array(points))


def _remaining_feasible(traj: Trajectory, arc: float, occ, resolution: float,
                        r_robot: float) -> bool:
    from .geom import segment_clear

    if arc >= traj.length - 1e-9:
        return True
    cur = traj.point_at(arc)
    cum = traj._cum
    wp = traj.waypoints
    nxt = int(np.searchsorted(cum, arc, side="right"))
    pts = [cur] + [wp[i] for i in range(min(nxt, len(wp)), len(wp))]
    for (ax, ay), (bx, by) in zip(pts[:-1], pts[1:]):
        if not segment_clear(occ, ax, ay, bx, by, r_robot, resolution):
            return False
    return True


def run_episode(cfg: EpisodeConfig, observer=None) -> EpisodeMetrics:
    scen = resolve_scenario(cfg.scenario)
    world = scen.world
    sensor = scen.sensor
    seed = cfg.seed if cfg.seed is not None else scen.seed
    stream = Stream(seed)
    res = world.resolution
    r_robot = cfg.r_robot if cfg.r_robot is not None else 2.0 * res
    vantage_eps = res  # nodes this close to the robot offer no new viewpoint

    grid = OccupancyGrid(world.width_cells, world.height_cells, res, cfg.grid_params)
    label_fn = lambda pose: semantic_label_at(world, pose)
    graph = SrmGraph(world.start, label_fn(world.start))
    radius = cfg.frontier.raycast_radius or sensor.max_range
    index = FrontierIndex(raycast_radius=radius, n_rays=cfg.frontier.n_rays)

    reach_mask = reachable_free_mask(world)
    pose = world.start
    sim_time = 0.0
    traveled = 0.0
    h0 = map_entropy(grid)
    rows: list[MetricsRow] = []
    decisions: list[dict] = []
    target: TargetCandidate | None = None
    trajectory: Trajectory | None = None
    stuck = 0
    status = "Timeout"
    step_i = 0

    def record(det_ops: int):
        h = map_entropy(grid)
        rows.append(MetricsRow(sim_time, h, h / h0 if h0 > 0 else 0.0, traveled,
                               index.cell_count, len(graph),
                               len(index.closed_nodes), det_ops))

    if cfg.max_sim_time == 0:
        record(0)
        return _finalize(cfg, scen, seed, "Timeout", rows, decisions, traveled,
                         sim_time, graph, grid, reach_mask)

    while sim_time < cfg.max_sim_time - 1e-9:
        scan = simulate_scan(world, pose, sensor)
        changed = integrate_scan(grid, scan)
        occ = grid.occupied_mask()

        points = sample_candidates(scan, stream.child("sample", step_i).generator(),
                                   (world.width_m, world.height_m),
                                   margin=cfg.sample_margin)
        for cand in points:
            try_insert(graph, cand, grid, cfg.min_edge_len, r_robot,
                       label_fn=label_fn, occupied_mask=occ)

        if cfg.frontier.reopen_on_change:
            reopen_nodes(index, changed, graph, res)
        detect_frontiers(grid, graph, index, label_fn)
        det_ops = index.last_stats.ops
        if observer is not None:
            observer(step_i, sim_time, grid, graph, index, label_fn)

        need_select = trajectory is None
        if not need_select:
            node = graph.nodes[target.node_id]
            arc = trajectory.arc_position(pose.x, pose.y)
            if arc >= trajectory.length - 1e-9:
                need_select = True
            elif node.closed or node.info_gain <= 0:
                need_select = True
            elif not _remaining_feasible(trajectory, arc, occ, res, r_robot):
                need_select = True

        if need_select:
            outcome, target, trajectory = _select_target(
                cfg, stream, grid, graph, index, pose, sensor, occ, r_robot,
                vantage_eps, label_fn, reach_mask)
            if outcome == "complete":
                status = "Complete"
                record(det_ops)
                break
            if outcome == "unreachable":
                stuck += 1
                if stuck >= cfg.stuck_limit:
                    status = "Stuck"
                    record(det_ops)
                    break
                record(det_ops)
                sim_time += cfg.dt
                step_i += 1
                continue
            stuck = 0
            decisions.append({
                "sim_time": sim_time,
                "strategy": cfg.strategy,
                "case": outcome,
                "n_candidates": target.n_candidates,
                "node": target.node_id,
                "label": str(target.label),
                "score": target.reward_value,
                "path_length": trajectory.length,
            })

        prev = pose
        pose = step_motion(pose, trajectory, cfg.speed, cfg.dt)
        col, row = world.cell_of(pose.x, pose.y)
        if not world.in_bounds(col, row) or world.solid[row, col]:
            raise InvariantViolation(
                f"robot entered a solid cell at ({pose.x:.3f}, {pose.y:.3f}), "
                f"t={sim_time:.2f}, target node {target.node_id}")
        arc_prev = trajectory.arc_position(prev.x, prev.y)
        arc_now = trajectory.arc_position(pose.x, pose.y)
        traveled += max(0.0, arc_now - arc_prev)
        sim_time += cfg.dt
        record(det_ops)
        step_i += 1

    return _finalize(cfg, scen, seed, status, rows, decisions, traveled, sim_time,
                     graph, grid, reach_mask)


def _select_target(cfg, stream, grid, graph, index, pose, sensor, occ, r_robot,
                   vantage_eps, label_fn, reach_mask):
    """Pick the next target per strategy; returns (outcome, target, trajectory).

    Outcome is the decision case ("1", "2", or "baseline"), or "complete" /
    "unreachable" when there is nothing (or nothing reachable) left.
    """
    cands = _viable_candidates(graph, pose, vantage_eps)
    if not cands and index.closed_nodes:
        # recovery: new scans may have created frontiers no open node sees
        index.closed_nodes.clear()
        detect_frontiers(grid, graph, index, label_fn)
        cands = _viable_candidates(graph, pose, vantage_eps)
    if not cands:
        frontiers = oracle_full_scan(grid)
        reachable = [cell for cell in frontiers if reach_mask[cell[1], cell[0]]]
        if not reachable:
            return "complete", None, None
        return "unreachable", None, None

    case = "baseline"
    try:
        if cfg.strategy == "srm":
            rooms = any(c.label.is_room for c in cands)
            case = "1" if rooms else "2"
            chosen = select_nbt_srm(cands, cfg.ce, grid, sensor,
                                    stream.child("decide"), r_robot)
        elif cfg.strategy == "nearest":
            chosen = _nearest_frontier_filtered(index, graph, pose, vantage_eps)
        elif cfg.strategy == "maxent":
            chosen = select_nbt_max_entropy(cands)
        else:
            chosen = select_nbt_combined(cands, grid, pose, cfg.gamma1, cfg.gamma2,
                                         cfg.rrt, stream.child("decide"), r_robot)
    except UnreachableError:
        return "unreachable", None, None

    try:
        path = invalidate_and_replan(graph, chosen.sparse_path, grid, r_robot)
    except UnreachableError:
        return "unreachable", None, None

    seed_traj = _dense_trajectory(pose, path.positions(graph))
    if cfg.strategy == "srm":
        trajectory = ce_optimize(seed_traj, grid, sensor, cfg.ce,
                                 stream.child("ce", chosen.node_id), r_robot)
    elif cfg.strategy == "combined" and chosen.optimized is not None:
        trajectory = chosen.optimized
    else:
        trajectory = seed_traj
    chosen.n_candidates = len(cands)
    return case, chosen, trajectory


def _viable_candidates(graph, pose, vantage_eps):
    cands = enumerate_candidates(graph, pose)
    return [c for c in cands
            if math.hypot(c.goal_xy[0] - pose.x, c.goal_xy[1] - pose.y) > vantage_eps]


def _nearest_frontier_filtered(index, graph, pose, vantage_eps):
    """Nearest-frontier target skipping nodes at the robot's own position."""
    if not index.clusters:
        raise UnreachableError("no frontier clusters")
    from .decide import make_candidate

    source = nearest_node(graph, pose)
    best = None
    best_key = None
    for cluster in index.clusters:
        node_id = nearest_node(graph, cluster.centroid)
        node = graph.nodes[node_id]
        if math.hypot(node.x - pose.x, node.y - pose.y) <= vantage_eps:
            continue
        try:
            path = shortest_path(graph, source, node_id)
        except UnreachableError:
            continue
        key = (path.length, node_id)
        if best_key is None or key < best_key:
            best_key = key
            best = make_candidate(graph, node_id, path)
    if best is None:
        raise UnreachableError("every frontier cluster is unreachable")
    return best


def _finalize(cfg, scen, seed, status, rows, decisions, traveled, sim_time,
              graph, grid, reach_mask) -> EpisodeMetrics:
    state = grid.state_grid()
    free_truth = reach_mask
    n_reachable = int(free_truth.sum())
    matched = int((state[free_truth] == FREE).sum())
    if n_reachable:
        p = grid.p()[free_truth]
        h_per_cell = float(cell_entropy(p).sum() / n_reachable)
    else:
        h_per_cell = 0.0
    return EpisodeMetrics(
        scenario=scen.name, strategy=cfg.strategy, seed=seed, status=status,
        rows=rows, decisions=decisions, total_path_length=traveled,
        total_sim_time=sim_time, node_count=len(graph),
        reachable_free_cells=n_reachable, matched_reachable_free_cells=matched,
        reachable_entropy_bits_per_cell=h_per_cell)
