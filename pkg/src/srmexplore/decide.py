"""Next-best-target selection on the roadmap.

The hierarchical selector works in two cases: while any candidate carries
a room label, rooms are visited in ascending path distance (each call
rebuilds the agenda, which also handles rooms discovered mid-traversal);
once only connecting spaces remain, a shortlist of candidates is
CE-optimized and the one with the best information-versus-length reward
wins.  Nearest-frontier, max-entropy, and a gain-minus-cost score backed
by an RRT* planner are provided as comparison strategies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ceplan import CEConfig, InfoField, ce_optimize
from .frontier import FrontierIndex
from .grid import OccupancyGrid
from .paths import Trajectory
from .rng import Stream
from .roadmap import (SparsePath, SrmGraph, UnreachableError, nearest_node,
                      shortest_path)
from .world import Pose, SensorParams

CASE2_SHORTLIST = 5


@dataclass
class TargetCandidate:
    node_id: int
    label: object
    info_gain: int
    sparse_path: SparsePath
    path_xy: np.ndarray = field(repr=False, default=None)
    optimized: Trajectory | None = None
    reward_value: float = 0.0
    n_candidates: int = 0

    @property
    def goal_xy(self):
        return self.path_xy[-1]


def case2_reward(info: float, length: float, lam: float) -> float:
    """Information-versus-length target score; lower is better."""
    return -info * math.exp(-lam * length)


def make_candidate(graph: SrmGraph, node_id: int, path: SparsePath) -> TargetCandidate:
    node = graph.nodes[node_id]
    return TargetCandidate(node_id, node.label, node.info_gain, path,
                           path.positions(graph))


def enumerate_candidates(graph: SrmGraph, robot: Pose) -> list[TargetCandidate]:
    """All open, gain-carrying nodes with their sparse paths from the robot.

    Nodes the current graph cannot reach are silently excluded.  An empty
    result tells the episode loop that exploration may be complete.
    """
    if len(graph) == 0:
        raise ValueError("empty graph")
    source = nearest_node(graph, robot)
    out = []
    for node in graph.nodes:
        if node.closed or node.info_gain <= 0:
            continue
        try:
            path = shortest_path(graph, source, node.id)
        except UnreachableError:
            continue
        out.append(make_candidate(graph, node.id, path))
    return out


def _room_agenda(cands: list[TargetCandidate]) -> list:
    rooms: dict = {}
    for cand in cands:
        if not cand.label.is_room:
            continue
        entry = rooms.setdefault(cand.label.name, {"distance": math.inf, "rep": None})
        entry["distance"] = min(entry["distance"], cand.sparse_path.length)
        rep = entry["rep"]
        if (rep is None or cand.info_gain > rep.info_gain
                or (cand.info_gain == rep.info_gain and cand.node_id < rep.node_id)):
            entry["rep"] = cand
    return sorted(rooms.values(), key=lambda e: (e["distance"], e["rep"].node_id))


def select_nbt_srm(cands: list[TargetCandidate], cfg: CEConfig,
                   grid: OccupancyGrid, sensor: SensorParams,
                   stream: Stream, r_robot: float) -> TargetCandidate:
    """Hierarchical selection: nearest room first, else reward-optimized.

    Room distance is the shortest sparse path to any of its candidates and
    its representative is the highest-gain node (ties to the smaller id).
    With no rooms left, the top-``CASE2_SHORTLIST`` candidates by the
    sparse score -gain*exp(-lam*len) are CE-optimized and the best
    optimized information reward wins.
    """
    if not cands:
        raise ValueError("no candidates")
    agenda = _room_agenda(cands)
    if agenda:
        chosen = agenda[0]["rep"]
        chosen.reward_value = agenda[0]["distance"]
        return chosen

    shortlist = sorted(
        cands,
        key=lambda c: (case2_reward(c.info_gain, c.sparse_path.length, cfg.lam),
                       c.node_id))[:CASE2_SHORTLIST]
    info_field = InfoField(grid, sensor)
    best = None
    for cand in shortlist:
        seed = Trajectory(cand.path_xy)
        traj = ce_optimize(seed, grid, sensor, cfg,
                           stream.child("case2", cand.node_id), r_robot)
        info = info_field.path_information(traj, cfg.pose_sample_interval)
        cand.optimized = traj
        cand.reward_value = case2_reward(info, traj.length, cfg.lam)
        if best is None or (cand.reward_value, cand.node_id) < (best.reward_value,
                                                                best.node_id):
            best = cand
    return best


def select_nbt_nearest_frontier(index: FrontierIndex, graph: SrmGraph,
                                robot: Pose) -> TargetCandidate:
    """Target the node serving the cluster with the shortest path from the robot."""
    if not index.clusters:
        raise ValueError("no frontier clusters")
    source = nearest_node(graph, robot)
    best = None
    best_key = None
    for cluster in index.clusters:
        node_id = nearest_node(graph, cluster.centroid)
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


def select_nbt_max_entropy(cands: list[TargetCandidate]) -> TargetCandidate:
    """Highest info gain; ties by shorter sparse path, then smaller id."""
    if not cands:
        raise ValueError("no candidates")
    return min(cands, key=lambda c: (-c.info_gain, c.sparse_path.length, c.node_id))


def select_nbt_combined(cands: list[TargetCandidate], grid: OccupancyGrid,
                        robot: Pose, gamma1: float, gamma2: float,
                        rrt_cfg, stream: Stream, r_robot: float) -> TargetCandidate:
    """Pick argmax of gamma1*gain - gamma2*rrt_path_length.

    Path lengths come from an RRT* query per candidate.  Any planned
    length is at least the straight-line distance, so candidates are
    visited in decreasing upper-bound order and planning stops once no
    remaining bound can beat the best exact score; the argmax is exact.
    Candidates the planner fails on are excluded.
    """
    from .rrt import rrt_star_plan

    if gamma1 < 0 or gamma2 < 0 or (gamma1 == 0 and gamma2 == 0):
        raise ValueError("gamma weights must be nonnegative and not both zero")
    if not cands:
        raise ValueError("no candidates")

    bounds = []
    for cand in cands:
        gx, gy = cand.goal_xy
        euclid = math.hypot(gx - robot.x, gy - robot.y)
        bounds.append((gamma1 * cand.info_gain - gamma2 * euclid, cand))
    bounds.sort(key=lambda item: (-item[0], item[1].node_id))

    best = None
    best_score = -math.inf
    for upper, cand in bounds:
        if best is not None and upper < best_score - 1e-12:
            break
        gx, gy = cand.goal_xy
        traj = rrt_star_plan(grid, robot, Pose(float(gx), float(gy)), rrt_cfg,
                             stream.child("combined", cand.node_id), r_robot)
        if traj is None:
            continue
        score = gamma1 * cand.info_gain - gamma2 * traj.length
        cand.optimized = traj
        cand.reward_value = score
        if best is None or score > best_score or (score == best_score
                                                  and cand.node_id < best.node_id):
            best = cand
            best_score = score
    if best is None:
        raise UnreachableError("RRT* failed on every candidate")
    return best
