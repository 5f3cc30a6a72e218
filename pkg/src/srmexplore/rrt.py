"""RRT* baseline planner and the planner timing probe.

Kept deliberately standard: uniform sampling over non-occupied space with
goal bias, steer-limited extension, rewiring within the shrinking
neighbor radius.  Unknown cells are sampleable and traversable, matching
the roadmap's unknown-as-free edge rule so planner timings compare like
for like.

The inner loop uses a conservative clearance-field collision test (a
distance transform with a half-cell safety margin); any returned path is
re-validated with the exact inflated-segment check, so the fast test can
only reject, never accept, a path the exact test would refuse.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import distance_transform_edt

from .geom import segment_clear
from .grid import OccupancyGrid
from .paths import Trajectory
from .rng import Stream
from .world import Pose


@dataclass(frozen=True)
class RrtConfig:
    max_samples: int = 5000
    steer_step: float = 0.5
    neighbor_radius_gamma: float = 0.0  # 0 -> sqrt(3 * map_area / pi)
    goal_bias: float = 0.05
    goal_tolerance: float = 0.3
    stop_at_first_solution: bool = False

    def __post_init__(self):
        if self.max_samples < 100:
            raise ValueError("max_samples must be >= 100")
        if self.steer_step <= 0:
            raise ValueError("steer_step must be positive")
        if not (0.0 <= self.goal_bias <= 0.5):
            raise ValueError("goal_bias must be in [0, 0.5]")


class ClearanceField:
    """Fast conservative segment checks via a distance transform."""

    def __init__(self, occupied: np.ndarray, resolution: float, r_robot: float):
        self.resolution = resolution
        self.height, self.width = occupied.shape
        if occupied.any():
            dist_cells = distance_transform_edt(~occupied)
        else:
            dist_cells = np.full(occupied.shape, np.inf)
        self.clear_m = dist_cells * resolution
        # margin covers point-in-cell vs cell-center discrepancy
        self.threshold = r_robot + resolution
        self.checks = 0

    def segment_clear_fast(self, ax, ay, bx, by) -> bool:
        self.checks += 1
        length = math.hypot(bx - ax, by - ay)
        n = max(2, int(length / (self.resolution * 0.5)) + 1)
        t = np.linspace(0.0, 1.0, n)
        px = ax + t * (bx - ax)
        py = ay + t * (by - ay)
        cols = (px / self.resolution).astype(np.int64)
        rows = (py / self.resolution).astype(np.int64)
        if ((cols < 0) | (cols >= self.width) | (rows < 0) | (rows >= self.height)).any():
            return False
        return bool((self.clear_m[rows, cols] > self.threshold).all())


def rrt_star_plan(grid: OccupancyGrid, start: Pose, goal: Pose, cfg: RrtConfig,
                  stream: Stream, r_robot: float,
                  stats: dict | None = None) -> Trajectory | None:
    """Plan start->goal on the belief grid; None when no path in budget."""
    occ = grid.occupied_mask()
    sc, sr = grid.cell_of(start.x, start.y)
    if not grid.in_bounds(sc, sr) or occ[sr, sc]:
        raise ValueError("start must lie on a non-occupied cell")
    field = ClearanceField(occ, grid.resolution, r_robot)
    rng = stream.generator()

    width_m = grid.width_cells * grid.resolution
    height_m = grid.height_cells * grid.resolution
    gamma = cfg.neighbor_radius_gamma
    if gamma <= 0:
        gamma = math.sqrt(3.0 * width_m * height_m / math.pi)

    cap = cfg.max_samples + 1
    xs = np.empty(cap)
    ys = np.empty(cap)
    cost = np.empty(cap)
    parent = np.full(cap, -1, dtype=np.int64)
    xs[0], ys[0], cost[0] = start.x, start.y, 0.0
    n = 1

    goal_x, goal_y = goal.x, goal.y
    tol2 = cfg.goal_tolerance ** 2
    best_goal_vertex = -1
    best_goal_cost = math.inf
    first_solution_sample = -1

    if (start.x - goal_x) ** 2 + (start.y - goal_y) ** 2 <= tol2:
        traj = Trajectory(np.array([[start.x, start.y], [goal_x, goal_y]]))
        if stats is not None:
            stats.update(samples=0, collision_checks=0, first_solution_sample=0)
        return traj

    for it in range(cfg.max_samples):
        if rng.uniform() < cfg.goal_bias:
            tx, ty = goal_x, goal_y
        else:
            while True:
                tx = rng.uniform(0.0, width_m)
                ty = rng.uniform(0.0, height_m)
                col = int(tx / grid.resolution)
                row = int(ty / grid.resolution)
                if not occ[row, col]:
                    break

        d2 = (xs[:n] - tx) ** 2 + (ys[:n] - ty) ** 2
        nearest = int(np.argmin(d2))
        dist = math.sqrt(d2[nearest])
        if dist < 1e-9:
            continue
        scale = min(1.0, cfg.steer_step / dist)
        nx = xs[nearest] + (tx - xs[nearest]) * scale
        ny = ys[nearest] + (ty - ys[nearest]) * scale
        if not field.segment_clear_fast(xs[nearest], ys[nearest], nx, ny):
            continue

        radius = min(gamma * math.sqrt(math.log(n + 1) / (n + 1)), 4.0 * cfg.steer_step)
        nd2 = (xs[:n] - nx) ** 2 + (ys[:n] - ny) ** 2
        near = np.flatnonzero(nd2 <= radius * radius)

        # choose the cheapest valid parent
        best_parent = nearest
        best_cost = cost[nearest] + dist * scale
        order = near[np.argsort(cost[near] + np.sqrt(nd2[near]), kind="stable")]
        for cand in order:
            cand = int(cand)
            c = cost[cand] + math.sqrt(nd2[cand])
            if c >= best_cost:
                break
            if field.segment_clear_fast(xs[cand], ys[cand], nx, ny):
                best_parent = cand
                best_cost = c
                break

        idx = n
        xs[idx], ys[idx] = nx, ny
        cost[idx] = best_cost
        parent[idx] = best_parent
        n += 1

        # rewire neighbors through the new vertex
        for cand in near:
            cand = int(cand)
            via = best_cost + math.sqrt(nd2[cand])
            if via + 1e-12 < cost[cand] and field.segment_clear_fast(
                    nx, ny, xs[cand], ys[cand]):
                old = cost[cand]
                parent[cand] = idx
                cost[cand] = via
                _propagate_cost(cost, parent, n, cand, via - old)

        if (nx - goal_x) ** 2 + (ny - goal_y) ** 2 <= tol2:
            if first_solution_sample < 0:
                first_solution_sample = it + 1
            if cfg.stop_at_first_solution:
                best_goal_vertex, best_goal_cost = idx, cost[idx]
                break

    goal_d2 = (xs[:n] - goal_x) ** 2 + (ys[:n] - goal_y) ** 2
    in_tol = np.flatnonzero(goal_d2 <= tol2)
    if in_tol.size:
        best = in_tol[np.argmin(cost[in_tol])]
        best_goal_vertex, best_goal_cost = int(best), float(cost[best])

    if stats is not None:
        stats.update(samples=n - 1, collision_checks=field.checks,
                     first_solution_sample=first_solution_sample)
    if best_goal_vertex < 0:
        return None

    chain = []
    node = best_goal_vertex
    while node != -1:
        chain.append(node)
        node = int(parent[node])
    chain.reverse()
    points = [[xs[i], ys[i]] for i in chain]
    if (points[-1][0] - goal_x) ** 2 + (points[-1][1] - goal_y) ** 2 > 1e-18:
        points.append([goal_x, goal_y])
    traj = Trajectory(np.array(points))
    # exact re-validation; the conservative inner test makes this a formality
    for ax, ay, bx, by in traj.segments():
        if not segment_clear(occ, ax, ay, bx, by, r_robot, grid.resolution):
            return None
    return traj


def _propagate_cost(cost, parent, n, root, delta) -> None:
    """Push a cost improvement to the descendants of ``root``."""
    children = [root]
    while children:
        cur = children.pop()
        kids = np.flatnonzero(parent[:n] == cur)
        for kid in kids:
            if kid == cur:
                continue
            cost[kid] += delta
            children.append(int(kid))


def timing_probe(planner_fn, queries) -> list[dict]:
    """Run a planner callable over (start, goal) pairs, timing each query.

    ``planner_fn(start, goal)`` returns (success, op_counts_dict).  Rows
    carry wall time in microseconds plus the planner's operation counts.
    """
    rows = []
    for qid, (start, goal) in enumerate(queries):
        t0 = time.perf_counter_ns()
        success, ops = planner_fn(start, goal)
        elapsed_us = (time.perf_counter_ns() - t0) / 1000.0
        row = {"query_id": qid, "elapsed_us": elapsed_us, "success": bool(success)}
        row.update(ops)
        rows.append(row)
    return rows
