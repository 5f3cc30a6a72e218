"""Informative trajectory optimization with the cross-entropy method.

The sparse roadmap path seeds a Gaussian mixture over its interior
waypoints (one component each).  Iterations sample waypoint sequences,
keep an elite quantile by reward, and refit each component to its elite
marginal.  The reward trades collected map information against length:

    reward = -info(trajectory) * exp(-lam * length)

Lower is better.  The output is constrained to the seed path's length and
to collision-free segments; if optimization fails to beat the seed, the
seed path itself is returned, so the caller never loses feasibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geom import ray_table, segment_clear
from .grid import OccupancyGrid, cell_entropy
from .paths import Trajectory
from .rng import Stream
from .world import SensorParams


@dataclass(frozen=True)
class CEConfig:
    lam: float = 0.2                  # per-meter information decay
    sample_count: int = 50            # trajectories per iteration
    elite_fraction: float = 0.2
    max_iters: int = 30
    sigma0: float = 0.8               # initial per-component std, meters
    sigma_floor: float = 0.05
    alpha: float = 0.7                # blend toward the elite refit
    pose_sample_interval: float = 0.5
    infeasible_retry_limit: int = 5

    def __post_init__(self):
        if self.sample_count < 10:
            raise ValueError("sample_count must be >= 10")
        if math.ceil(self.elite_fraction * self.sample_count) < 2:
            raise ValueError("elite set would have fewer than 2 samples")
        if self.sigma_floor <= 0:
            raise ValueError("sigma_floor must be positive")
        if not (0 < self.alpha <= 1):
            raise ValueError("alpha must be in (0, 1]")

    @property
    def elite_count(self) -> int:
        return math.ceil(self.elite_fraction * self.sample_count)


@dataclass
class CEIterationStats:
    iteration: int
    best_reward: float
    quantile: float
    max_component_std: float


class InfoField:
    """Cached visibility/entropy evaluator over a frozen belief grid.

    Visible sets are anchored at cell centers, so they can be cached per
    anchor cell and reused across the thousands of pose queries one CE
    run makes.
    """

    def __init__(self, grid: OccupancyGrid, sensor: SensorParams):
        self.grid = grid
        self.resolution = grid.resolution
        self.width = grid.width_cells
        self.height = grid.height_cells
        self.occupied = grid.occupied_mask()
        if grid.params.gain_ray_unknown == "opaque":
            self.blocking = self.occupied | grid.unknown_mask()
        else:
            self.blocking = self.occupied
        self.entropy_flat = cell_entropy(grid.p()).ravel()
        self.table = ray_table(sensor.beam_count, sensor.max_range, grid.resolution)
        self._visible_cache: dict = {}

    def visible_flat(self, col: int, row: int) -> np.ndarray:
        key = row * self.width + col
        cached = self._visible_cache.get(key)
        if cached is None:
            cols, rows = self.table.visible_cells(self.blocking, col, row)
            cached = rows * self.width + cols
            self._visible_cache[key] = cached
        return cached

    def path_information(self, traj: Trajectory, interval: float) -> float:
        points = traj.sample_every(interval)
        cols = np.clip((points[:, 0] / self.resolution).astype(np.int64), 0, self.width - 1)
        rows = np.clip((points[:, 1] / self.resolution).astype(np.int64), 0, self.height - 1)
        anchors = np.unique(rows * self.width + cols)
        chunks = [self.visible_flat(int(a % self.width), int(a // self.width))
                  for a in anchors]
        if not chunks:
            return 0.0
        union = np.unique(np.concatenate(chunks))
        return float(self.entropy_flat[union].sum())

    def reward(self, traj: Trajectory, lam: float, interval: float) -> float:
        return -self.path_information(traj, interval) * math.exp(-lam * traj.length)


def path_information(traj: Trajectory, grid: OccupancyGrid, sensor: SensorParams,
                     interval: float) -> float:
    """Summed entropy of the union of cells visible from poses sampled
    every ``interval`` meters along the trajectory (each cell once)."""
    if interval <= 0:
        raise ValueError("interval must be positive")
    return InfoField(grid, sensor).path_information(traj, interval)


def reward(traj: Trajectory, grid: OccupancyGrid, sensor: SensorParams,
           lam: float, interval: float = 0.5) -> float:
    """Information-versus-length objective; lower is better."""
    return -path_information(traj, grid, sensor, interval) * math.exp(-lam * traj.length)


def feasible(traj: Trajectory, grid: OccupancyGrid, max_length: float,
             r_robot: float, occupied_mask=None) -> bool:
    """Collision-free under inflation and no longer than ``max_length``."""
    if traj.length > max_length + 1e-9:
        return False
    occ = occupied_mask if occupied_mask is not None else grid.occupied_mask()
    for ax, ay, bx, by in traj.segments():
        if not segment_clear(occ, ax, ay, bx, by, r_robot, grid.resolution):
            return False
    return True


def _floor_covariance(cov: np.ndarray, floor_var: float) -> np.ndarray:
    vals, vecs = np.linalg.eigh(cov)
    vals = np.maximum(vals, floor_var)
    return (vecs * vals) @ vecs.T


def ce_optimize(seed_traj: Trajectory, grid: OccupancyGrid, sensor: SensorParams,
                cfg: CEConfig, stream: Stream, r_robot: float,
                trace: list | None = None) -> Trajectory:
    """Optimize a seed trajectory for information without exceeding its length.

    Endpoints are fixed; interior waypoint k is drawn from mixture
    component k.  Per-sample generators derive from (stream, iteration,
    sample index) so results are reproducible and order-independent.
    Returns the best sampled trajectory if it beats the seed's reward,
    otherwise the seed itself.
    """
    waypoints = seed_traj.waypoints
    n_interior = len(waypoints) - 2
    if n_interior <= 0:
        return seed_traj

    field_ = InfoField(grid, sensor)
    interval = cfg.pose_sample_interval
    seed_reward = field_.reward(seed_traj, cfg.lam, interval)
    length_bound = seed_traj.length
    occ = field_.occupied

    means = waypoints[1:-1].copy()
    covs = np.tile(np.eye(2) * cfg.sigma0 ** 2, (n_interior, 1, 1))
    chols = np.linalg.cholesky(covs)
    floor_var = cfg.sigma_floor ** 2

    start = waypoints[0]
    goal = waypoints[-1]
    best_reward = math.inf
    best_traj = None
    stalled = 0
    no_improve = 0

    for iteration in range(cfg.max_iters):
        samples = np.empty((cfg.sample_count, n_interior, 2))
        rewards = np.empty(cfg.sample_count)
        for k in range(cfg.sample_count):
            gen = stream.child("iter", iteration, "sample", k).generator()
            traj = None
            pts = None
            for _ in range(cfg.infeasible_retry_limit + 1):
                z = gen.standard_normal((n_interior, 2))
                pts = means + np.einsum("nij,nj->ni", chols, z)
                cand = Trajectory(np.vstack((start, pts, goal)))
                if feasible(cand, grid, length_bound, r_robot, occupied_mask=occ):
                    traj = cand
                    break
            samples[k] = pts
            rewards[k] = field_.reward(traj, cfg.lam, interval) if traj is not None else math.inf

        finite = np.isfinite(rewards)
        if not finite.any():
            stalled += 1
            if stalled >= 3:
                break
            continue
        stalled = 0

        order = np.lexsort((np.arange(cfg.sample_count), rewards))
        order = order[finite[order]]
        elite_n = min(cfg.elite_count, order.size)
        elite = order[:elite_n]
        quantile = float(rewards[elite[-1]])

        iter_best = float(rewards[elite[0]])
        if iter_best < best_reward - 1e-6:
            no_improve = 0
        else:
            no_improve += 1
        if iter_best < best_reward:
            best_reward = iter_best
            k_best = int(elite[0])
            best_traj = Trajectory(np.vstack((start, samples[k_best], goal)))

        elite_pts = samples[elite]
        for j in range(n_interior):
            pts_j = elite_pts[:, j, :]
            mean_e = pts_j.mean(axis=0)
            centered = pts_j - mean_e
            cov_e = centered.T @ centered / elite_n
            means[j] = cfg.alpha * mean_e + (1 - cfg.alpha) * means[j]
            blended = cfg.alpha * cov_e + (1 - cfg.alpha) * covs[j]
            covs[j] = _floor_covariance(blended, floor_var)
        chols = np.linalg.cholesky(covs)

        max_std = float(np.sqrt(max(np.linalg.eigvalsh(c).max() for c in covs)))
        if trace is not None:
            trace.append(CEIterationStats(iteration, best_reward, quantile, max_std))
        if max_std < cfg.sigma_floor * 1.5:
            break
        if no_improve >= 3:
            break

    if best_traj is not None and best_reward <= seed_reward:
        return best_traj
    return seed_traj
