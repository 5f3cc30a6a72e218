"""Log-odds occupancy belief grid: scan integration, entropy, info gain.

Cell beliefs start at the 0.5 prior (log-odds 0).  Scan integration adds
signed log-odds increments clamped to [clamp_min, clamp_max]; each cell is
updated at most once per scan.  Entropy is binary entropy in bits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geom import cast_rays, ray_table
from .world import LaserScan, Pose, SensorParams

FREE = 0
OCCUPIED = 1
UNKNOWN = 2


@dataclass(frozen=True)
class GridParams:
    """Inverse sensor model and thresholding constants.

    ``l_occ`` / ``l_free`` are the signed log-odds increments applied to a
    beam's hit cell and to the cells crossed before it.  Clamps of +-8 keep
    the per-cell entropy floor of a saturated cell below 0.005 bits.
    """

    l_occ: float = 2.2
    l_free: float = -0.85
    clamp_min: float = -8.0
    clamp_max: float = 8.0
    p_free_threshold: float = 0.35
    p_occ_threshold: float = 0.65
    gain_ray_unknown: str = "transparent"  # or "opaque"

    def __post_init__(self):
        if not (0.0 < self.p_free_threshold < 0.5 < self.p_occ_threshold < 1.0):
            raise ValueError("need 0 < p_free_threshold < 0.5 < p_occ_threshold < 1")
        if self.clamp_min >= 0 or self.clamp_max <= 0:
            raise ValueError("clamps must bracket zero")
        if self.gain_ray_unknown not in ("transparent", "opaque"):
            raise ValueError("gain_ray_unknown must be 'transparent' or 'opaque'")


class OccupancyGrid:
    def __init__(self, width_cells: int, height_cells: int, resolution: float,
                 params: GridParams | None = None):
        self.width_cells = int(width_cells)
        self.height_cells = int(height_cells)
        self.resolution = float(resolution)
        self.params = params or GridParams()
        self.log_odds = np.zeros((self.height_cells, self.width_cells), dtype=np.float64)

    def copy(self) -> "OccupancyGrid":
        dup = OccupancyGrid(self.width_cells, self.height_cells,
                            self.resolution, self.params)
        dup.log_odds = self.log_odds.copy()
        return dup

    def p(self) -> np.ndarray:
        return 1.0 / (1.0 + np.exp(-self.log_odds))

    def occupied_mask(self) -> np.ndarray:
        return self.p() > self.params.p_occ_threshold

    def free_mask(self) -> np.ndarray:
        return self.p() < self.params.p_free_threshold

    def unknown_mask(self) -> np.ndarray:
        p = self.p()
        return (p >= self.params.p_free_threshold) & (p <= self.params.p_occ_threshold)

    def state_grid(self) -> np.ndarray:
        """Per-cell FREE/OCCUPIED/UNKNOWN codes."""
        p = self.p()
        out = np.full(p.shape, UNKNOWN, dtype=np.int8)
        out[p < self.params.p_free_threshold] = FREE
        out[p > self.params.p_occ_threshold] = OCCUPIED
        return out

    def cell_state(self, col: int, row: int) -> int:
        p = 1.0 / (1.0 + math.exp(-self.log_odds[row, col]))
        if p < self.params.p_free_threshold:
            return FREE
        if p > self.params.p_occ_threshold:
            return OCCUPIED
        return UNKNOWN

    def in_bounds(self, col: int, row: int) -> bool:
        return 0 <= col < self.width_cells and 0 <= row < self.height_cells

    def cell_of(self, x: float, y: float):
        return (int(math.floor(x / self.resolution)),
                int(math.floor(y / self.resolution)))

    # -- snapshot export (graymap + JSON sidecar) ------------------------

    def save_snapshot(self, prefix) -> None:
        prefix = Path(prefix)
        q = np.rint(self.p() * 255.0).astype(np.int64)
        lines = [f"P2", f"{self.width_cells} {self.height_cells}", "255"]
        for row in range(self.height_cells - 1, -1, -1):
            lines.append(" ".join(str(v) for v in q[row]))
        prefix.with_suffix(".pgm").write_text("\n".join(lines) + "\n")
        sidecar = {
            "resolution": self.resolution,
            "l_occ": self.params.l_occ,
            "l_free": self.params.l_free,
            "clamp_min": self.params.clamp_min,
            "clamp_max": self.params.clamp_max,
            "p_free_threshold": self.params.p_free_threshold,
            "p_occ_threshold": self.params.p_occ_threshold,
        }
        prefix.with_suffix(".json").write_text(json.dumps(sidecar, indent=1) + "\n")

    @staticmethod
    def load_snapshot(prefix) -> "OccupancyGrid":
        prefix = Path(prefix)
        meta = json.loads(prefix.with_suffix(".json").read_text())
        tokens = prefix.with_suffix(".pgm").read_text().split()
        if tokens[0] != "P2":
            raise ValueError("snapshot is not a P2 graymap")
        width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
        values = np.array(tokens[4:], dtype=np.float64).reshape(height, width)[::-1]
        params = GridParams(
            l_occ=meta["l_occ"], l_free=meta["l_free"],
            clamp_min=meta["clamp_min"], clamp_max=meta["clamp_max"],
            p_free_threshold=meta["p_free_threshold"],
            p_occ_threshold=meta["p_occ_threshold"])
        grid = OccupancyGrid(width, height, meta["resolution"], params)
        p = np.clip(values / maxval, 1e-9, 1 - 1e-9)
        grid.log_odds = np.clip(np.log(p / (1 - p)), params.clamp_min, params.clamp_max)
        return grid


def integrate_scan(grid: OccupancyGrid, scan: LaserScan) -> np.ndarray:
    """Apply the inverse sensor model for one scan, in place.

    Cells crossed strictly before a beam's endpoint get ``l_free``; the
    endpoint cell of a hit beam gets ``l_occ`` (each cell at most once per
    scan, occupancy winning on overlap).  Returns the (n, 2) array of
    (col, row) cells whose log-odds actually changed.
    """
    origin = scan.origin
    col, row = grid.cell_of(origin.x, origin.y)
    if not grid.in_bounds(col, row):
        raise ValueError("scan origin outside the grid")
    _, _, free_cols, free_rows, _, stop_cells = cast_rays(
        None, origin.x, origin.y, scan.angles, scan.ranges, grid.resolution)

    inb = ((free_cols >= 0) & (free_cols < grid.width_cells)
           & (free_rows >= 0) & (free_rows < grid.height_cells))
    flat_free = np.unique(free_rows[inb] * grid.width_cells + free_cols[inb])

    hit_cols = stop_cells[scan.hits, 0]
    hit_rows = stop_cells[scan.hits, 1]
    hinb = ((hit_cols >= 0) & (hit_cols < grid.width_cells)
            & (hit_rows >= 0) & (hit_rows < grid.height_cells))
    flat_hit = np.unique(hit_rows[hinb] * grid.width_cells + hit_cols[hinb])

    flat_free = np.setdiff1d(flat_free, flat_hit, assume_unique=True)

    params = grid.params
    lo = grid.log_odds.ravel()
    before_free = lo[flat_free].copy()
    before_hit = lo[flat_hit].copy()
    lo[flat_free] = np.clip(before_free + params.l_free, params.clamp_min, params.clamp_max)
    lo[flat_hit] = np.clip(before_hit + params.l_occ, params.clamp_min, params.clamp_max)

    changed_free = flat_free[lo[flat_free] != before_free]
    changed_hit = flat_hit[lo[flat_hit] != before_hit]
    changed = np.concatenate((changed_free, changed_hit))
    return np.column_stack((changed % grid.width_cells, changed // grid.width_cells))


def cell_entropy(p):
    """Binary entropy in bits; 0*log2(0) := 0.  Accepts scalars or arrays."""
    arr = np.asarray(p, dtype=np.float64)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("probability outside [0, 1]")
    out = np.zeros_like(arr)
    interior = (arr > 0.0) & (arr < 1.0)
    q = arr[interior]
    out[interior] = -q * np.log2(q) - (1.0 - q) * np.log2(1.0 - q)
    if np.isscalar(p) or arr.ndim == 0:
        return float(out)
    return out


def map_entropy(grid: OccupancyGrid) -> float:
    """Total entropy of the belief map in bits."""
    return float(cell_entropy(grid.p()).sum())


def visible_cells(grid: OccupancyGrid, pose: Pose, sensor: SensorParams,
                  n_rays: int | None = None, radius: float | None = None):
    """Cells a scan at ``pose`` would observe, per the belief grid.

    Rays fan out from the center of the pose's cell, stop at Occupied
    cells (observing them), and pass through Free cells; Unknown follows
    the grid's ``gain_ray_unknown`` policy.  Returns (cols, rows).
    """
    col, row = grid.cell_of(pose.x, pose.y)
    blocking = grid.occupied_mask()
    if grid.params.gain_ray_unknown == "opaque":
        blocking = blocking | grid.unknown_mask()
    table = ray_table(n_rays or sensor.beam_count,
                      radius if radius is not None else sensor.max_range,
                      grid.resolution)
    return table.visible_cells(blocking, col, row)


def expected_info_gain(grid: OccupancyGrid, pose: Pose, sensor: SensorParams) -> float:
    """Entropy (bits) a noise-free scan at ``pose`` would remove.

    Observation is assumed to make a covered cell certain, so the gain is
    the summed entropy of the distinct cells the scan would cover.
    """
    col, row = grid.cell_of(pose.x, pose.y)
    if not grid.in_bounds(col, row):
        raise ValueError("pose outside the grid")
    if grid.cell_state(col, row) == OCCUPIED:
        raise ValueError("cannot evaluate gain from an occupied cell")
    cols, rows = visible_cells(grid, pose, sensor)
    p = 1.0 / (1.0 + np.exp(-grid.log_odds[rows, cols]))
    return float(cell_entropy(p).sum())
