"""Ground-truth world model, simulated range sensor, and motion stepping.

The world is a boolean raster of solid cells plus axis-aligned semantic
regions (rooms and connecting spaces).  Sensing is noise-free and
deterministic; the semantic oracle returns the ground-truth region label
of a location instantly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geom import cast_rays
from .paths import Trajectory

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Pose:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("pose coordinates must be finite")

    def dist(self, other: "Pose") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class SemanticLabel:
    kind: str  # "room" | "connection" | "unlabeled"
    name: str = ""

    @property
    def is_room(self) -> bool:
        return self.kind == "room"

    @property
    def is_connection(self) -> bool:
        return self.kind == "connection"

    def __str__(self):
        return self.kind if self.kind == "unlabeled" else f"{self.kind}:{self.name}"

    @staticmethod
    def parse(text: str) -> "SemanticLabel":
        if text == "unlabeled":
            return UNLABELED
        kind, _, name = text.partition(":")
        if kind not in ("room", "connection") or not name:
            raise ValueError(f"bad semantic label {text!r}")
        return SemanticLabel(kind, name)


UNLABELED = SemanticLabel("unlabeled")


@dataclass(frozen=True)
class SemanticRegion:
    label: SemanticLabel
    rects: tuple  # ((x0, y0, x1, y1) cell coords, exclusive upper bounds)


@dataclass(frozen=True)
class SensorParams:
    beam_count: int = 64
    max_range: float = 4.0
    angular_span: float = TWO_PI

    def __post_init__(self):
        if self.beam_count < 8:
            raise ValueError("beam_count must be >= 8")
        if self.max_range <= 0:
            raise ValueError("max_range must be positive")

    def angles(self) -> np.ndarray:
        return np.arange(self.beam_count) * (self.angular_span / self.beam_count)


@dataclass(frozen=True)
class LaserScan:
    origin: Pose
    angles: np.ndarray
    ranges: np.ndarray
    hits: np.ndarray
    max_range: float

    @property
    def beams(self):
        """Beams as (angle, range, hit) tuples."""
        return list(zip(self.angles.tolist(), self.ranges.tolist(),
                        self.hits.tolist()))


class WorldModel:
    """Immutable after construction; safe to share across episodes."""

    def __init__(self, solid: np.ndarray, resolution: float,
                 regions: list[SemanticRegion], start: Pose):
        self.solid = np.ascontiguousarray(solid, dtype=bool)
        self.solid.setflags(write=False)
        self.height_cells, self.width_cells = self.solid.shape
        self.resolution = float(resolution)
        self.regions = list(regions)
        self.start = start
        self.region_index = self._build_region_index()
        sc, sr = self.cell_of(start.x, start.y)
        if not self.in_bounds(sc, sr) or self.solid[sr, sc]:
            raise ValueError("start pose must lie on a free cell")

    @property
    def width_m(self) -> float:
        return self.width_cells * self.resolution

    @property
    def height_m(self) -> float:
        return self.height_cells * self.resolution

    def cell_of(self, x: float, y: float):
        return (int(math.floor(x / self.resolution)),
                int(math.floor(y / self.resolution)))

    def in_bounds(self, col: int, row: int) -> bool:
        return 0 <= col < self.width_cells and 0 <= row < self.height_cells

    def _build_region_index(self) -> np.ndarray:
        index = np.full((self.height_cells, self.width_cells), -1, dtype=np.int32)
        for i, region in enumerate(self.regions):
            for (x0, y0, x1, y1) in region.rects:
                if not (0 <= x0 < x1 <= self.width_cells
                        and 0 <= y0 < y1 <= self.height_cells):
                    raise ValueError(
                        f"region {region.label} rect {(x0, y0, x1, y1)} out of bounds")
                block = index[y0:y1, x0:x1]
                free = ~self.solid[y0:y1, x0:x1]
                if (block[free] != -1).any():
                    raise ValueError(
                        f"region {region.label} overlaps another region on free cells")
                block[free] = i
        return index


def semantic_label_at(world: WorldModel, pose: Pose) -> SemanticLabel:
    """Ground-truth region label at the pose's cell; Unlabeled when none."""
    col, row = world.cell_of(pose.x, pose.y)
    if not world.in_bounds(col, row):
        raise ValueError("pose out of world bounds")
    idx = world.region_index[row, col]
    if idx < 0:
        return UNLABELED
    return world.regions[idx].label


def simulate_scan(world: WorldModel, pose: Pose, sensor: SensorParams) -> LaserScan:
    """Trace every beam through the ground-truth raster.

    Ranges are exact distances to the entry boundary of the first solid
    cell (world boundary counts as solid), capped at max_range.
    """
    col, row = world.cell_of(pose.x, pose.y)
    if not world.in_bounds(col, row) or world.solid[row, col]:
        raise ValueError(f"invalid sensing location ({pose.x}, {pose.y}): not a free cell")
    angles = sensor.angles()
    ranges, hits, _, _, _, _ = cast_rays(
        world.solid, pose.x, pose.y, angles, sensor.max_range, world.resolution)
    ranges = ranges.copy()
    ranges.setflags(write=False)
    hits.setflags(write=False)
    return LaserScan(origin=pose, angles=angles, ranges=ranges, hits=hits,
                     max_range=sensor.max_range)


def step_motion(pose: Pose, trajectory: Trajectory, speed: float, dt: float) -> Pose:
    """Advance ``speed * dt`` meters of arc length along the trajectory.

    The current pose is projected onto the polyline first, so the result
    always lies on the trajectory; the final waypoint clamps the motion.
    """
    if trajectory is None or len(trajectory.waypoints) == 0:
        raise ValueError("cannot step along an empty trajectory")
    if speed <= 0:
        raise ValueError("speed must be positive")
    s = trajectory.arc_position(pose.x, pose.y)
    target = trajectory.point_at(s + speed * dt)
    return Pose(float(target[0]), float(target[1]))


def reachable_free_mask(world: WorldModel) -> np.ndarray:
    """Free cells 8-connected to the start cell on the ground-truth raster."""
    free = ~world.solid
    start_c, start_r = world.cell_of(world.start.x, world.start.y)
    mask = np.zeros_like(free)
    stack = [(start_r, start_c)]
    mask[start_r, start_c] = True
    height, width = free.shape
    while stack:
        r, c = stack.pop()
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == 0 and dc == 0:
                    continue
                nr, nc = r + dr, c + dc
                if 0 <= nr < height and 0 <= nc < width and free[nr, nc] and not mask[nr, nc]:
                    mask[nr, nc] = True
                    stack.append((nr, nc))
    return mask
