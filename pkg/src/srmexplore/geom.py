"""Grid geometry primitives shared across the engine.

Cell convention: a cell (col, row) covers the world rectangle
[col*res, (col+1)*res) x [row*res, (row+1)*res); its center is at
((col+0.5)*res, (row+0.5)*res).  Numpy rasters are indexed [row, col].
Everything outside the raster counts as solid, so rays terminate at the
map boundary and inflated segments may not poke past it.

Ray traversal is exact integer grid marching (Amanatides-Woo): ranges are
reported at the entry boundary of the stopping cell, which makes sensor
simulation reproducible to the bit and lets tests pin oracle values.
"""

from __future__ import annotations

import math

import numpy as np


def cast_rays(solid, ox: float, oy: float, angles, caps, resolution: float):
    """March many rays through a raster in vectorized lockstep.

    ``solid`` is an (H, W) boolean mask or None.  ``caps`` is a scalar or
    per-ray array of maximum travel distances.  A ray stops either at the
    entry boundary of the first solid (or out-of-bounds) cell, or at its
    cap, whichever comes first.

    Returns ``(ranges, hits, free_cols, free_rows, free_ray, stop_cells)``:

    - ranges: distance traveled per ray (entry distance of the blocking
      cell, or the cap).
    - hits: True where the ray was stopped by a solid/boundary cell.
    - free_cols/free_rows/free_ray: flat arrays of every cell entered
      strictly before the stop distance, with the index of the ray that
      entered it (the origin cell appears once per ray).
    - stop_cells: (B, 2) int array of (col, row) of the cell the ray
      stopped at or would enter at its cap; row/col may be out of bounds
      for boundary hits, and is only meaningful where travel actually
      reached a boundary crossing.
    """
    if solid is not None:
        height, width = solid.shape
    else:
        height = width = None
    angles = np.asarray(angles, dtype=np.float64)
    n = angles.shape[0]
    caps = np.broadcast_to(np.asarray(caps, dtype=np.float64), (n,)).copy()

    dx = np.cos(angles)
    dy = np.sin(angles)
    col = np.full(n, int(math.floor(ox / resolution)), dtype=np.int64)
    row = np.full(n, int(math.floor(oy / resolution)), dtype=np.int64)

    step_x = np.where(dx > 0, 1, np.where(dx < 0, -1, 0)).astype(np.int64)
    step_y = np.where(dy > 0, 1, np.where(dy < 0, -1, 0)).astype(np.int64)
    with np.errstate(divide="ignore"):
        t_delta_x = np.where(dx != 0, resolution / np.abs(dx), np.inf)
        t_delta_y = np.where(dy != 0, resolution / np.abs(dy), np.inf)

    fx = ox - col[0] * resolution
    fy = oy - row[0] * resolution
    with np.errstate(divide="ignore", invalid="ignore"):
        t_max_x = np.where(dx > 0, (resolution - fx) / dx,
                           np.where(dx < 0, fx / -dx, np.inf))
        t_max_y = np.where(dy > 0, (resolution - fy) / dy,
                           np.where(dy < 0, fy / -dy, np.inf))

    ranges = caps.copy()
    hits = np.zeros(n, dtype=bool)
    stop_cells = np.full((n, 2), -(2 ** 31), dtype=np.int64)
    alive = np.ones(n, dtype=bool)

    free_cols = [col.copy()]
    free_rows = [row.copy()]
    free_ray = [np.arange(n, dtype=np.int64)]

    while alive.any():
        t_next = np.minimum(t_max_x, t_max_y)
        choose_x = t_max_x <= t_max_y
        next_col = col + np.where(choose_x, step_x, 0)
        next_row = row + np.where(choose_x, 0, step_y)

        capped = alive & (t_next >= caps)
        if capped.any():
            stop_cells[capped, 0] = next_col[capped]
            stop_cells[capped, 1] = next_row[capped]
            alive = alive & ~capped

        adv = alive
        if not adv.any():
            break
        if width is not None:
            oob = adv & ((next_col < 0) | (next_col >= width) |
                         (next_row < 0) | (next_row >= height))
            blocked = oob.copy()
            inb = adv & ~oob
            if inb.any():
                hit_solid = np.zeros(n, dtype=bool)
                hit_solid[inb] = solid[next_row[inb], next_col[inb]]
                blocked |= hit_solid
        else:
            # cap-mode (no raster): rays stop only at their caps
            blocked = np.zeros(n, dtype=bool)

        stopped = adv & blocked
        if stopped.any():
            ranges[stopped] = t_next[stopped]
            hits[stopped] = True
            stop_cells[stopped, 0] = next_col[stopped]
            stop_cells[stopped, 1] = next_row[stopped]
            alive = alive & ~stopped

        moving = adv & ~blocked
        if moving.any():
            col = np.where(moving, next_col, col)
            row = np.where(moving, next_row, row)
            adv_x = moving & choose_x
            adv_y = moving & ~choose_x
            t_max_x = np.where(adv_x, t_max_x + t_delta_x, t_max_x)
            t_max_y = np.where(adv_y, t_max_y + t_delta_y, t_max_y)
            free_cols.append(col[moving])
            free_rows.append(row[moving])
            free_ray.append(np.flatnonzero(moving))

    return (ranges, hits,
            np.concatenate(free_cols), np.concatenate(free_rows),
            np.concatenate(free_ray), stop_cells)


class RayTable:
    """Precomputed traversal offsets for rays fanned out from a cell center.

    Visibility queries for information gain and frontier detection are
    anchored at the center of the querying cell, so the cell offsets along
    each ray can be computed once per (ray count, radius, resolution) and
    reused for every anchor.
    """

    def __init__(self, n_rays: int, radius: float, resolution: float):
        self.n_rays = n_rays
        self.radius = radius
        self.resolution = resolution
        angles = np.arange(n_rays) * (2.0 * math.pi / n_rays)
        # Trace on an unbounded raster; caps bound the work.
        span = int(math.ceil(radius / resolution)) + 2
        origin = span * resolution + 0.5 * resolution
        _, _, cols, rows, ray, _ = cast_rays(
            None, origin, origin, angles, radius, resolution)
        d_col = cols - span
        d_row = rows - span
        counts = np.bincount(ray, minlength=n_rays)
        max_len = int(counts.max())
        self.d_col = np.zeros((n_rays, max_len), dtype=np.int64)
        self.d_row = np.zeros((n_rays, max_len), dtype=np.int64)
        self.valid = np.zeros((n_rays, max_len), dtype=bool)
        order = np.argsort(ray, kind="stable")
        pos = np.concatenate(([0], np.cumsum(counts)))
        for r in range(n_rays):
            seg = order[pos[r]:pos[r + 1]]
            self.d_col[r, :len(seg)] = d_col[seg]
            self.d_row[r, :len(seg)] = d_row[seg]
            self.valid[r, :len(seg)] = True

    def visible_cells(self, blocking, anchor_col: int, anchor_row: int):
        """Cells observable from the anchor cell's center.

        Rays pass through non-blocking cells and stop at the first
        blocking cell, which is itself included (a scan would observe the
        surface it hits).  Out-of-bounds and padding entries terminate a
        ray without contributing cells.  Returns (cols, rows) flat int
        arrays, deduplicated across rays.
        """
        height, width = blocking.shape
        cols = self.d_col + anchor_col
        rows = self.d_row + anchor_row
        inb = self.valid & (cols >= 0) & (cols < width) & (rows >= 0) & (rows < height)
        blocked = ~inb
        blocked[inb] |= blocking[rows[inb], cols[inb]]
        # keep entries with no blocker strictly before them on the ray
        before = np.cumsum(blocked, axis=1) - blocked
        vis = (before == 0) & inb
        flat = rows[vis] * width + cols[vis]
        flat = np.unique(flat)
        return flat % width, flat // width


_ray_table_cache: dict = {}


def ray_table(n_rays: int, radius: float, resolution: float) -> RayTable:
    key = (n_rays, round(radius, 9), round(resolution, 9))
    table = _ray_table_cache.get(key)
    if table is None:
        table = RayTable(n_rays, radius, resolution)
        _ray_table_cache[key] = table
    return table


def segment_clear(occupied, ax: float, ay: float, bx: float, by: float,
                  r_robot: float, resolution: float) -> bool:
    """True iff no occupied cell center lies within r_robot of segment a-b.

    Cells outside the raster count as occupied.  This is the exact
    inflated-segment test used for every edge and trajectory collision
    check in the engine.
    """
    height, width = occupied.shape
    c0 = int(math.floor((min(ax, bx) - r_robot) / resolution))
    c1 = int(math.floor((max(ax, bx) + r_robot) / resolution))
    r0 = int(math.floor((min(ay, by) - r_robot) / resolution))
    r1 = int(math.floor((max(ay, by) + r_robot) / resolution))
    cols = np.arange(c0, c1 + 1)
    rows = np.arange(r0, r1 + 1)
    px = (cols + 0.5) * resolution
    py = (rows + 0.5) * resolution
    dx = bx - ax
    dy = by - ay
    seg_len2 = dx * dx + dy * dy
    if seg_len2 == 0.0:
        t = np.zeros((rows.size, cols.size))
    else:
        t = ((px[None, :] - ax) * dx + (py[:, None] - ay) * dy) / seg_len2
        t = np.clip(t, 0.0, 1.0)
    qx = ax + t * dx - px[None, :]
    qy = ay + t * dy - py[:, None]
    within = qx * qx + qy * qy <= r_robot * r_robot
    if not within.any():
        return True
    rr, cc = np.nonzero(within)
    grid_r = rows[rr]
    grid_c = cols[cc]
    oob = (grid_r < 0) | (grid_r >= height) | (grid_c < 0) | (grid_c >= width)
    if oob.any():
        return False
    return not occupied[grid_r, grid_c].any()


def point_segment_distance(px, py, ax, ay, bx, by):
    """Distance from point(s) to the segment a-b (vectorized)."""
    dx = bx - ax
    dy = by - ay
    seg_len2 = dx * dx + dy * dy
    if seg_len2 == 0.0:
        return np.hypot(px - ax, py - ay)
    t = np.clip(((px - ax) * dx + (py - ay) * dy) / seg_len2, 0.0, 1.0)
    return np.hypot(ax + t * dx - px, ay + t * dy - py)
