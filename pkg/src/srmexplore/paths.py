"""Dense waypoint trajectories and polyline arithmetic."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Trajectory:
    """Polyline path with fixed endpoints.

    ``waypoints`` is an (n, 2) float array, n >= 2.  Length is the sum of
    segment lengths.
    """

    waypoints: np.ndarray
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        wp = np.asarray(self.waypoints, dtype=np.float64)
        if wp.ndim != 2 or wp.shape[0] < 2 or wp.shape[1] != 2:
            raise ValueError("trajectory needs an (n>=2, 2) waypoint array")
        if not np.isfinite(wp).all():
            raise ValueError("trajectory waypoints must be finite")
        object.__setattr__(self, "waypoints", wp)
        seg = np.hypot(np.diff(wp[:, 0]), np.diff(wp[:, 1]))
        object.__setattr__(self, "_cum", np.concatenate(([0.0], np.cumsum(seg))))

    @property
    def length(self) -> float:
        return float(self._cum[-1])

    def point_at(self, s: float) -> np.ndarray:
        """World point at arc length ``s`` (clamped to [0, length])."""
        cum = self._cum
        s = min(max(s, 0.0), float(cum[-1]))
        i = int(np.searchsorted(cum, s, side="right") - 1)
        i = min(i, len(cum) - 2)
        seg_len = cum[i + 1] - cum[i]
        if seg_len <= 0.0:
            return self.waypoints[i].copy()
        t = (s - cum[i]) / seg_len
        return self.waypoints[i] + t * (self.waypoints[i + 1] - self.waypoints[i])

    def arc_position(self, x: float, y: float) -> float:
        """Arc length of the closest point on the polyline to (x, y).

        Among projections at (near-)identical distance the largest arc
        length wins, so repeated stepping through a self-crossing path
        never jumps backward.
        """
        wp = self.waypoints
        ax, ay = wp[:-1, 0], wp[:-1, 1]
        dx = np.diff(wp[:, 0])
        dy = np.diff(wp[:, 1])
        seg2 = dx * dx + dy * dy
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(seg2 > 0, ((x - ax) * dx + (y - ay) * dy) / seg2, 0.0)
        t = np.clip(t, 0.0, 1.0)
        qx = ax + t * dx - x
        qy = ay + t * dy - y
        d2 = qx * qx + qy * qy
        best = d2.min()
        candidates = np.flatnonzero(d2 <= best + 1e-18)
        arcs = self._cum[candidates] + t[candidates] * np.sqrt(seg2[candidates])
        return float(arcs.max())

    def sample_every(self, interval: float) -> np.ndarray:
        """Points every ``interval`` meters of arc length, endpoints included."""
        if interval <= 0:
            raise ValueError("interval must be positive")
        total = self.length
        ss = np.arange(0.0, total, interval)
        if total - ss[-1] > 1e-12 or len(ss) == 1:
            ss = np.concatenate((ss, [total]))
        return np.stack([self.point_at(s) for s in ss])

    def segments(self):
        wp = self.waypoints
        return [(wp[i, 0], wp[i, 1], wp[i + 1, 0], wp[i + 1, 1])
                for i in range(len(wp) - 1)]
