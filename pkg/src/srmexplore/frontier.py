"""Frontier detection anchored on roadmap nodes.

Instead of sweeping the whole grid, rays are cast around each open
roadmap node; any frontier cell they touch seeds an exhaustive 8-connected
flood fill over frontier cells, so a detected cluster is always recovered
completely.  Nodes whose rays find nothing are closed and skipped on
later calls; map changes near a closed node reopen it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geom import ray_table
from .grid import FREE, OccupancyGrid, UNKNOWN
from .world import Pose, SemanticLabel, UNLABELED


@dataclass
class FrontierConfig:
    n_rays: int = 72
    raycast_radius: float | None = None  # None -> sensor max_range
    reopen_on_change: bool = True


@dataclass
class FrontierCluster:
    cells: frozenset  # of (col, row)
    centroid: Pose
    label: SemanticLabel = UNLABELED

    def __len__(self):
        return len(self.cells)


@dataclass
class DetectionStats:
    nodes_scanned: int = 0
    ray_cells: int = 0
    flood_steps: int = 0

    @property
    def ops(self) -> int:
        return self.ray_cells + self.flood_steps


@dataclass
class FrontierIndex:
    raycast_radius: float
    n_rays: int = 72
    clusters: list = field(default_factory=list)
    closed_nodes: set = field(default_factory=set)
    last_stats: DetectionStats = field(default_factory=DetectionStats)

    @property
    def cell_count(self) -> int:
        return sum(len(c) for c in self.clusters)

    def all_cells(self) -> set:
        out = set()
        for cluster in self.clusters:
            out |= cluster.cells
        return out


def frontier_mask(grid: OccupancyGrid) -> np.ndarray:
    """Free cells with at least one Unknown 8-neighbor."""
    state = grid.state_grid()
    unknown = state == UNKNOWN
    height, width = unknown.shape
    padded = np.pad(unknown, 1, constant_values=False)
    near_unknown = np.zeros_like(unknown)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            near_unknown |= padded[1 + dr:1 + dr + height, 1 + dc:1 + dc + width]
    return (state == FREE) & near_unknown


def is_frontier(grid: OccupancyGrid, cell) -> bool:
    """True iff the cell is Free and borders an Unknown cell (8-neighborhood)."""
    col, row = cell
    if not grid.in_bounds(col, row):
        raise ValueError(f"cell {cell} out of bounds")
    if grid.cell_state(col, row) != FREE:
        return False
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            nc, nr = col + dc, row + dr
            if grid.in_bounds(nc, nr) and grid.cell_state(nc, nr) == UNKNOWN:
                return True
    return False


def oracle_full_scan(grid: OccupancyGrid) -> set:
    """Exhaustive frontier detection over every cell (the baseline detector)."""
    rows, cols = np.nonzero(frontier_mask(grid))
    return set(zip(cols.tolist(), rows.tolist()))


def _flood_fill(fmask: np.ndarray, visited: np.ndarray, seed, stats: DetectionStats):
    """Collect the 8-connected frontier component containing ``seed``."""
    height, width = fmask.shape
    col, row = seed
    cells = [(col, row)]
    visited[row, col] = True
    stack = [(col, row)]
    while stack:
        c, r = stack.pop()
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == 0 and dc == 0:
                    continue
                nc, nr = c + dc, r + dr
                stats.flood_steps += 1
                if (0 <= nc < width and 0 <= nr < height
                        and fmask[nr, nc] and not visited[nr, nc]):
                    visited[nr, nc] = True
                    cells.append((nc, nr))
                    stack.append((nc, nr))
    return cells


def detect_frontiers(grid: OccupancyGrid, graph, index: FrontierIndex,
                     label_fn=None, use_pruning: bool = True,
                     assign_gains: bool = True) -> FrontierIndex:
    """Ray-cast around open nodes, flood-fill clusters, prune dead nodes.

    Rebuilds ``index.clusters`` from the current belief, extends
    ``index.closed_nodes`` with nodes whose rays found no frontier cell,
    and writes every node's info gain.  ``use_pruning=False`` scans every
    node regardless of the closed set (the unpruned baseline); the closed
    set is still maintained so both variants stay comparable.
    """
    stats = DetectionStats()
    fmask = frontier_mask(grid)
    occ = grid.occupied_mask()
    visited = np.zeros_like(fmask)
    table = ray_table(index.n_rays, index.raycast_radius, grid.resolution)
    clusters: list[FrontierCluster] = []

    for node in graph.nodes:
        if use_pruning and node.id in index.closed_nodes:
            continue
        stats.nodes_scanned += 1
        col, row = grid.cell_of(node.x, node.y)
        cols, rows = table.visible_cells(occ, col, row)
        stats.ray_cells += cols.size
        hit = fmask[rows, cols]
        if not hit.any():
            index.closed_nodes.add(node.id)
            continue
        for c, r in zip(cols[hit].tolist(), rows[hit].tolist()):
            if not visited[r, c]:
                cells = _flood_fill(fmask, visited, (c, r), stats)
                clusters.append(cells)

    index.clusters = _finalize_clusters(clusters, grid, graph, label_fn)
    index.last_stats = stats
    if assign_gains:
        _assign_info_gain(graph, index, grid.resolution)
    return index


def _finalize_clusters(raw_clusters, grid, graph, label_fn) -> list:
    finished = []
    for cells in raw_clusters:
        arr = np.array(cells, dtype=np.float64)
        cx = float((arr[:, 0].mean() + 0.5) * grid.resolution)
        cy = float((arr[:, 1].mean() + 0.5) * grid.resolution)
        centroid = Pose(cx, cy)
        label = UNLABELED
        if label_fn is not None:
            label = label_fn(centroid)
        if label.kind == "unlabeled" and len(graph) > 0:
            from .roadmap import nearest_node
            label = graph.nodes[nearest_node(graph, centroid)].label
        finished.append(FrontierCluster(frozenset(cells), centroid, label))
    finished.sort(key=lambda cl: min(cl.cells))
    return finished


def _cluster_centers_m(index: FrontierIndex, resolution: float) -> list:
    return [(np.array(sorted(cl.cells), dtype=np.float64) + 0.5) * resolution
            for cl in index.clusters]


def _assign_info_gain(graph, index: FrontierIndex, resolution: float) -> None:
    centers = _cluster_centers_m(index, resolution)
    radius = index.raycast_radius
    for node in graph.nodes:
        if node.id in index.closed_nodes:
            node.info_gain = 0
            node.closed = True
            continue
        node.closed = False
        total = 0
        for arr, cluster in zip(centers, index.clusters):
            d2 = (arr[:, 0] - node.x) ** 2 + (arr[:, 1] - node.y) ** 2
            if d2.min() <= radius * radius:
                total += len(cluster)
        node.info_gain = total


def node_info_gain(node, index: FrontierIndex, resolution: float) -> int:
    """Frontier cells of clusters whose nearest cell lies within the
    raycast radius of the node; closed nodes always count zero."""
    if node.id in index.closed_nodes:
        return 0
    total = 0
    for arr, cluster in zip(_cluster_centers_m(index, resolution), index.clusters):
        d2 = (arr[:, 0] - node.x) ** 2 + (arr[:, 1] - node.y) ** 2
        if d2.min() <= index.raycast_radius ** 2:
            total += len(cluster)
    return total


def reopen_nodes(index: FrontierIndex, changed_cells, graph,
                 resolution: float) -> FrontierIndex:
    """Reopen closed nodes near any cell the latest scan changed."""
    if len(changed_cells) == 0 or not index.closed_nodes:
        return index
    centers = (np.asarray(changed_cells, dtype=np.float64) + 0.5) * resolution
    radius = index.raycast_radius
    for node_id in sorted(index.closed_nodes):
        node = graph.nodes[node_id]
        d = np.hypot(centers[:, 0] - node.x, centers[:, 1] - node.y)
        if d.min() <= radius:
            index.closed_nodes.discard(node_id)
    return index
