"""Incrementally grown semantic roadmap and its path queries.

Nodes are sampled under sensor coverage and attach to the nearest visible
existing node, so the graph grows as a tree rooted at the start pose;
lazy edge invalidation removes edges that newly observed obstacles
contradict, with a single-segment repair attempt when a deletion would
disconnect a query.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .geom import segment_clear
from .grid import OccupancyGrid
from .world import LaserScan, Pose, SemanticLabel, UNLABELED


class DropReason(Enum):
    TOO_CLOSE = "too_close"
    NO_VALID_EDGE = "no_valid_edge"
    IN_COLLISION = "in_collision"


class UnreachableError(RuntimeError):
    """No path between the requested nodes on the current graph."""


@dataclass
class SrmNode:
    id: int
    x: float
    y: float
    label: SemanticLabel = UNLABELED
    info_gain: int = 0
    closed: bool = False

    @property
    def pose(self) -> Pose:
        return Pose(self.x, self.y)


@dataclass(frozen=True)
class SparsePath:
    node_ids: tuple
    length: float

    def positions(self, graph: "SrmGraph") -> np.ndarray:
        return np.array([[graph.nodes[i].x, graph.nodes[i].y]
                         for i in self.node_ids])


class SrmGraph:
    def __init__(self, root_pose: Pose, root_label: SemanticLabel = UNLABELED):
        self.nodes: list[SrmNode] = []
        self.adj: list[dict[int, float]] = []
        self._xs = np.empty(0, dtype=np.float64)
        self._ys = np.empty(0, dtype=np.float64)
        self.root = self._add_node(root_pose.x, root_pose.y, root_label)

    def _add_node(self, x: float, y: float, label: SemanticLabel) -> int:
        node_id = len(self.nodes)
        self.nodes.append(SrmNode(node_id, x, y, label))
        self.adj.append({})
        self._xs = np.append(self._xs, x)
        self._ys = np.append(self._ys, y)
        return node_id

    def add_edge(self, a: int, b: int) -> None:
        if a == b:
            raise ValueError("self-loops are not allowed")
        length = math.hypot(self._xs[a] - self._xs[b], self._ys[a] - self._ys[b])
        self.adj[a][b] = length
        self.adj[b][a] = length

    def remove_edge(self, a: int, b: int) -> None:
        self.adj[a].pop(b, None)
        self.adj[b].pop(a, None)

    def has_edge(self, a: int, b: int) -> bool:
        return b in self.adj[a]

    def __len__(self):
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self.adj) // 2

    def edges(self):
        for a, nbrs in enumerate(self.adj):
            for b in nbrs:
                if a < b:
                    yield a, b

    def positions(self) -> np.ndarray:
        return np.column_stack((self._xs, self._ys))

    def open_nodes(self):
        return [n for n in self.nodes if not n.closed]

    def component_of(self, start: int) -> set[int]:
        seen = {start}
        stack = [start]
        while stack:
            cur = stack.pop()
            for nbr in self.adj[cur]:
                if nbr not in seen:
                    seen.add(nbr)
                    stack.append(nbr)
        return seen

    # -- snapshot export -------------------------------------------------

    def to_snapshot(self) -> dict:
        return {
            "nodes": [{"id": n.id, "x": n.x, "y": n.y, "label": str(n.label),
                       "info_gain": n.info_gain, "closed": n.closed}
                      for n in self.nodes],
            "edges": sorted([a, b] for a, b in self.edges()),
        }

    def save_snapshot(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_snapshot(), indent=1) + "\n")

    @staticmethod
    def from_snapshot(data: dict) -> "SrmGraph":
        nodes = sorted(data["nodes"], key=lambda n: n["id"])
        if not nodes or nodes[0]["id"] != 0:
            raise ValueError("graph snapshot must contain node 0")
        first = nodes[0]
        graph = SrmGraph(Pose(first["x"], first["y"]),
                         SemanticLabel.parse(first["label"]))
        graph.nodes[0].info_gain = first.get("info_gain", 0)
        graph.nodes[0].closed = first.get("closed", False)
        for spec in nodes[1:]:
            nid = graph._add_node(spec["x"], spec["y"],
                                  SemanticLabel.parse(spec["label"]))
            graph.nodes[nid].info_gain = spec.get("info_gain", 0)
            graph.nodes[nid].closed = spec.get("closed", False)
        for a, b in data["edges"]:
            graph.add_edge(a, b)
        return graph

    @staticmethod
    def load_snapshot(path) -> "SrmGraph":
        return SrmGraph.from_snapshot(json.loads(Path(path).read_text()))


def sample_candidates(scan: LaserScan, rng: np.random.Generator,
                      bounds_m: tuple[float, float],
                      margin: float = 0.05, retries: int = 3) -> list[Pose]:
    """One point per beam, uniform along the measured free segment.

    Each beam draws at distance u * range with u ~ Uniform(0, 1 - margin);
    points outside the map are redrawn up to ``retries`` times then the
    beam is skipped.  Draw order is beam order, so a fixed generator state
    reproduces the candidate list exactly.
    """
    if scan.angles.size == 0:
        raise ValueError("empty scan")
    width_m, height_m = bounds_m
    out = []
    ox, oy = scan.origin.x, scan.origin.y
    for angle, rng_dist in zip(scan.angles, scan.ranges):
        for _ in range(retries):
            u = rng.uniform(0.0, 1.0 - margin)
            d = u * rng_dist
            x = ox + d * math.cos(angle)
            y = oy + d * math.sin(angle)
            if 0.0 <= x < width_m and 0.0 <= y < height_m:
                out.append(Pose(x, y))
                break
    return out


def check_edge_validity(grid: OccupancyGrid, a: Pose, b: Pose,
                        r_robot: float) -> bool:
    """Inflated straight-segment check against the belief grid.

    Unknown cells pass (edges through unexplored space are assumed
    collision-free until contradicted); only Occupied cells block.
    """
    return segment_clear(grid.occupied_mask(), a.x, a.y, b.x, b.y,
                         r_robot, grid.resolution)


def try_insert(graph: SrmGraph, candidate: Pose, grid: OccupancyGrid,
               min_edge_len: float, r_robot: float,
               label_fn=None, occupied_mask=None):
    """Attach ``candidate`` to the nearest node with a valid edge.

    Nodes are scanned in ascending distance order and the first valid
    connection wins; a winning distance under ``min_edge_len`` drops the
    candidate as redundant.  Returns the new node id or a DropReason.
    ``occupied_mask`` lets callers reuse one thresholded mask per step.
    """
    col, row = grid.cell_of(candidate.x, candidate.y)
    if not grid.in_bounds(col, row):
        return DropReason.IN_COLLISION
    occ = occupied_mask if occupied_mask is not None else grid.occupied_mask()
    if occ[row, col]:
        return DropReason.IN_COLLISION

    dx = graph._xs - candidate.x
    dy = graph._ys - candidate.y
    dist = np.hypot(dx, dy)
    order = np.argsort(dist, kind="stable")  # stable: ties resolve to smaller id
    for idx in order:
        node = graph.nodes[idx]
        if segment_clear(occ, node.x, node.y, candidate.x, candidate.y,
                         r_robot, grid.resolution):
            if dist[idx] < min_edge_len:
                return DropReason.TOO_CLOSE
            label = label_fn(candidate) if label_fn is not None else UNLABELED
            new_id = graph._add_node(candidate.x, candidate.y, label)
            graph.add_edge(idx, new_id)
            return new_id
    return DropReason.NO_VALID_EDGE


def nearest_node(graph: SrmGraph, pose: Pose) -> int:
    """Euclidean-nearest node id; ties break to the smaller id."""
    if len(graph) == 0:
        raise ValueError("empty graph")
    d2 = (graph._xs - pose.x) ** 2 + (graph._ys - pose.y) ** 2
    return int(np.argmin(d2))  # argmin returns the first (= smallest id) minimum


def shortest_path(graph: SrmGraph, source: int, target: int,
                  stats: dict | None = None) -> SparsePath:
    """A* over the roadmap with the Euclidean heuristic.

    Edge lengths are Euclidean so the heuristic is admissible; ties on f
    break to the smaller node id.  Raises UnreachableError when the nodes
    are disconnected.  ``stats`` (if given) receives ``nodes_expanded``.
    """
    nodes = graph.nodes
    if not (0 <= source < len(nodes) and 0 <= target < len(nodes)):
        raise KeyError("unknown node id")
    if source == target:
        return SparsePath((source,), 0.0)
    tx, ty = nodes[target].x, nodes[target].y

    def h(i):
        return math.hypot(nodes[i].x - tx, nodes[i].y - ty)

    g_score = {source: 0.0}
    parent = {source: -1}
    closed = set()
    heap = [(h(source), source)]
    expanded = 0
    while heap:
        f, cur = heapq.heappop(heap)
        if cur in closed:
            continue
        expanded += 1
        if stats is not None:
            stats["nodes_expanded"] = expanded
        if cur == target:
            path = []
            node = cur
            while node != -1:
                path.append(node)
                node = parent[node]
            path.reverse()
            return SparsePath(tuple(path), g_score[target])
        closed.add(cur)
        g_cur = g_score[cur]
        for nbr, length in graph.adj[cur].items():
            if nbr in closed:
                continue
            tentative = g_cur + length
            if tentative < g_score.get(nbr, math.inf):
                g_score[nbr] = tentative
                parent[nbr] = cur
                heapq.heappush(heap, (tentative + h(nbr), nbr))
    raise UnreachableError(f"no path from node {source} to node {target}")


def invalid_path_edges(graph: SrmGraph, path: SparsePath, grid: OccupancyGrid,
                     r_robot: float, occupied_mask=None):
    """Pairs of path edge endpoints that fail the current-belief collision check."""
    occ = occupied_mask if occupied_mask is not None else grid.occupied_mask()
    bad = []
    for a, b in zip(path.node_ids[:-1], path.node_ids[1:]):
        na, nb = graph.nodes[a], graph.nodes[b]
        if not segment_clear(occ, na.x, na.y, nb.x, nb.y, r_robot, grid.resolution):
            bad.append((a, b))
    return bad


def invalidate_and_replan(graph: SrmGraph, path: SparsePath, grid: OccupancyGrid,
                          r_robot: float) -> SparsePath:
    """Re-check a path against the current belief and replan around damage.

    Invalid edges are deleted from the graph and A* re-run until a fully
    valid path comes back.  If deletions disconnect source from target,
    one repair attempt adds the shortest collision-free straight segment
    between the two components; failing that, UnreachableError.
    """
    source, target = path.node_ids[0], path.node_ids[-1]
    occ = grid.occupied_mask()
    current = path
    while True:
        bad = invalid_path_edges(graph, current, grid, r_robot, occupied_mask=occ)
        if not bad:
            return current
        for a, b in bad:
            graph.remove_edge(a, b)
        try:
            current = shortest_path(graph, source, target)
        except UnreachableError:
            if not _repair_components(graph, source, target, occ, grid.resolution,
                                      r_robot):
                raise
            current = shortest_path(graph, source, target)


def _repair_components(graph: SrmGraph, source: int, target: int,
                       occ, resolution: float, r_robot: float) -> bool:
    comp_a = graph.component_of(source)
    if target in comp_a:
        return True
    comp_b = graph.component_of(target)
    a_ids = np.array(sorted(comp_a))
    b_ids = np.array(sorted(comp_b))
    ax = graph._xs[a_ids]
    ay = graph._ys[a_ids]
    bx = graph._xs[b_ids]
    by = graph._ys[b_ids]
    d = np.hypot(ax[:, None] - bx[None, :], ay[:, None] - by[None, :])
    for flat in np.argsort(d, axis=None, kind="stable"):
        i, j = np.unravel_index(flat, d.shape)
        u, v = int(a_ids[i]), int(b_ids[j])
        if segment_clear(occ, graph._xs[u], graph._ys[u], graph._xs[v],
                         graph._ys[v], r_robot, resolution):
            graph.add_edge(u, v)
            return True
    return False
