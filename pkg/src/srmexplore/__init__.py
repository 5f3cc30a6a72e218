"""Deterministic 2D exploration engine built around an incrementally grown
semantic roadmap, with node-anchored frontier detection, cross-entropy
trajectory optimization, and a benchmark harness."""

from .ceplan import (CEConfig, ce_optimize, feasible, path_information, reward)
from .decide import (TargetCandidate, enumerate_candidates, select_nbt_combined,
                     select_nbt_max_entropy, select_nbt_nearest_frontier,
                     select_nbt_srm)
from .episode import EpisodeConfig, EpisodeMetrics, run_episode
from .frontier import (FrontierCluster, FrontierIndex, detect_frontiers,
                       is_frontier, node_info_gain, oracle_full_scan,
                       reopen_nodes)
from .grid import (GridParams, OccupancyGrid, cell_entropy, expected_info_gain,
                   integrate_scan, map_entropy)
from .paths import Trajectory
from .rng import Stream, substream
from .roadmap import (DropReason, SparsePath, SrmGraph, UnreachableError,
                      check_edge_validity, invalidate_and_replan, nearest_node,
                      sample_candidates, shortest_path, try_insert)
from .rrt import RrtConfig, rrt_star_plan, timing_probe
from .scenario import Scenario, ScenarioError, load_builtin, load_scenario, parse_scenario
from .world import (LaserScan, Pose, SemanticLabel, SemanticRegion, SensorParams,
                    UNLABELED, WorldModel, semantic_label_at, simulate_scan,
                    step_motion)

__version__ = "0.1.0"
