"""Scenario files: JSON world descriptions and the bundled benchmark maps.

Format::

    {
      "resolution": 0.25,
      "grid": ["##########", "#........#", ...],   # first line = top row
      "regions": [{"label": "r1", "kind": "room", "rect": [x0, y0, x1, y1]}],
      "start": [x_m, y_m],
      "sensor": {"beams": 64, "max_range_m": 4.0},
      "seed": 7
    }

``#`` is solid, ``.`` free.  Rects are cell coordinates in the world frame
(y up, exclusive upper bounds).  Validation failures report the offending
line of the source file.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .world import (Pose, SemanticLabel, SemanticRegion, SensorParams,
                    WorldModel)


class ScenarioError(ValueError):
    def __init__(self, source: str, line: int, message: str):
        self.source = source
        self.line = line
        super().__init__(f"{source}:{line}: {message}")


@dataclass
class Scenario:
    name: str
    world: WorldModel
    sensor: SensorParams
    seed: int


def _line_of(text: str, needle: str, occurrence: int = 0) -> int:
    """1-based line of the n-th occurrence of ``needle``; 1 if absent."""
    start = 0
    for _ in range(occurrence + 1):
        idx = text.find(needle, start)
        if idx < 0:
            return 1
        start = idx + 1
    return text.count("\n", 0, start - 1) + 1


def _line_of_key(text: str, key: str) -> int:
    return _line_of(text, json.dumps(key))


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(source, exc.lineno, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ScenarioError(source, 1, "scenario must be a JSON object")

    def require(key):
        if key not in data:
            raise ScenarioError(source, 1, f"missing required key {key!r}")
        return data[key]

    resolution = require("resolution")
    if not isinstance(resolution, (int, float)) or not (0 < resolution < 10):
        raise ScenarioError(source, _line_of_key(text, "resolution"),
                            f"resolution must be a positive number, got {resolution!r}")

    rows = require("grid")
    if not isinstance(rows, list) or not rows or not all(isinstance(r, str) for r in rows):
        raise ScenarioError(source, _line_of_key(text, "grid"),
                            "grid must be a non-empty list of strings")
    width = len(rows[0])
    seen: dict = {}
    for i, row in enumerate(rows):
        occurrence = seen.get(row, 0)
        seen[row] = occurrence + 1
        if len(row) != width:
            raise ScenarioError(source, _line_of(text, json.dumps(row), occurrence),
                                f"grid row {i} has width {len(row)}, expected {width}")
        bad = set(row) - {"#", "."}
        if bad:
            raise ScenarioError(source, _line_of(text, json.dumps(row), occurrence),
                                f"grid row {i} contains invalid cells {sorted(bad)!r}")
    height = len(rows)
    solid = np.zeros((height, width), dtype=bool)
    for i, row in enumerate(rows):
        # first listed line is the top of the map (largest y)
        solid[height - 1 - i] = np.frombuffer(row.encode(), dtype=np.uint8) == ord("#")

    regions = []
    labels_seen = set()
    for entry in data.get("regions", []):
        label_text = entry.get("label")
        kind = entry.get("kind")
        rect = entry.get("rect")
        line = _line_of(text, json.dumps(label_text)) if isinstance(label_text, str) else 1
        if not isinstance(label_text, str) or not label_text:
            raise ScenarioError(source, line, "region label must be a non-empty string")
        if label_text in labels_seen:
            raise ScenarioError(source, line, f"duplicate region label {label_text!r}")
        labels_seen.add(label_text)
        if kind not in ("room", "connection"):
            raise ScenarioError(source, line,
                                f"region {label_text!r} kind must be 'room' or 'connection'")
        if (not isinstance(rect, list) or len(rect) != 4
                or not all(isinstance(v, int) for v in rect)):
            raise ScenarioError(source, line,
                                f"region {label_text!r} rect must be four integers")
        x0, y0, x1, y1 = rect
        if not (0 <= x0 < x1 <= width and 0 <= y0 < y1 <= height):
            raise ScenarioError(source, line,
                                f"region {label_text!r} rect {rect} out of bounds "
                                f"for a {width}x{height} grid")
        regions.append(SemanticRegion(SemanticLabel(kind, label_text),
                                      ((x0, y0, x1, y1),)))

    start = require("start")
    if (not isinstance(start, list) or len(start) != 2
            or not all(isinstance(v, (int, float)) and math.isfinite(v) for v in start)):
        raise ScenarioError(source, _line_of_key(text, "start"),
                            "start must be [x_m, y_m]")
    start_pose = Pose(float(start[0]), float(start[1]))
    col = int(start_pose.x / resolution)
    row = int(start_pose.y / resolution)
    if not (0 <= col < width and 0 <= row < height) or solid[row, col]:
        raise ScenarioError(source, _line_of_key(text, "start"),
                            f"start {start} is not on a free cell")

    sensor_data = data.get("sensor", {})
    sensor = SensorParams(
        beam_count=int(sensor_data.get("beams", 64)),
        max_range=float(sensor_data.get("max_range_m", 4.0)),
    )
    if sensor.max_range <= resolution:
        raise ScenarioError(source, _line_of_key(text, "sensor"),
                            "sensor max_range_m must exceed the resolution")

    seed = data.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ScenarioError(source, _line_of_key(text, "seed"),
                            "seed must be a non-negative integer")

    try:
        world = WorldModel(solid, float(resolution), regions, start_pose)
    except ValueError as exc:
        raise ScenarioError(source, 1, str(exc)) from exc
    return Scenario(name=Path(source).stem, world=world, sensor=sensor, seed=seed)


def load_scenario(path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(), source=str(path))


def builtin_scenario_names() -> list[str]:
    root = resources.files("srmexplore") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_builtin(name: str) -> Scenario:
    ref = resources.files("srmexplore") / "scenarios" / f"{name}.json"
    if not ref.is_file():
        raise FileNotFoundError(
            f"no bundled scenario {name!r}; available: {builtin_scenario_names()}")
    return parse_scenario(ref.read_text(), source=f"{name}.json")


def resolve_scenario(spec) -> Scenario:
    """Accept a path to a JSON file or the name of a bundled scenario."""
    if isinstance(spec, Scenario):
        return spec
    path = Path(spec)
    if path.exists():
        return load_scenario(path)
    return load_builtin(str(spec))
