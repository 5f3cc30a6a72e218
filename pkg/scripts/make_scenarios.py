#!/usr/bin/env python3
"""Regenerate the bundled benchmark scenario files.

Maps are carved from solid rasters as rectangles of free space; rooms and
connecting corridors get semantic region rects.  Rerun after editing and
commit the JSON outputs (tests and benchmarks consume the committed files).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "src" / "srmexplore" / "scenarios"
RES = 0.25


class MapBuilder:
    def __init__(self, width_cells: int, height_cells: int):
        self.solid = np.ones((height_cells, width_cells), dtype=bool)
        self.regions = []

    def carve(self, x0, y0, x1, y1):
        self.solid[y0:y1, x0:x1] = False
        return (x0, y0, x1, y1)

    def room(self, name, x0, y0, x1, y1, carve=True):
        if carve:
            self.carve(x0, y0, x1, y1)
        self.regions.append({"label": name, "kind": "room",
                             "rect": [x0, y0, x1, y1]})

    def corridor(self, name, x0, y0, x1, y1, carve=True):
        if carve:
            self.carve(x0, y0, x1, y1)
        self.regions.append({"label": name, "kind": "connection",
                             "rect": [x0, y0, x1, y1]})

    def door(self, x0, y0, x1, y1):
        self.carve(x0, y0, x1, y1)

    def to_scenario(self, start_cell, seed=0, beams=64, max_range=4.0):
        height, width = self.solid.shape
        rows = []
        for r in range(height - 1, -1, -1):  # top line first
            rows.append("".join("#" if v else "." for v in self.solid[r]))
        start = [(start_cell[0] + 0.5) * RES, (start_cell[1] + 0.5) * RES]
        return {
            "resolution": RES,
            "grid": rows,
            "regions": self.regions,
            "start": start,
            "sensor": {"beams": beams, "max_range_m": max_range},
            "seed": seed,
        }


def write(name: str, scenario: dict) -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    path = OUT / f"{name}.json"
    path.write_text(json.dumps(scenario, indent=1) + "\n")
    grid = scenario["grid"]
    free = sum(row.count(".") for row in grid)
    print(f"{name}: {len(grid[0])}x{len(grid)} cells "
          f"({len(grid[0]) * RES:.2f}x{len(grid) * RES:.2f} m), {free} free cells")


def map1() -> dict:
    """15x15 m: central corridor, three rooms above, two below."""
    b = MapBuilder(60, 60)
    b.corridor("c1", 2, 26, 58, 34)
    b.room("r1", 2, 35, 19, 58)
    b.room("r2", 21, 35, 39, 58)
    b.room("r3", 41, 35, 58, 58)
    b.door(7, 34, 13, 35)
    b.door(27, 34, 33, 35)
    b.door(46, 34, 52, 35)
    b.room("r4", 2, 2, 28, 25)
    b.room("r5", 30, 2, 58, 25)
    b.door(11, 25, 17, 26)
    b.door(43, 25, 49, 26)
    return b.to_scenario((6, 30), seed=1)


def map2() -> dict:
    """20x15 m: L-shaped corridor with four rooms along both arms."""
    b = MapBuilder(80, 60)
    b.corridor("c1", 2, 24, 62, 32)          # horizontal arm
    b.corridor("c2", 54, 32, 62, 58, carve=True)  # vertical arm up
    b.room("r1", 2, 34, 25, 58)
    b.room("r2", 27, 34, 50, 58)
    b.door(10, 32, 16, 34)
    b.door(34, 32, 40, 34)
    # rooms below the horizontal arm
    b.room("r3", 2, 2, 39, 22)
    b.room("r4", 41, 2, 78, 22)
    b.door(16, 22, 22, 24)
    b.door(56, 22, 62, 24)
    # room right of the vertical arm
    b.room("r5", 64, 34, 78, 58)
    b.door(62, 44, 64, 50)
    return b.to_scenario((6, 28), seed=2)


def map3() -> dict:
    """20x16 m: crossing corridors, rooms in all four quadrants."""
    b = MapBuilder(80, 64)
    b.corridor("c1", 2, 28, 78, 36)           # horizontal
    b.corridor("c2", 36, 2, 44, 28, carve=True)   # vertical lower
    b.corridor("c3", 36, 36, 44, 62, carve=True)  # vertical upper
    b.room("r1", 2, 38, 34, 62)
    b.door(14, 36, 20, 38)
    b.room("r2", 46, 38, 78, 62)
    b.door(58, 36, 64, 38)
    b.room("r3", 2, 2, 34, 26)
    b.door(14, 26, 20, 28)
    b.room("r4", 46, 2, 78, 26)
    b.door(58, 26, 64, 28)
    return b.to_scenario((40, 31), seed=3)


def map4(start_cell, seed) -> dict:
    """16.25x16 m: corridor ring around a center block, rooms on the outside."""
    b = MapBuilder(65, 64)
    # ring corridor
    b.corridor("c1", 14, 14, 51, 21)    # bottom band
    b.corridor("c2", 14, 43, 51, 50)    # top band
    b.corridor("c3", 14, 21, 21, 43, carve=True)   # left band
    b.corridor("c4", 44, 21, 51, 43, carve=True)   # right band
    # rooms around the outside
    b.room("r1", 2, 2, 31, 12)
    b.door(14, 12, 20, 14)
    b.room("r2", 33, 2, 63, 12)
    b.door(44, 12, 50, 14)
    b.room("r3", 2, 52, 31, 62)
    b.door(14, 50, 20, 52)
    b.room("r4", 33, 52, 63, 62)
    b.door(44, 50, 50, 52)
    b.room("r5", 53, 16, 63, 48)
    b.door(51, 28, 53, 34)
    b.room("r6", 2, 16, 12, 48)
    b.door(12, 28, 14, 34)
    return b.to_scenario(start_cell, seed=seed)


def corridor_sideroom() -> dict:
    """12x5 m straight corridor with one side room off the middle."""
    b = MapBuilder(48, 20)
    b.corridor("c1", 2, 12, 46, 18)
    b.room("r1", 14, 2, 34, 10)
    b.door(20, 10, 28, 12)
    return b.to_scenario((4, 15), seed=6)


def tinyroom() -> dict:
    """Single 6x6 m room, trivial completion check."""
    b = MapBuilder(24, 24)
    b.room("r1", 2, 2, 22, 22)
    return b.to_scenario((12, 12), seed=5)


def main():
    write("map1", map1())
    write("map2", map2())
    write("map3", map3())
    write("map4_a", map4((17, 17), 4))
    write("map4_b", map4((47, 46), 4))
    write("map4_c", map4((6, 6), 4))
    write("corridor_sideroom", corridor_sideroom())
    write("tinyroom", tinyroom())


if __name__ == "__main__":
    main()
