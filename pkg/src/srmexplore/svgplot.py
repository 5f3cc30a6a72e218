"""Deterministic SVG renditions of episode metrics and benchmark traces.

Hand-rolled SVG keeps output a pure function of the input data: no
timestamps, no library-version drift, stable float formatting.  Golden
tests compare bytes.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

PALETTE = ("#1b6ca8", "#c23b22", "#2e8540", "#8e5ba6", "#c28e0e", "#3b3b3b")
WIDTH, HEIGHT = 640, 400
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 62, 16, 34, 46


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1, 2, 2.5, 5, 10):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12:
        out.append(round(v, 10))
        v += step
    return out


def line_chart(series: list[tuple], title: str, xlabel: str, ylabel: str) -> str:
    """Render (label, xs, ys) series as an SVG line chart string."""
    if not series or all(len(xs) == 0 for _, xs, _ in series):
        raise ValueError("no data to plot")
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x):
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * ph

    out = io.StringIO()
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
              f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">\n')
    out.write(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>\n')
    out.write(f'<text x="{WIDTH // 2}" y="20" text-anchor="middle" '
              f'font-family="monospace" font-size="14">{title}</text>\n')
    out.write(f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" '
              f'fill="none" stroke="#222222"/>\n')
    for tx in _ticks(x_lo, x_hi):
        px = sx(tx)
        out.write(f'<line x1="{_fmt(px)}" y1="{HEIGHT - MARGIN_B}" x2="{_fmt(px)}" '
                  f'y2="{HEIGHT - MARGIN_B + 4}" stroke="#222222"/>\n')
        out.write(f'<text x="{_fmt(px)}" y="{HEIGHT - MARGIN_B + 17}" '
                  f'text-anchor="middle" font-family="monospace" font-size="10">'
                  f'{_fmt(tx)}</text>\n')
    for ty in _ticks(y_lo, y_hi):
        py = sy(ty)
        out.write(f'<line x1="{MARGIN_L - 4}" y1="{_fmt(py)}" x2="{MARGIN_L}" '
                  f'y2="{_fmt(py)}" stroke="#222222"/>\n')
        out.write(f'<text x="{MARGIN_L - 7}" y="{_fmt(py + 3)}" text-anchor="end" '
                  f'font-family="monospace" font-size="10">{_fmt(ty)}</text>\n')
    out.write(f'<text x="{WIDTH // 2}" y="{HEIGHT - 10}" text-anchor="middle" '
              f'font-family="monospace" font-size="12">{xlabel}</text>\n')
    out.write(f'<text x="16" y="{HEIGHT // 2}" text-anchor="middle" '
              f'font-family="monospace" font-size="12" '
              f'transform="rotate(-90 16 {HEIGHT // 2})">{ylabel}</text>\n')
    for i, (name, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, ys))
        out.write(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                  f'stroke-width="1.5"/>\n')
        ly = MARGIN_T + 14 + 14 * i
        out.write(f'<line x1="{WIDTH - 150}" y1="{ly - 4}" x2="{WIDTH - 128}" '
                  f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>\n')
        out.write(f'<text x="{WIDTH - 124}" y="{ly}" font-family="monospace" '
                  f'font-size="10">{name}</text>\n')
    out.write("</svg>\n")
    return out.getvalue()


def map_overlay(grid, graph_snapshot: dict | None = None,
                trajectory=None, frontier_cells=None, title: str = "map") -> str:
    """Render a belief grid with optional roadmap, path, and frontiers."""
    state = grid.state_grid()
    height, width = state.shape
    scale = max(4, int(600 / max(width, height)))
    w_px, h_px = width * scale, height * scale + 24

    def px(x):  # world meters -> svg x
        return x / grid.resolution * scale

    def py(y):  # world meters -> svg y (flip: y up)
        return (height - y / grid.resolution) * scale + 24

    out = io.StringIO()
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{w_px}" '
              f'height="{h_px}" viewBox="0 0 {w_px} {h_px}">\n')
    out.write(f'<rect width="{w_px}" height="{h_px}" fill="#9a9a9a"/>\n')
    out.write(f'<text x="{w_px // 2}" y="16" text-anchor="middle" '
              f'font-family="monospace" font-size="12">{title}</text>\n')
    for value, color in ((0, "#f5f5f5"), (1, "#202020")):
        rows, cols = (state == value).nonzero()
        for r, c in zip(rows.tolist(), cols.tolist()):
            out.write(f'<rect x="{c * scale}" y="{(height - 1 - r) * scale + 24}" '
                      f'width="{scale}" height="{scale}" fill="{color}"/>\n')
    if frontier_cells:
        for c, r in sorted(frontier_cells):
            out.write(f'<rect x="{c * scale}" y="{(height - 1 - r) * scale + 24}" '
                      f'width="{scale}" height="{scale}" fill="#d94f4f"/>\n')
    if graph_snapshot is not None:
        nodes = {n["id"]: n for n in graph_snapshot["nodes"]}
        for a, b in graph_snapshot["edges"]:
            na, nb = nodes[a], nodes[b]
            out.write(f'<line x1="{_fmt(px(na["x"]))}" y1="{_fmt(py(na["y"]))}" '
                      f'x2="{_fmt(px(nb["x"]))}" y2="{_fmt(py(nb["y"]))}" '
                      f'stroke="#2a63b8" stroke-width="1"/>\n')
        for n in graph_snapshot["nodes"]:
            color = {"room": "#2e8540", "connection": "#c28e0e"}.get(
                n["label"].split(":")[0], "#666666")
            out.write(f'<circle cx="{_fmt(px(n["x"]))}" cy="{_fmt(py(n["y"]))}" '
                      f'r="2.2" fill="{color}"/>\n')
    if trajectory is not None:
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in trajectory)
        out.write(f'<polyline points="{pts}" fill="none" stroke="#c23b22" '
                  f'stroke-width="2"/>\n')
    out.write("</svg>\n")
    return out.getvalue()


# -- file-level emitters (consumed by the CLI plot subcommand) ---------------

def emit_plots(in_dir, out_dir) -> list[Path]:
    """Render every recognized data file under ``in_dir`` into SVG files.

    Recognized inputs: per-run ``metrics.csv`` (entropy curve),
    ``compare_runs.csv`` (entropy summary per strategy is not derivable,
    so path-length bars are drawn per map), ``frontier_bench.csv``
    (detection cost curves), ``ce_trace.csv`` (convergence curve).
    Returns written paths; empty input is an error.
    """
    in_dir = Path(in_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for metrics in sorted(in_dir.glob("**/metrics.csv")):
        rows = list(csv.DictReader(metrics.open()))
        if not rows:
            continue
        xs = [float(r["sim_time"]) for r in rows]
        ys = [float(r["normalized_entropy"]) for r in rows]
        name = metrics.parent.name or "run"
        svg = line_chart([(name, xs, ys)], f"normalized entropy: {name}",
                         "sim time (s)", "H / H0")
        path = out_dir / f"entropy_{name}.svg"
        path.write_text(svg)
        written.append(path)
    bench = in_dir / "frontier_bench.csv"
    if bench.exists():
        rows = list(csv.DictReader(bench.open()))
        if rows:
            xs = [float(r["sim_time"]) for r in rows]
            series = [
                ("with pruning", xs, [float(r["ops_pruned"]) for r in rows]),
                ("no pruning", xs, [float(r["ops_unpruned"]) for r in rows]),
                ("full-grid oracle", xs, [float(r["ops_oracle"]) for r in rows]),
            ]
            svg = line_chart(series, "frontier detection cost", "sim time (s)",
                             "operations per step")
            path = out_dir / "frontier_cost.svg"
            path.write_text(svg)
            written.append(path)
    trace = in_dir / "ce_trace.csv"
    if trace.exists():
        rows = list(csv.DictReader(trace.open()))
        if rows:
            xs = [float(r["iteration"]) for r in rows]
            series = [("best reward", xs, [float(r["best_reward"]) for r in rows]),
                      ("quantile", xs, [float(r["quantile"]) for r in rows])]
            svg = line_chart(series, "trajectory optimization convergence",
                             "iteration", "reward")
            path = out_dir / "ce_convergence.svg"
            path.write_text(svg)
            written.append(path)
    for compare_csv in sorted(in_dir.glob("**/compare_runs.csv")):
        rows = list(csv.DictReader(compare_csv.open()))
        if not rows:
            continue
        by_map: dict = {}
        for r in rows:
            by_map.setdefault(r["scenario"], {}).setdefault(
                r["strategy"], []).append(float(r["path_length_m"]))
        for scenario, per_strategy in sorted(by_map.items()):
            series = []
            for strategy, lengths in sorted(per_strategy.items()):
                xs = list(range(len(lengths)))
                series.append((strategy, xs, sorted(lengths)))
            svg = line_chart(series, f"path length by seed (sorted): {scenario}",
                             "seed rank", "path length (m)")
            path = out_dir / f"path_lengths_{scenario}.svg"
            path.write_text(svg)
            written.append(path)
    if not written:
        raise ValueError(f"no plottable inputs under {in_dir}")
    return written
