"""Shared fixture builders for the test suite."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from newsflow.gridding import Grid, GridFields, RasterizedSchedule
from newsflow.network import Intersection, Street, StreetNetwork, TurningTable

FIXTURES_DIR = Path(__file__).resolve().parent.parent / "fixtures"

AXIS_COS = (0.0, 1.0, -1.0, 0.0)   # N, E, W, S
AXIS_SIN = (1.0, 0.0, 0.0, -1.0)


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES_DIR


def make_net(nodes, streets, turning=None) -> StreetNetwork:
    """Assemble a StreetNetwork from terse tuples.

    ``nodes``: (id, x, y[, entry, exit]); ``streets``: (id, from, to, length,
    lanes, v_max[, phi_override]); ``turning``: {node: {(in, out): alpha}}.
    """
    intersections = []
    for row in nodes:
        nid, x, y = row[:3]
        entry = row[3] if len(row) > 3 else False
        exit_ = row[4] if len(row) > 4 else False
        intersections.append(Intersection(nid, float(x), float(y), entry, exit_))
    by_id = {n.id: n for n in intersections}
    street_objs = []
    for row in streets:
        sid, a, b, length, lanes, v_max = row[:6]
        override = row[6] if len(row) > 6 else None
        direction = (by_id[b].x - by_id[a].x, by_id[b].y - by_id[a].y)
        street_objs.append(Street(sid, a, b, float(length), int(lanes),
                                  float(v_max), direction, override))
    return StreetNetwork(tuple(intersections), tuple(street_objs),
                         TurningTable(turning or {}))


def cross_nodes_streets(arm: float = 100.0, lanes: int = 1, v_max: float = 10.0):
    """Orthogonal cross: centre X with 4 two-way arms N/E/S/W."""
    nodes = [("X", 0, 0), ("N", 0, arm), ("E", arm, 0), ("S", 0, -arm), ("W", -arm, 0)]
    streets = []
    for a in "NESW":
        streets.append((f"in_{a}", a, "X", arm, lanes, v_max))
        streets.append((f"out_{a}", "X", a, arm, lanes, v_max))
    return nodes, streets


def cross_uniform_turning():
    """At the centre: uniform 1/3 to each non-U-turn exit; arms U-turn back."""
    table = {"X": {}}
    for a in "NESW":
        for b in "NESW":
            if b != a:
                table["X"][(f"in_{a}", f"out_{b}")] = 1.0 / 3.0
    for a in "NESW":
        table[a] = {(f"out_{a}", f"in_{a}"): 1.0}
    return table


def cross_through_turning():
    """All traffic continues straight across the centre."""
    opposite = {"N": "S", "E": "W", "W": "E", "S": "N"}
    table = {"X": {}}
    for a in "NESW":
        table["X"][(f"in_{a}", f"out_{opposite[a]}")] = 1.0
    for a in "NESW":
        table[a] = {(f"out_{a}", f"in_{a}"): 1.0}
    return table


def uniform_fields(nx=8, ny=6, dx=100.0, dy=100.0, *, ghost=1, v=10.0,
                   rho_max=1.0 / 6.0, length=100.0, gamma=1.0 / 3.0,
                   cos=AXIS_COS, sin=AXIS_SIN, alpha=None, beta=None) -> GridFields:
    """Spatially uniform GridFields for solver tests, no network required."""
    grid = Grid(nx, ny, dx, dy, 0.0, 0.0, ghost=ghost, pad=0)
    shape = (4,) + grid.shape

    def full4(values):
        return np.broadcast_to(np.reshape(values, (4, 1, 1)), shape).copy()

    def full44(table):
        if table is None:
            table = np.zeros((4, 4))
        return np.broadcast_to(np.reshape(table, (4, 4, 1, 1)),
                               (4, 4) + grid.shape).copy()

    rho_max_f = full4([rho_max] * 4 if np.ndim(rho_max) == 0 else rho_max)
    v_f = full4([v] * 4 if np.ndim(v) == 0 else v)
    return GridFields(
        grid=grid, gamma=gamma,
        cos_c=full4(cos), sin_c=full4(sin),
        v_max=v_f, rho_max=rho_max_f, rho_crit=gamma * rho_max_f,
        length_scale=np.full(grid.shape, length),
        alpha=full44(alpha), beta=full44(beta))


def point_raster(grid: Grid, entries=(), minutes: int = 1) -> RasterizedSchedule:
    """RasterizedSchedule with explicit per-cell entries.

    ``entries``: (i, j, direction, source_series, sink_series) with series
    broadcastable to ``minutes``; values are flow densities (already per area).
    """
    cells = []
    src = []
    snk = []
    for i, j, d, s_in, s_out in entries:
        cells.append((i, j))
        row_src = np.zeros((4, minutes))
        row_snk = np.zeros((4, minutes))
        row_src[d] = s_in
        row_snk[d] = s_out
        src.append(row_src)
        snk.append(row_snk)
    if not cells:
        return RasterizedSchedule(grid, minutes, np.zeros((0, 2), dtype=int),
                                  np.zeros((0, 4, minutes)), np.zeros((0, 4, minutes)))
    return RasterizedSchedule(grid, minutes, np.array(cells, dtype=int),
                              np.array(src), np.array(snk))


def write_cross_file(path: Path, turning: str = "uniform") -> Path:
    """Write the cross network in the text format; returns the path."""
    lines = ["[intersections]",
             "X 0 0 0 0",
             "N 0 100 1 1", "E 100 0 1 1", "S 0 -100 1 1", "W -100 0 1 1",
             "", "[streets]"]
    for a in "NESW":
        lines.append(f"in_{a} {a} X 100 1 10")
        lines.append(f"out_{a} X {a} 100 1 10")
    opposite = {"N": "S", "E": "W", "W": "E", "S": "N"}
    lines.append("")
    lines.append("[turning X]")
    for a in "NESW":
        if turning == "uniform":
            for b in "NESW":
                if b != a:
                    lines.append(f"in_{a} out_{b} {1.0 / 3.0!r}")
        else:
            lines.append(f"in_{a} out_{opposite[a]} 1.0")
    for a in "NESW":
        lines.append("")
        lines.append(f"[turning {a}]")
        lines.append(f"out_{a} in_{a} 1.0")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
