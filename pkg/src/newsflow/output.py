"""Delimited-text writers and readers for frames, field dumps, and summaries."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .gridding import Grid, GridFields
from .news_params import DIRECTIONS
from .solver import DensityState

FRAME_LABELS = ("sum",) + DIRECTIONS


def frame_name(index: int, label: str) -> str:
    return f"frame_{index:04d}_{label}.txt"


def write_frame(directory: Path, index: int, state: DensityState, grid: Grid) -> None:
    """Write interior rasters (per direction and summed) at one output time.

    Layout: one-line header ``t nx ny dx dy`` followed by ``ny`` rows of
    ``nx`` values; row j holds the cells with y index j, x index increasing.
    """
    directory.mkdir(parents=True, exist_ok=True)
    sx, sy = grid.interior()
    header = f"{state.t!r} {grid.nx} {grid.ny} {grid.dx!r} {grid.dy!r}"
    interior = state.rho[:, sx, sy]
    for label, data in zip(FRAME_LABELS, (interior.sum(axis=0), *interior)):
        path = directory / frame_name(index, label)
        np.savetxt(path, data.T, header=header, comments="")


def read_frame(path: Path) -> tuple[float, tuple[float, float], np.ndarray]:
    """Read one frame back as (t, (dx, dy), data) with data shaped (nx, ny)."""
    with open(path, "r", encoding="utf-8") as fh:
        tokens = fh.readline().split()
        t = float(tokens[0])
        nx, ny = int(tokens[1]), int(tokens[2])
        dx, dy = float(tokens[3]), float(tokens[4])
        data = np.loadtxt(fh, ndmin=2)
    if data.shape != (ny, nx):
        raise ValueError(f"{path}: raster shape {data.shape} does not match header "
                         f"({ny} rows x {nx} cols expected)")
    return t, (dx, dy), data.T


def write_summary(path: Path, summary: dict[str, object]) -> None:
    lines = [f"{key} = {value!r}" if isinstance(value, str) else f"{key} = {value}"
             for key, value in summary.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_summary(path: Path) -> dict[str, str]:
    out = {}
    for raw in path.read_text(encoding="utf-8").splitlines():
        if "=" in raw:
            key, value = raw.split("=", 1)
            out[key.strip()] = value.strip().strip("'\"")
    return out


def write_budget(path: Path, budget: np.ndarray) -> None:
    np.savetxt(path, budget, header="t total_vehicles injected sunk boundary_outflow",
               comments="# ")


def write_field_dumps(directory: Path, fields: GridFields) -> None:
    """One text raster per parameter and direction, header ``nx ny dx dy x0 y0``."""
    directory.mkdir(parents=True, exist_ok=True)
    grid = fields.grid
    sx, sy = grid.interior()
    header = f"{grid.nx} {grid.ny} {grid.dx!r} {grid.dy!r} {grid.x0!r} {grid.y0!r}"

    def dump(name: str, data: np.ndarray) -> None:
        np.savetxt(directory / f"{name}.txt", data[sx, sy].T, header=header, comments="")

    for d, label in enumerate(DIRECTIONS):
        dump(f"cos_bar_{label}", fields.cos_c[d])
        dump(f"sin_bar_{label}", fields.sin_c[d])
        dump(f"v_max_{label}", fields.v_max[d])
        dump(f"rho_max_{label}", fields.rho_max[d])
        dump(f"rho_crit_{label}", fields.rho_crit[d])
        for e, to_label in enumerate(DIRECTIONS):
            dump(f"alpha_{label}{to_label}", fields.alpha[d, e])
            dump(f"beta_{label}{to_label}", fields.beta[d, e])
    dump("length_scale", fields.length_scale)


def write_street_mask(directory: Path, mask: np.ndarray, grid: Grid) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    sx, sy = grid.interior()
    header = f"{grid.nx} {grid.ny} {grid.dx!r} {grid.dy!r} {grid.x0!r} {grid.y0!r}"
    np.savetxt(directory / "street_mask.txt", mask[sx, sy].T, fmt="%d",
               header=header, comments="")


def write_intersection_table(path: Path, params: dict) -> None:
    """Per-intersection NEWS parameter table, one row per direction."""
    rows = ["id dir cos_bar sin_bar v_max rho_max rho_crit L "
            "alpha_N alpha_E alpha_W alpha_S beta_N beta_E beta_W beta_S"]
    for k, p in params.items():
        for d, label in enumerate(DIRECTIONS):
            cells = [k, label,
                     f"{p.cos_bar[d]:.10g}", f"{p.sin_bar[d]:.10g}",
                     f"{p.v_max[d]:.10g}", f"{p.rho_max[d]:.10g}",
                     f"{p.rho_crit[d]:.10g}", f"{p.length_scale:.10g}"]
            cells += [f"{p.alpha[d, e]:.10g}" for e in range(4)]
            cells += [f"{p.beta[d, e]:.10g}" for e in range(4)]
            rows.append(" ".join(cells))
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
