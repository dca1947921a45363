"""Enlarged Cartesian grid, inverse-distance rasterization, and point sources."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .network import StreetNetwork, ValidationError
from .news_params import NewsIntersectionParams, project_io_demand
from .schedule import DemandSchedule

DEFAULT_MU = 0.02       # 1/m, inverse-distance decay rate
DEFAULT_PAD = 3
DEFAULT_GHOST = 1


@dataclass(frozen=True)
class Grid:
    """Enlarged Cartesian grid: nx x ny interior cells plus a ghost ring.

    The interior (including ``pad`` layers per side) spans
    ``[x0, x0 + nx*dx] x [y0, y0 + ny*dy]``; array indices carry an extra
    ``ghost`` offset per side.
    """

    nx: int
    ny: int
    dx: float
    dy: float
    x0: float
    y0: float
    ghost: int = DEFAULT_GHOST
    pad: int = DEFAULT_PAD

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs at least one interior cell per axis")
        if self.dx <= 0 or self.dy <= 0:
            raise ValueError("grid spacing must be positive")
        if self.ghost < 1:
            raise ValueError("at least one ghost layer is required")
        if self.pad < 0:
            raise ValueError("pad must be nonnegative")

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape (NX, NY) including ghost cells."""
        return (self.nx + 2 * self.ghost, self.ny + 2 * self.ghost)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    def interior(self) -> tuple[slice, slice]:
        """Array slices selecting the non-ghost cells."""
        g = self.ghost
        return (slice(g, g + self.nx), slice(g, g + self.ny))

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Barycenter coordinates of every cell including ghosts, shape (NX,), (NY,)."""
        nx_t, ny_t = self.shape
        i = np.arange(nx_t)
        j = np.arange(ny_t)
        xc = self.x0 + (i - self.ghost + 0.5) * self.dx
        yc = self.y0 + (j - self.ghost + 0.5) * self.dy
        return xc, yc

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        """Array index of the interior cell containing (x, y); half-open cells,
        with points on the domain maximum edge assigned to the last cell."""
        fx = (x - self.x0) / self.dx
        fy = (y - self.y0) / self.dy
        i = int(math.floor(fx))
        j = int(math.floor(fy))
        if i == self.nx and x == self.x0 + self.nx * self.dx:
            i -= 1
        if j == self.ny and y == self.y0 + self.ny * self.dy:
            j -= 1
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise ValidationError(f"point ({x}, {y}) lies outside the enlarged domain")
        return i + self.ghost, j + self.ghost


def _bbox_of(net: StreetNetwork) -> tuple[float, float, float, float]:
    return net.bounding_box


def grid_from_counts(net: StreetNetwork, nx: int, ny: int,
                     pad: int = DEFAULT_PAD, ghost: int = DEFAULT_GHOST) -> Grid:
    """Grid with fixed interior cell counts, spacing derived from the bounding box."""
    xmin, ymin, xmax, ymax = _bbox_of(net)
    core_x, core_y = nx - 2 * pad, ny - 2 * pad
    if pad < 1:
        raise ValueError("pad must be >= 1 so sources stay inside the domain")
    if core_x < 1 or core_y < 1:
        raise ValueError(f"nx={nx}, ny={ny} leave no room inside pad={pad}")
    if xmax <= xmin or ymax <= ymin:
        raise ValueError("degenerate bounding box; choose the grid via spacing instead")
    dx = (xmax - xmin) / core_x
    dy = (ymax - ymin) / core_y
    return Grid(nx, ny, dx, dy, xmin - pad * dx, ymin - pad * dy, ghost, pad)


def grid_from_spacing(net: StreetNetwork, spacing: float,
                      pad: int = DEFAULT_PAD, ghost: int = DEFAULT_GHOST) -> Grid:
    """Grid with a target spacing on both axes, centred on the bounding box."""
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    if pad < 1:
        raise ValueError("pad must be >= 1 so sources stay inside the domain")
    xmin, ymin, xmax, ymax = _bbox_of(net)
    core_x = max(1, math.ceil((xmax - xmin) / spacing))
    core_y = max(1, math.ceil((ymax - ymin) / spacing))
    slack_x = core_x * spacing - (xmax - xmin)
    slack_y = core_y * spacing - (ymax - ymin)
    return Grid(core_x + 2 * pad, core_y + 2 * pad, spacing, spacing,
                xmin - pad * spacing - 0.5 * slack_x,
                ymin - pad * spacing - 0.5 * slack_y,
                ghost, pad)


def idw_weights(points: np.ndarray, qx: np.ndarray, qy: np.ndarray,
                mu: float) -> np.ndarray:
    """Normalized inverse-distance weights, shape (..., K) for K data points.

    Weights are exp(-mu * distance), renormalized; the minimum distance is
    subtracted inside the exponential so remote query points cannot underflow
    every weight to zero.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    dist = np.sqrt((qx[..., None] - points[:, 0]) ** 2
                   + (qy[..., None] - points[:, 1]) ** 2)
    w = np.exp(-mu * (dist - dist.min(axis=-1, keepdims=True)))
    return w / w.sum(axis=-1, keepdims=True)


def idw_interpolate(points: np.ndarray, values: np.ndarray,
                    query: tuple[float, float] | np.ndarray, mu: float):
    """Inverse-distance interpolation of intersection values at query points.

    ``points`` is (K, 2); ``values`` is (K,) or (K, m); ``query`` is a single
    (x, y) pair or an (..., 2) array.
    """
    q = np.asarray(query, dtype=float)
    single = q.ndim == 1
    if single:
        q = q[None, :]
    w = idw_weights(np.asarray(points, dtype=float), q[..., 0], q[..., 1], mu)
    out = w @ np.asarray(values, dtype=float)
    return out[0] if single else out


@dataclass(frozen=True)
class GridFields:
    """Cell- and face-centred parameter rasters on the enlarged grid.

    Direction-indexed arrays run over N, E, W, S on their first axis.  Face
    arrays hold the arithmetic mean of the two adjacent cells: ``cos_fx[d, i, j]``
    lives on the vertical face between cells ``i-1`` and ``i``.
    """

    grid: Grid
    gamma: float
    cos_c: np.ndarray       # (4, NX, NY)
    sin_c: np.ndarray       # (4, NX, NY)
    v_max: np.ndarray       # (4, NX, NY)
    rho_max: np.ndarray     # (4, NX, NY)
    rho_crit: np.ndarray    # (4, NX, NY)
    length_scale: np.ndarray  # (NX, NY)
    alpha: np.ndarray       # (4, 4, NX, NY)
    beta: np.ndarray        # (4, 4, NX, NY)
    cos_fx: np.ndarray = field(default=None)  # (4, NX+1, NY)
    sin_fy: np.ndarray = field(default=None)  # (4, NX, NY+1)

    def __post_init__(self):
        if self.cos_fx is None:
            object.__setattr__(self, "cos_fx", face_average_x(self.cos_c))
        if self.sin_fy is None:
            object.__setattr__(self, "sin_fy", face_average_y(self.sin_c))
        for arr in (self.cos_c, self.sin_c, self.v_max, self.rho_max, self.rho_crit,
                    self.length_scale, self.alpha, self.beta, self.cos_fx, self.sin_fy):
            if not np.all(np.isfinite(arr)):
                raise ValueError("grid fields must be finite everywhere")
            arr.setflags(write=False)
        # upwind splits of the face trig, cached for the solver's inner loop
        object.__setattr__(self, "cos_fx_pos", np.maximum(self.cos_fx, 0.0))
        object.__setattr__(self, "cos_fx_neg", np.minimum(self.cos_fx, 0.0))
        object.__setattr__(self, "sin_fy_pos", np.maximum(self.sin_fy, 0.0))
        object.__setattr__(self, "sin_fy_neg", np.minimum(self.sin_fy, 0.0))


def face_average_x(cell_values: np.ndarray) -> np.ndarray:
    """Arithmetic means at vertical faces; outermost faces copy the edge cell."""
    nx = cell_values.shape[-2]
    out = np.empty(cell_values.shape[:-2] + (nx + 1,) + cell_values.shape[-1:])
    out[..., 1:nx, :] = 0.5 * (cell_values[..., :-1, :] + cell_values[..., 1:, :])
    out[..., 0, :] = cell_values[..., 0, :]
    out[..., nx, :] = cell_values[..., -1, :]
    return out


def face_average_y(cell_values: np.ndarray) -> np.ndarray:
    """Arithmetic means at horizontal faces; outermost faces copy the edge cell."""
    ny = cell_values.shape[-1]
    out = np.empty(cell_values.shape[:-1] + (ny + 1,))
    out[..., 1:ny] = 0.5 * (cell_values[..., :-1] + cell_values[..., 1:])
    out[..., 0] = cell_values[..., 0]
    out[..., ny] = cell_values[..., -1]
    return out


def rasterize_parameters(params: dict[str, NewsIntersectionParams],
                         net: StreetNetwork, grid: Grid,
                         mu: float = DEFAULT_MU,
                         gamma: float = 1.0 / 3.0) -> GridFields:
    """Interpolate every intersection parameter onto all cell barycenters."""
    order = [n.id for n in net.intersections]
    points = np.array([[net.intersection(k).x, net.intersection(k).y] for k in order])
    columns = []
    for k in order:
        p = params[k]
        columns.append(np.concatenate([
            p.cos_bar, p.sin_bar, p.v_max, p.rho_max, p.rho_crit,
            [p.length_scale], p.alpha.ravel(), p.beta.ravel()]))
    table = np.array(columns)          # (K, 53)

    xc, yc = grid.cell_centers()
    qx, qy = np.meshgrid(xc, yc, indexing="ij")
    w = idw_weights(points, qx, qy, mu)          # (NX, NY, K)
    fields = np.einsum("xyk,kf->fxy", w, table)  # (53, NX, NY)

    nxt, nyt = grid.shape
    return GridFields(
        grid=grid,
        gamma=gamma,
        cos_c=fields[0:4],
        sin_c=fields[4:8],
        v_max=fields[8:12],
        rho_max=fields[12:16],
        rho_crit=fields[16:20],
        length_scale=fields[20],
        alpha=fields[21:37].reshape(4, 4, nxt, nyt),
        beta=fields[37:53].reshape(4, 4, nxt, nyt),
    )


def street_mask(net: StreetNetwork, grid: Grid) -> np.ndarray:
    """0/1 raster marking cells crossed by a street segment (plot overlays)."""
    mask = np.zeros(grid.shape)
    step = 0.5 * min(grid.dx, grid.dy)
    for s in net.streets:
        a = net.intersection(s.from_id)
        b = net.intersection(s.to_id)
        samples = max(2, int(math.hypot(b.x - a.x, b.y - a.y) / step) + 2)
        for t in np.linspace(0.0, 1.0, samples):
            i, j = grid.cell_of(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
            mask[i, j] = 1.0
    return mask


@dataclass(frozen=True)
class RasterizedSchedule:
    """Per-minute cardinal io terms located in single grid cells.

    Values are flow densities: the scheduled veh/s of an intersection divided
    by the cell area.  ``source``/``sink`` have shape (n_cells, 4, minutes).
    """

    grid: Grid
    minutes: int
    cells: np.ndarray        # (n_cells, 2) array indices
    source: np.ndarray       # (n_cells, 4, minutes)
    sink: np.ndarray         # (n_cells, 4, minutes)

    def _assemble(self, values: np.ndarray) -> np.ndarray:
        out = np.zeros((4,) + self.grid.shape)
        for (i, j), v in zip(self.cells, values):
            out[:, i, j] += v
        return out

    def source_fields(self, minute: int) -> np.ndarray:
        """Source flow-density raster (4, NX, NY) for one schedule minute."""
        m = min(max(minute, 0), self.minutes - 1)
        return self._assemble(self.source[:, :, m])

    def sink_fields(self, minute: int) -> np.ndarray:
        m = min(max(minute, 0), self.minutes - 1)
        return self._assemble(self.sink[:, :, m])

    def max_source_fields(self) -> np.ndarray:
        """Per-cell maximum of the source terms over all minutes."""
        return self._assemble(self.source.max(axis=2)) if self.minutes else np.zeros((4,) + self.grid.shape)

    def max_sink_fields(self) -> np.ndarray:
        return self._assemble(self.sink.max(axis=2)) if self.minutes else np.zeros((4,) + self.grid.shape)

    def total_scheduled_source(self) -> float:
        """Total scheduled inflow in veh, reconstructed from the rasters."""
        return float(self.source.sum() * self.grid.cell_area * 60.0)


def rasterize_point_sources(schedule: DemandSchedule, net: StreetNetwork,
                            grid: Grid, gamma: float) -> RasterizedSchedule:
    """Assign each intersection's cardinal io series to its containing cell.

    Each series is divided by the cell area, turning veh/s into the
    flow-density unit used by the solver.
    """
    minutes = max(schedule.minutes, 1)
    per_street = schedule.per_street_series(net, gamma)
    cells: list[tuple[int, int]] = []
    source_rows: list[np.ndarray] = []
    sink_rows: list[np.ndarray] = []
    area = grid.cell_area
    for k, (streets_src, src, streets_snk, snk) in per_street.items():
        node = net.intersection(k)
        ij = grid.cell_of(node.x, node.y)
        d_card = project_io_demand(streets_src, src) if len(streets_src) else np.zeros((4, minutes))
        s_card = project_io_demand(streets_snk, snk) if len(streets_snk) else np.zeros((4, minutes))
        cells.append(ij)
        source_rows.append(d_card / area)
        sink_rows.append(s_card / area)
    if not cells:
        return RasterizedSchedule(grid, minutes, np.zeros((0, 2), dtype=int),
                                  np.zeros((0, 4, minutes)), np.zeros((0, 4, minutes)))
    return RasterizedSchedule(grid, minutes, np.array(cells, dtype=int),
                              np.array(source_rows), np.array(sink_rows))
