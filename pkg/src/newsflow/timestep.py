"""Time-step restrictions for advection, mixing, and inflow/outflow."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gridding import GridFields, RasterizedSchedule

DEFAULT_EPS = 1e-8


@dataclass(frozen=True)
class CflConfig:
    """CFL numbers and step bounds; ``c_mix`` is only used in strict mode."""

    c_adv: float = 0.5
    c_mix: float | None = 0.57
    c_io: float = 1.0
    dt_cap: float = 60.0
    output_interval: float = 900.0

    def __post_init__(self):
        for name in ("c_adv", "c_io"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1]")
        if self.c_mix is not None and not 0.0 < self.c_mix <= 1.0:
            raise ValueError("c_mix must lie in (0, 1]")
        if self.dt_cap <= 0 or self.output_interval <= 0:
            raise ValueError("dt_cap and output_interval must be positive")


def _updatable(fields: GridFields) -> tuple[slice, slice]:
    g = fields.grid.ghost
    nxt, nyt = fields.grid.shape
    return slice(g, nxt - g), slice(g, nyt - g)


def dt_advection(fields: GridFields, c_adv: float) -> float:
    """CFL bound c_adv * min(dx, dy) / max v_max over all cells and directions."""
    sx, sy = _updatable(fields)
    v = float(fields.v_max[:, sx, sy].max())
    if v <= 0.0:
        raise ValueError("maximum speed is zero; advection step undefined")
    return c_adv * min(fields.grid.dx, fields.grid.dy) / v


def dt_mixing(fields: GridFields, c_mix: float) -> float:
    """Positivity bound for partial densities: c_mix * min(L) * min(1/v_max)."""
    sx, sy = _updatable(fields)
    l_min = float(fields.length_scale[sx, sy].min())
    inv_v_min = float((1.0 / fields.v_max[:, sx, sy]).min())
    return c_mix * l_min * inv_v_min


def dt_io(fields: GridFields, raster: RasterizedSchedule, c_io: float,
          eps: float = DEFAULT_EPS) -> float:
    """Stability/validity bound for the inflow/outflow operator.

    All four restriction terms are evaluated per cell and direction before
    the grid minimum is taken; source and sink terms use their maxima over
    all schedule minutes so the step is time-independent.  Unbounded (inf)
    sink entries impose no restriction of their own.
    """
    sx, sy = _updatable(fields)
    v = fields.v_max[:, sx, sy]
    rho_max = fields.rho_max[:, sx, sy]
    length = fields.length_scale[sx, sy]
    gamma = fields.gamma

    d_src = raster.max_source_fields()[:, sx, sy]
    s_snk = raster.max_sink_fields()[:, sx, sy]
    s_snk = np.where(np.isfinite(s_snk), s_snk, 0.0)

    term_rate = 2.0 / v * min(1.0, (1.0 - gamma) / gamma)
    term_src = rho_max / (d_src + eps)
    term_snk = rho_max / (s_snk + eps)
    term_generic = 1.0 / v
    bound = length * np.minimum(
        np.minimum(term_rate, term_generic), np.minimum(term_src, term_snk))
    return c_io * float(bound.min())


def fit_to_output(dt_candidate: float, output_interval: float,
                  dt_cap: float) -> tuple[float, int]:
    """Shrink a candidate step to an integer divisor of the output interval."""
    if dt_candidate <= 0:
        raise ValueError("candidate time step must be positive")
    dt = min(dt_candidate, dt_cap)
    steps = max(1, math.ceil(output_interval / dt))
    return output_interval / steps, steps


def fit_subcycles(dt_general: float, dt_io_candidate: float) -> tuple[float, int]:
    """Split the general step into K equal io substeps no larger than the candidate."""
    if dt_general <= 0 or dt_io_candidate <= 0:
        raise ValueError("time steps must be positive")
    subcycles = max(1, math.ceil(dt_general / dt_io_candidate))
    return dt_general / subcycles, subcycles
