"""Finite-volume NEWS update: upwind advection with demand/supply face fluxes,
cardinal-direction mixing, and inflow/outflow, in unsplit and subcycled-split
variants with a homogeneous-Dirichlet ghost ring."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .fundamental_diagram import FdParams, demand, supply
from .gridding import GridFields, RasterizedSchedule
from .news_params import DIRECTIONS
from .schedule import minute_of
from . import timestep

logger = logging.getLogger(__name__)


class SimulationError(RuntimeError):
    """A positivity or boundedness audit failed; the computation is invalid."""


@dataclass
class DensityState:
    """Four partial 2d-density fields (N, E, W, S) on the enlarged grid."""

    rho: np.ndarray          # (4, NX, NY), ghost ring pinned to zero
    t: float = 0.0

    @classmethod
    def empty(cls, grid) -> "DensityState":
        return cls(np.zeros((4,) + grid.shape), 0.0)


@dataclass(frozen=True)
class StepPlan:
    """Frozen time-stepping layout of one run."""

    dt_general: float
    dt_io: float
    subcycles: int
    steps_per_output: int
    output_interval: float
    mode: str                 # "strict" | "non-strict"
    scheme: str               # "split" | "unsplit"
    binding: str              # name of the restriction that set dt_general
    candidates: dict[str, float] = field(default_factory=dict)


def make_plan(fields: GridFields, raster: RasterizedSchedule,
              cfl: timestep.CflConfig, mode: str, scheme: str,
              eps: float = timestep.DEFAULT_EPS) -> StepPlan:
    """Combine the three restrictions into a concrete stepping plan.

    The split scheme bounds the general step by advection (plus mixing in
    strict mode) and subcycles the io operator; the unsplit scheme enforces
    all three restrictions on its single step.
    """
    if mode not in ("strict", "non-strict"):
        raise ValueError(f"unknown positivity mode {mode!r}")
    if scheme not in ("split", "unsplit"):
        raise ValueError(f"unknown scheme {scheme!r}")

    cand = {"advection": timestep.dt_advection(fields, cfl.c_adv)}
    need_mix = mode == "strict" or scheme == "unsplit"
    if cfl.c_mix is not None:
        cand["mixing"] = timestep.dt_mixing(fields, cfl.c_mix)
    elif need_mix:
        raise ValueError("strict mode and the unsplit scheme require c_mix")
    cand["io"] = timestep.dt_io(fields, raster, cfl.c_io, eps)

    if scheme == "unsplit":
        enforced = ("advection", "mixing", "io")
    elif mode == "strict":
        enforced = ("advection", "mixing")
    else:
        enforced = ("advection",)
    dt_bound = min(cand[name] for name in enforced)
    binding = min(enforced, key=lambda name: cand[name])
    if cfl.dt_cap < dt_bound:
        binding = "cap"
    dt_general, steps = timestep.fit_to_output(dt_bound, cfl.output_interval, cfl.dt_cap)

    if scheme == "split":
        dt_io_step, subcycles = timestep.fit_subcycles(dt_general, cand["io"])
    else:
        dt_io_step, subcycles = dt_general, 1
    return StepPlan(dt_general, dt_io_step, subcycles, steps, cfl.output_interval,
                    mode, scheme, binding, cand)


def _fd_of(fields: GridFields) -> FdParams:
    fd = getattr(fields, "_fd_cache", None)
    if fd is None:
        fd = FdParams(fields.v_max, fields.rho_max, fields.gamma)
        object.__setattr__(fields, "_fd_cache", fd)
    return fd


def cell_demand_supply(rho: np.ndarray, fields: GridFields) -> tuple[np.ndarray, np.ndarray]:
    """Demand and supply per cardinal direction with cell-local parameters."""
    fd = _fd_of(fields)
    return demand(rho, fd), supply(rho, fd)


@dataclass(frozen=True)
class FaceFluxes:
    """Right/leftgoing Godunov fluxes on vertical (x) and horizontal (y) faces."""

    x_right: np.ndarray   # (4, NX+1, NY), face i sits between cells i-1 and i
    x_left: np.ndarray
    y_right: np.ndarray   # (4, NX, NY+1)
    y_left: np.ndarray


def face_fluxes(d: np.ndarray, s: np.ndarray) -> FaceFluxes:
    """min(demand upwind, supply downwind) on every interior face."""
    n_dir, nxt, nyt = d.shape
    xr = np.zeros((n_dir, nxt + 1, nyt))
    xl = np.zeros((n_dir, nxt + 1, nyt))
    xr[:, 1:nxt, :] = np.minimum(d[:, :-1, :], s[:, 1:, :])
    xl[:, 1:nxt, :] = np.minimum(d[:, 1:, :], s[:, :-1, :])
    yr = np.zeros((n_dir, nxt, nyt + 1))
    yl = np.zeros((n_dir, nxt, nyt + 1))
    yr[:, :, 1:nyt] = np.minimum(d[:, :, :-1], s[:, :, 1:])
    yl[:, :, 1:nyt] = np.minimum(d[:, :, 1:], s[:, :, :-1])
    return FaceFluxes(xr, xl, yr, yl)


def advective_update(ff: FaceFluxes, fields: GridFields,
                     closed_boundary: bool = False) -> np.ndarray:
    """Upwind flux divergence per cell from the face fluxes and face trig terms.

    ``closed_boundary`` zeroes the fluxes on the rim of the updatable region,
    which disables the ghost-ring absorption (test support only).
    """
    grid = fields.grid
    a_x = fields.cos_fx_pos * ff.x_right + fields.cos_fx_neg * ff.x_left
    a_y = fields.sin_fy_pos * ff.y_right + fields.sin_fy_neg * ff.y_left
    if closed_boundary:
        g = grid.ghost
        nxt, nyt = grid.shape
        a_x[:, g, :] = 0.0
        a_x[:, nxt - g, :] = 0.0
        a_y[:, :, g] = 0.0
        a_y[:, :, nyt - g] = 0.0
    return (-(a_x[:, 1:, :] - a_x[:, :-1, :]) / grid.dx
            - (a_y[:, :, 1:] - a_y[:, :, :-1]) / grid.dy)


def mixing_update(d: np.ndarray, s: np.ndarray, fields: GridFields) -> np.ndarray:
    """Net turning flux between the cardinal directions, scaled by 1/L.

    The sixteen pairwise fluxes cancel in the directional sum, so mixing
    conserves the per-cell total density exactly.
    """
    transfer = np.minimum(fields.alpha * d[:, None, :, :],
                          fields.beta * s[None, :, :, :])
    inflow = transfer.sum(axis=0)
    outflow = transfer.sum(axis=1)
    return (inflow - outflow) / fields.length_scale


def io_update(d: np.ndarray, s: np.ndarray, src: np.ndarray, snk: np.ndarray,
              fields: GridFields) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Supply-limited source and demand-limited sink fluxes, scaled by 1/L.

    Returns (io term, applied source flux, applied sink flux)."""
    phi_src = np.minimum(src, s)
    phi_snk = np.minimum(d, snk)
    return (phi_src - phi_snk) / fields.length_scale, phi_src, phi_snk


@dataclass
class StepStats:
    """Bookkeeping of one step: applied io mass and operator evaluations."""

    injected: float = 0.0            # vehicles added by sources
    sunk: float = 0.0                # vehicles removed by sinks
    boundary_outflow: float = 0.0    # vehicles advected across the domain rim
    ds_evals: int = 0                # cell demand/supply sweeps
    adv_evals: int = 0
    mix_evals: int = 0
    io_evals: int = 0


def _updatable(fields: GridFields) -> tuple[slice, slice]:
    g = fields.grid.ghost
    nxt, nyt = fields.grid.shape
    return slice(g, nxt - g), slice(g, nyt - g)


def step_unsplit(state: DensityState, fields: GridFields,
                 raster: RasterizedSchedule, plan: StepPlan,
                 closed_boundary: bool = False) -> tuple[DensityState, StepStats]:
    """One forward-Euler step applying advection, mixing, and io together."""
    dt = plan.dt_general
    area = fields.grid.cell_area
    sx, sy = _updatable(fields)
    stats = StepStats()

    d, s = cell_demand_supply(state.rho, fields)
    stats.ds_evals += 1
    adv = advective_update(face_fluxes(d, s), fields, closed_boundary)
    mix = mixing_update(d, s, fields)
    minute = minute_of(state.t, raster.minutes)
    io, phi_src, phi_snk = io_update(d, s, raster.source_fields(minute),
                                     raster.sink_fields(minute), fields)
    stats.adv_evals, stats.mix_evals, stats.io_evals = 1, 1, 1

    length = fields.length_scale[sx, sy]
    stats.injected = dt * area * float((phi_src[:, sx, sy] / length).sum())
    stats.sunk = dt * area * float((phi_snk[:, sx, sy] / length).sum())
    stats.boundary_outflow = -dt * area * float(adv[:, sx, sy].sum())

    rho_new = state.rho.copy()
    rho_new[:, sx, sy] += dt * (adv + mix + io)[:, sx, sy]
    return DensityState(rho_new, state.t + dt), stats


def step_split(state: DensityState, fields: GridFields,
               raster: RasterizedSchedule, plan: StepPlan,
               closed_boundary: bool = False) -> tuple[DensityState, StepStats]:
    """Advection and mixing once with the general step, then K io subcycles.

    Demand and supply are recomputed from the evolving substate before every
    subcycle (predictor-corrector form)."""
    dt = plan.dt_general
    area = fields.grid.cell_area
    sx, sy = _updatable(fields)
    stats = StepStats()
    length = fields.length_scale[sx, sy]

    d, s = cell_demand_supply(state.rho, fields)
    stats.ds_evals += 1
    adv = advective_update(face_fluxes(d, s), fields, closed_boundary)
    mix = mixing_update(d, s, fields)
    stats.adv_evals, stats.mix_evals = 1, 1
    stats.boundary_outflow = -dt * area * float(adv[:, sx, sy].sum())

    rho_sub = state.rho.copy()
    rho_sub[:, sx, sy] += dt * (adv + mix)[:, sx, sy]
    for k in range(plan.subcycles):
        d_sub, s_sub = cell_demand_supply(rho_sub, fields)
        stats.ds_evals += 1
        minute = minute_of(state.t + k * plan.dt_io, raster.minutes)
        io, phi_src, phi_snk = io_update(d_sub, s_sub, raster.source_fields(minute),
                                         raster.sink_fields(minute), fields)
        stats.io_evals += 1
        stats.injected += plan.dt_io * area * float((phi_src[:, sx, sy] / length).sum())
        stats.sunk += plan.dt_io * area * float((phi_snk[:, sx, sy] / length).sum())
        rho_sub[:, sx, sy] += plan.dt_io * io[:, sx, sy]
    return DensityState(rho_sub, state.t + dt), stats


@dataclass
class AuditStats:
    min_partial: float = np.inf
    min_sum: float = np.inf
    max_sum: float = -np.inf
    max_sum_to_bound: float = -np.inf   # max over cells of sum/rho_max
    clamped_cells: int = 0


def audit_state(state: DensityState, fields: GridFields, mode: str,
                stats: AuditStats, policy: str = "abort",
                cell_totals: np.ndarray | None = None) -> bool:
    """Check positivity/boundedness after a step; abort or clamp on violation.

    Non-strict mode bounds the summed density per cell by [0, rho_max];
    strict mode additionally requires every partial density to be
    nonnegative.  ``policy="clamp"`` downgrades failures to clamping with a
    warning (exploratory use; not the published failure behaviour).
    Returns True when the state was clamped.
    """
    sx, sy = _updatable(fields)
    rho = state.rho[:, sx, sy]
    total = cell_totals if cell_totals is not None else rho.sum(axis=0)
    bound = fields.rho_max[:, sx, sy].max(axis=0)

    rho_min = float(rho.min())
    total_min = float(total.min())
    stats.min_partial = min(stats.min_partial, rho_min)
    stats.min_sum = min(stats.min_sum, total_min)
    stats.max_sum = max(stats.max_sum, float(total.max()))
    stats.max_sum_to_bound = max(stats.max_sum_to_bound, float((total / bound).max()))

    problems = []
    if mode == "strict" and rho_min < 0.0:
        d, i, j = np.unravel_index(int(rho.argmin()), rho.shape)
        problems.append(f"partial density {DIRECTIONS[d]} < 0 at cell "
                        f"({i}, {j}): {rho[d, i, j]:.3e}")
    if total_min < 0.0:
        i, j = np.unravel_index(int(total.argmin()), total.shape)
        problems.append(f"summed density < 0 at cell ({i}, {j}): {total[i, j]:.3e}")
    over = total - bound
    if float(over.max()) > 0.0:
        i, j = np.unravel_index(int(over.argmax()), over.shape)
        problems.append(f"summed density exceeds rho_max at cell ({i}, {j}): "
                        f"{total[i, j]:.6e} > {bound[i, j]:.6e}")
    if not problems:
        return False
    message = f"t = {state.t:.3f} s: " + "; ".join(problems)
    if policy == "abort":
        raise SimulationError(message)
    logger.warning("clamping after bound violation: %s", message)
    clamped = np.maximum(rho, 0.0)
    total = clamped.sum(axis=0)
    scale = np.where(total > bound, bound / np.maximum(total, 1e-300), 1.0)
    stats.clamped_cells += int((scale < 1.0).sum()) + int((rho < 0.0).any(axis=0).sum())
    state.rho[:, sx, sy] = clamped * scale
    return True


@dataclass
class RunResult:
    plan: StepPlan
    state: DensityState
    budget: np.ndarray                 # rows: t, total, injected, sunk, boundary (cumulative)
    audit: AuditStats
    eval_counts: dict[str, int]
    wall_time: float
    n_steps: int

    @property
    def total_vehicles(self) -> float:
        return float(self.budget[-1, 1])

    def summary(self) -> dict[str, object]:
        c = self.eval_counts
        out = {
            "scheme": self.plan.scheme,
            "mode": self.plan.mode,
            "dt_general": self.plan.dt_general,
            "dt_io": self.plan.dt_io,
            "subcycles": self.plan.subcycles,
            "steps_per_output": self.plan.steps_per_output,
            "output_interval": self.plan.output_interval,
            "binding_restriction": self.plan.binding,
            "n_steps": self.n_steps,
            "wall_time_s": self.wall_time,
            "min_partial_density": self.audit.min_partial,
            "min_summed_density": self.audit.min_sum,
            "max_summed_density": self.audit.max_sum,
            "max_sum_to_bound_ratio": self.audit.max_sum_to_bound,
            "clamped_cells": self.audit.clamped_cells,
            "demand_supply_evals": c["ds"],
            "rhs_evals_advection": c["adv"],
            "rhs_evals_mixing": c["mix"],
            "rhs_evals_io": c["io"],
            "rhs_evals_total": c["adv"] + c["mix"] + c["io"],
            "total_vehicles_final": self.budget[-1, 1],
            "cumulative_injected": self.budget[-1, 2],
            "cumulative_sunk": self.budget[-1, 3],
            "cumulative_boundary_outflow": self.budget[-1, 4],
        }
        for name, value in self.plan.candidates.items():
            out[f"dt_candidate_{name}"] = value
        return out


def run(fields: GridFields, raster: RasterizedSchedule, plan: StepPlan,
        horizon: float, on_frame=None, violation_policy: str = "abort",
        closed_boundary: bool = False) -> RunResult:
    """Advance an empty network from t = 0 over the horizon with constant steps.

    ``on_frame(state, index)`` is invoked at t = 0 and at every output time.
    Raises :exc:`SimulationError` when an audit fails under the abort policy;
    frames already emitted stay on disk.
    """
    interval = plan.output_interval
    n_blocks = round(horizon / interval)
    if abs(n_blocks * interval - horizon) > 1e-9 * max(horizon, 1.0):
        raise ValueError("horizon must be an integer multiple of the output interval")
    if horizon > raster.minutes * 60.0:
        logger.info("horizon %.0f s extends beyond the schedule (%d min); "
                    "the last scheduled minute is held", horizon, raster.minutes)

    step_fn = step_split if plan.scheme == "split" else step_unsplit
    sx, sy = _updatable(fields)
    area = fields.grid.cell_area
    state = DensityState.empty(fields.grid)
    audit = AuditStats()
    counts = {"ds": 0, "adv": 0, "mix": 0, "io": 0}
    injected = sunk = boundary = 0.0
    budget_rows = [(0.0, 0.0, 0.0, 0.0, 0.0)]
    started = time.perf_counter()

    if on_frame is not None:
        on_frame(state, 0)
    step_index = 0
    for block in range(n_blocks):
        for _ in range(plan.steps_per_output):
            state, stats = step_fn(state, fields, raster, plan,
                                   closed_boundary=closed_boundary)
            step_index += 1
            state.t = step_index * plan.dt_general
            counts["ds"] += stats.ds_evals
            counts["adv"] += stats.adv_evals
            counts["mix"] += stats.mix_evals
            counts["io"] += stats.io_evals
            injected += stats.injected
            sunk += stats.sunk
            boundary += stats.boundary_outflow
            cell_totals = state.rho[:, sx, sy].sum(axis=0)
            clamped = audit_state(state, fields, plan.mode, audit, violation_policy,
                                  cell_totals=cell_totals)
            if clamped:
                cell_totals = state.rho[:, sx, sy].sum(axis=0)
            budget_rows.append((state.t, float(cell_totals.sum()) * area,
                                injected, sunk, boundary))
        state.t = (block + 1) * interval
        if on_frame is not None:
            on_frame(state, block + 1)

    return RunResult(plan, state, np.array(budget_rows), audit, counts,
                     time.perf_counter() - started, step_index)
