"""2D macroscopic traffic simulation with NEWS partial densities."""

from .network import (Intersection, NetworkFormatError, Street, StreetNetwork,
                      TurningTable, ValidationError, load_network,
                      projection_coeffs, save_network, street_trig)
from .news_params import NewsIntersectionParams, compile_network
from .fundamental_diagram import FdParams, demand, demand_deriv, flux, supply, supply_deriv
from .gridding import Grid, GridFields, grid_from_counts, grid_from_spacing, idw_interpolate
from .schedule import DemandSchedule, load_schedule, minute_of
from .timestep import CflConfig, dt_advection, dt_io, dt_mixing, fit_subcycles, fit_to_output
from .solver import DensityState, RunResult, SimulationError, StepPlan, make_plan, run
from .cli import RunConfig, compare_frames, run_simulation

__version__ = "0.1.0"
