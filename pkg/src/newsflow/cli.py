"""Command-line entry points: simulate, compare, params.

Exit codes: 0 success, 2 configuration error, 3 input validation error,
4 simulation failure (positivity/boundedness audit).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import gridding, news_params, output, solver, timestep
from .network import NetworkFormatError, ValidationError, load_network
from .schedule import DemandSchedule, load_schedule

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_SIMULATION = 4


@dataclass(frozen=True)
class RunConfig:
    network: Path
    schedule: Path | None
    outdir: Path
    horizon: float
    nx: int | None = None
    ny: int | None = None
    spacing: float | None = None
    pad: int = gridding.DEFAULT_PAD
    ghost: int = gridding.DEFAULT_GHOST
    mode: str = "non-strict"
    scheme: str = "split"
    gamma: float = 1.0 / 3.0
    mu: float = gridding.DEFAULT_MU
    eps: float = timestep.DEFAULT_EPS
    c_adv: float = 0.5
    c_mix: float | None = 0.57
    c_io: float = 1.0
    dt_cap: float = 60.0
    output_interval: float = 900.0
    on_violation: str = "abort"
    closed_boundary: bool = False

    def cfl(self) -> timestep.CflConfig:
        return timestep.CflConfig(self.c_adv, self.c_mix, self.c_io,
                                  self.dt_cap, self.output_interval)


_BOOL_KEYS = {"closed_boundary"}
_INT_KEYS = {"nx", "ny", "pad", "ghost"}
_FLOAT_KEYS = {"horizon", "spacing", "gamma", "mu", "eps", "c_adv", "c_io",
               "dt_cap", "output_interval"}
_PATH_KEYS = {"network", "schedule", "outdir"}
_STR_KEYS = {"mode", "scheme", "on_violation"}


def parse_config_text(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


def build_run_config(values: dict[str, str], base_dir: Path) -> RunConfig:
    kwargs: dict[str, object] = {}
    for key, value in values.items():
        if key in _PATH_KEYS:
            kwargs[key] = None if value.lower() == "none" else (base_dir / value).resolve() \
                if not Path(value).is_absolute() else Path(value)
        elif key in _INT_KEYS:
            kwargs[key] = int(value)
        elif key in _FLOAT_KEYS:
            kwargs[key] = float(value)
        elif key in _BOOL_KEYS:
            kwargs[key] = value.lower() in ("1", "true", "yes")
        elif key == "c_mix":
            kwargs[key] = None if value.lower() == "none" else float(value)
        elif key in _STR_KEYS:
            kwargs[key] = value
        else:
            raise ValueError(f"unknown config key {key!r}")
    for required in ("network", "horizon", "outdir"):
        if required not in kwargs:
            raise ValueError(f"config key {required!r} is required")
    config = RunConfig(**kwargs)   # type: ignore[arg-type]
    if config.mode not in ("strict", "non-strict"):
        raise ValueError("mode must be strict or non-strict")
    if config.scheme not in ("split", "unsplit"):
        raise ValueError("scheme must be split or unsplit")
    if config.on_violation not in ("abort", "clamp"):
        raise ValueError("on_violation must be abort or clamp")
    if (config.nx is None) != (config.ny is None):
        raise ValueError("nx and ny must be given together")
    if config.nx is None and config.spacing is None:
        raise ValueError("either nx/ny or spacing must be given")
    if config.horizon <= 0:
        raise ValueError("horizon must be positive")
    ratio = config.horizon / config.output_interval
    if abs(ratio - round(ratio)) > 1e-9:
        raise ValueError("horizon must be a multiple of the output interval")
    if not config.network.exists():
        raise ValueError(f"network file not found: {config.network}")
    if config.schedule is not None and not config.schedule.exists():
        raise ValueError(f"schedule file not found: {config.schedule}")
    return config


def _make_grid(config: RunConfig, net) -> gridding.Grid:
    if config.nx is not None:
        return gridding.grid_from_counts(net, config.nx, config.ny,
                                         config.pad, config.ghost)
    return gridding.grid_from_spacing(net, config.spacing, config.pad, config.ghost)


def prepare(config: RunConfig):
    """Load inputs and rasterize everything a run needs."""
    net = load_network(config.network)
    if config.schedule is not None:
        schedule = load_schedule(config.schedule, net)
    else:
        schedule = DemandSchedule(1, {}, {})
    params = news_params.compile_network(net, config.gamma)
    grid = _make_grid(config, net)
    fields = gridding.rasterize_parameters(params, net, grid, config.mu, config.gamma)
    raster = gridding.rasterize_point_sources(schedule, net, grid, config.gamma)
    return net, schedule, params, grid, fields, raster


def run_simulation(config: RunConfig) -> solver.RunResult:
    """Library entry point behind the ``simulate`` subcommand."""
    net, schedule, params, grid, fields, raster = prepare(config)
    plan = solver.make_plan(fields, raster, config.cfl(), config.mode,
                            config.scheme, config.eps)
    frames_dir = config.outdir / "frames"

    def on_frame(state, index):
        output.write_frame(frames_dir, index, state, grid)

    result = solver.run(fields, raster, plan, config.horizon, on_frame,
                        config.on_violation, config.closed_boundary)
    summary = result.summary()
    summary["network"] = str(config.network)
    summary["schedule"] = str(config.schedule) if config.schedule else "none"
    summary["nx"], summary["ny"] = grid.nx, grid.ny
    summary["dx"], summary["dy"] = grid.dx, grid.dy
    summary["pad"], summary["ghost"] = grid.pad, grid.ghost
    summary["gamma"], summary["mu"], summary["eps"] = config.gamma, config.mu, config.eps
    output.write_summary(config.outdir / "summary.txt", summary)
    output.write_budget(config.outdir / "budget.txt", result.budget)
    return result


def compare_frames(dir_a: Path, dir_b: Path, out: Path | None = None) -> dict[str, float]:
    """L1/Linf/relative differences between two frame directories."""
    names_a = sorted(p.name for p in dir_a.glob("frame_*.txt"))
    names_b = sorted(p.name for p in dir_b.glob("frame_*.txt"))
    if not names_a:
        raise ValueError(f"no frames found in {dir_a}")
    if names_a != names_b:
        raise ValueError("frame sets differ between the two directories")
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    report_lines = ["frame l1 linf max_abs_a"]
    max_diff = 0.0
    max_a = 0.0
    for name in names_a:
        t_a, spacing_a, a = output.read_frame(dir_a / name)
        t_b, spacing_b, b = output.read_frame(dir_b / name)
        if a.shape != b.shape:
            raise ValueError(f"{name}: raster shapes differ {a.shape} vs {b.shape}")
        if not np.allclose(spacing_a, spacing_b, rtol=1e-12):
            raise ValueError(f"{name}: grid spacings differ {spacing_a} vs {spacing_b}")
        if abs(t_a - t_b) > 1e-9 * max(1.0, abs(t_a)):
            raise ValueError(f"{name}: frame times differ ({t_a} vs {t_b})")
        diff = a - b
        l1 = float(np.abs(diff).sum())
        linf = float(np.abs(diff).max())
        max_diff = max(max_diff, linf)
        max_a = max(max_a, float(np.abs(a).max()))
        report_lines.append(f"{name} {l1:.10e} {linf:.10e} {float(np.abs(a).max()):.10e}")
        if out is not None:
            header = f"{t_a!r} {a.shape[0]} {a.shape[1]} diff"
            np.savetxt(out / f"diff_{name}", diff.T, header=header, comments="")

    ratio = max_diff / max_a if max_a > 0 else 0.0
    report = {"max_abs_diff": max_diff, "max_abs_reference": max_a,
              "relative_magnitude": ratio}
    report_lines.append(f"# max_abs_diff = {max_diff:.10e}")
    report_lines.append(f"# max_abs_reference = {max_a:.10e}")
    report_lines.append(f"# relative_magnitude = {ratio:.10e}")
    if out is not None:
        (out / "report.txt").write_text("\n".join(report_lines) + "\n", encoding="utf-8")
    return report


def _cmd_simulate(args: argparse.Namespace) -> int:
    values: dict[str, str] = {}
    base_dir = Path.cwd()
    if args.config:
        config_path = Path(args.config)
        if not config_path.exists():
            print(f"config file not found: {config_path}", file=sys.stderr)
            return EXIT_CONFIG
        values.update(parse_config_text(config_path.read_text(encoding="utf-8")))
        base_dir = config_path.parent.resolve()
    for item in args.set or []:
        if "=" not in item:
            print(f"--set expects key=value, got {item!r}", file=sys.stderr)
            return EXIT_CONFIG
        key, value = (part.strip() for part in item.split("=", 1))
        if key in _PATH_KEYS and value.lower() != "none" and not Path(value).is_absolute():
            value = str((Path.cwd() / value).resolve())   # overrides are cwd-relative
        values[key] = value
    try:
        config = build_run_config(values, base_dir)
    except (ValueError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_simulation(config)
    except (NetworkFormatError, ValidationError) as exc:
        print(f"input validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except solver.SimulationError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    print(f"completed {result.n_steps} steps "
          f"(dt = {result.plan.dt_general:.6g} s, io subcycles = {result.plan.subcycles}); "
          f"outputs in {config.outdir}")
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    try:
        report = compare_frames(Path(args.dir_a), Path(args.dir_b),
                                Path(args.out) if args.out else None)
    except (ValueError, OSError) as exc:
        print(f"compare failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    for key, value in report.items():
        print(f"{key} = {value:.10e}")
    return EXIT_OK


def _cmd_params(args: argparse.Namespace) -> int:
    try:
        net = load_network(args.network)
        params = news_params.compile_network(net, args.gamma)
    except (NetworkFormatError, ValidationError) as exc:
        print(f"input validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    output.write_intersection_table(out / "intersection_params.txt", params)
    if args.nx or args.spacing:
        try:
            if args.nx:
                grid = gridding.grid_from_counts(net, args.nx, args.ny,
                                                 args.pad, args.ghost)
            else:
                grid = gridding.grid_from_spacing(net, args.spacing,
                                                  args.pad, args.ghost)
        except ValueError as exc:
            print(f"configuration error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        fields = gridding.rasterize_parameters(params, net, grid, args.mu, args.gamma)
        output.write_field_dumps(out / "fields", fields)
        output.write_street_mask(out / "fields", gridding.street_mask(net, grid), grid)
    print(f"parameter dump written to {out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="newsflow",
        description="2D macroscopic traffic simulation with NEWS partial densities.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario from a config file")
    p_sim.add_argument("--config", help="key = value configuration file")
    p_sim.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override any config key (repeatable)")
    p_sim.set_defaults(func=_cmd_simulate)

    p_cmp = sub.add_parser("compare", help="difference report between two frame sets")
    p_cmp.add_argument("dir_a")
    p_cmp.add_argument("dir_b")
    p_cmp.add_argument("--out", help="directory for difference rasters and report")
    p_cmp.set_defaults(func=_cmd_compare)

    p_par = sub.add_parser("params", help="dump compiled intersection parameters")
    p_par.add_argument("--network", required=True)
    p_par.add_argument("--out", required=True)
    p_par.add_argument("--gamma", type=float, default=1.0 / 3.0)
    p_par.add_argument("--mu", type=float, default=gridding.DEFAULT_MU)
    p_par.add_argument("--nx", type=int)
    p_par.add_argument("--ny", type=int)
    p_par.add_argument("--spacing", type=float)
    p_par.add_argument("--pad", type=int, default=gridding.DEFAULT_PAD)
    p_par.add_argument("--ghost", type=int, default=gridding.DEFAULT_GHOST)
    p_par.set_defaults(func=_cmd_params)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
