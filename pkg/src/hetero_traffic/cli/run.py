"""
CLI entry for hetero-traffic.
Purpose: run scenarios on the ring road, sweep linear stability, execute the
property suite, re-plot saved traces and tabulate equilibrium curves.

Exit codes: 0 success, 1 run failure, 2 usage error.
"""

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from hetero_traffic.checks import run_checks, summarize
from hetero_traffic.errors import HeteroTrafficError
from hetero_traffic.integrator.runner import SimulationAborted, run_scenario
from hetero_traffic.logging_config import LEVEL_MAP, configure_logging
from hetero_traffic.model.constitutive import equilibrium_curves
from hetero_traffic.scenario.config import load_defaults, load_scenario, with_snapshots
from hetero_traffic.scenario.outputs import (
    read_trace,
    write_disagreements,
    write_run_outputs,
    write_stability_map,
    write_table,
)
from hetero_traffic.scenario.plots import render_equilibrium_curves, render_plots
from hetero_traffic.stability.analysis import stability_map

LOG = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Argument that only turns out invalid once the scenario is loaded."""


# ======================= Argument types =======================================

def parse_range(text: str) -> np.ndarray:
    """'a:b:n' -> n evenly spaced values from a to b inclusive."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected a:b:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers in a:b:n, got {text!r}") from None
    if n < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"need n >= 1 and b >= a, got {text!r}")
    return np.linspace(lo, hi, n)


def parse_list(text: str) -> List[float]:
    """'1,2.5,3' -> [1.0, 2.5, 3.0]."""
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def parse_times(text: str) -> List[float]:
    """Snapshot instants: comma-separated, finite and non-negative."""
    values = parse_list(text)
    bad = [v for v in values if not (math.isfinite(v) and v >= 0)]
    if bad:
        raise argparse.ArgumentTypeError(f"snapshot times must be finite and >= 0, got {bad[0]:g}")
    return values


# ======================= Commands =============================================

def _run_simulate(config_path: str, out_dir: str, snapshots: Optional[Sequence[float]]) -> int:
    config = load_scenario(config_path)
    if snapshots is not None:
        late = [t for t in snapshots if t > config.time.duration]
        if late:
            raise UsageError(f"--snapshots: {late[0]:g} is beyond the scenario duration {config.time.duration:g}")
        config = with_snapshots(config, snapshots)
    out = Path(out_dir)
    LOG.info("step=simulate config=%s out=%s", config_path, out)
    try:
        trace = run_scenario(config)
    except SimulationAborted as e:
        write_run_outputs(e.trace, out)
        LOG.error("step=simulate action=abort step=%d cell=%s partial_snapshots=%d", e.step, e.cell, len(e.trace.snapshots))
        print(f"Run aborted at step {e.step} (cell {e.cell}); partial outputs in {out}", file=sys.stderr)
        return EXIT_FAILURE
    written = write_run_outputs(trace, out)
    if "svg" in config.output.formats:
        written += render_plots(trace, out / "plots")
    print(f"Wrote {len(written)} files to {out}")
    return EXIT_OK


def _run_stability(
    config_path: str, deltas: np.ndarray, rhos: np.ndarray, k_grid: Optional[Sequence[float]], out: Optional[str]
) -> int:
    config = load_scenario(config_path)
    ks = list(k_grid) if k_grid else list(load_defaults().k_grid)
    result = stability_map(list(deltas), list(rhos), ks, config.classes, config.road.width)
    if out:
        path = Path(out)
        write_stability_map(result, path)
        if len(result.disagreements):
            extra = write_disagreements(result, path.with_name(f"{path.stem}_disagreements.csv"))
            print(f"{len(result.disagreements)} closed-form/growth-rate disagreements listed in {extra}")
        print(f"Wrote stability map ({len(result.table)} rows) to {path}")
    else:
        write_stability_map(result, sys.stdout)
    return EXIT_OK


def _run_check(config_path: str, trials: Optional[int], seed: Optional[int]) -> int:
    config = load_scenario(config_path)
    defaults = load_defaults()
    report = run_checks(
        config,
        trials=trials if trials is not None else defaults.trials,
        seed=seed if seed is not None else defaults.seed,
    )
    print(summarize(report))
    return EXIT_OK if report.passed else EXIT_FAILURE


def _run_plot(trace_path: str, out_dir: str) -> int:
    trace = read_trace(trace_path)
    written = render_plots(trace, out_dir)
    print(f"Wrote {len(written)} plots to {out_dir}")
    return EXIT_OK


def _run_diagram(config_path: str, out_dir: str, deltas: Sequence[float], points: int) -> int:
    config = load_scenario(config_path)
    table = equilibrium_curves(np.linspace(0.0, 1.0, points), deltas, config.classes, config.road.width)
    out = Path(out_dir)
    written = [write_table(table, out / "equilibrium_curves.csv")]
    written += render_equilibrium_curves(table, out)
    print(f"Wrote {len(written)} files to {out}")
    return EXIT_OK


# ======================= Parser & dispatch ====================================

def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--log-level",
        choices=list(LEVEL_MAP.keys()),
        default="WARNING",
        help="Set logging level (default: WARNING).",
    )
    p.add_argument("--log-file", default=None, help="Also write log records to this file")


def get_parser() -> argparse.ArgumentParser:
    """
    Build the argparse parser with subcommands:
      - simulate, stability, check, plot, diagram
    """
    parser = argparse.ArgumentParser(
        prog="hetero-traffic", description="Two-class (motorcycle/car) traffic on a ring road"
    )
    subs = parser.add_subparsers(dest="command")

    p_sim = subs.add_parser("simulate", help="Run a scenario and write CSV, trace and SVG outputs")
    _add_common_flags(p_sim)
    p_sim.add_argument("--config", required=True, help="Scenario JSON file")
    p_sim.add_argument("--out", required=True, help="Output directory")
    p_sim.add_argument("--snapshots", type=parse_times, default=None, help="Override snapshot times, e.g. 0,1,20")

    p_stab = subs.add_parser("stability", help="Sweep the linear stability map over (delta, rho0, k)")
    _add_common_flags(p_stab)
    p_stab.add_argument("--config", required=True, help="Scenario JSON file (vehicle classes and road width)")
    p_stab.add_argument("--delta", type=parse_range, required=True, help="Motorcycle share grid a:b:n")
    p_stab.add_argument("--rho", type=parse_range, required=True, help="Base total density grid a:b:n")
    p_stab.add_argument("--k", type=parse_list, default=None, help="Wavenumbers (1/m), comma separated")
    p_stab.add_argument("--out", default=None, help="CSV destination (default: stdout)")

    p_check = subs.add_parser("check", help="Run the solver and stability property suite")
    _add_common_flags(p_check)
    p_check.add_argument("--config", required=True, help="Scenario JSON file")
    p_check.add_argument("--trials", type=int, default=None, help="Random state pairs for the Roe checks")
    p_check.add_argument("--seed", type=int, default=None, help="Random seed")

    p_plot = subs.add_parser("plot", help="Render SVG plots from a saved trace")
    _add_common_flags(p_plot)
    p_plot.add_argument("--trace", required=True, help="trace.ndjson written by simulate")
    p_plot.add_argument("--out", required=True, help="Output directory")

    p_diag = subs.add_parser("diagram", help="Tabulate and plot equilibrium speed/flow against density")
    _add_common_flags(p_diag)
    p_diag.add_argument("--config", required=True, help="Scenario JSON file (vehicle classes and road width)")
    p_diag.add_argument("--out", required=True, help="Output directory")
    p_diag.add_argument("--delta", type=parse_list, default=[0.1, 0.3, 0.5, 0.7, 0.9], help="Motorcycle shares")
    p_diag.add_argument("--points", type=int, default=201, help="Density samples on [0, 1]")

    return parser


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "simulate":
        return _run_simulate(args.config, args.out, args.snapshots)
    if args.command == "stability":
        return _run_stability(args.config, args.delta, args.rho, args.k, args.out)
    if args.command == "check":
        return _run_check(args.config, args.trials, args.seed)
    if args.command == "plot":
        return _run_plot(args.trace, args.out)
    return _run_diagram(args.config, args.out, args.delta, args.points)


def main(argv: Optional[List[str]] = None) -> None:
    """
    Entry: parse, configure logging early, dispatch, exit with the command's code.
    """
    parser = get_parser()
    args = parser.parse_args(list(sys.argv[1:] if argv is None else argv))
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        sys.exit(EXIT_USAGE)

    configure_logging(args.log_level, log_file=args.log_file)
    LOG.debug("CLI args parsed: %s", vars(args))

    try:
        exit_code = _dispatch(args)
    except UsageError as e:
        parser.error(str(e))
    except (HeteroTrafficError, OSError) as e:
        LOG.error("command=%s error=%s", args.command, e)
        print(f"error: {e}", file=sys.stderr)
        sys.exit(EXIT_FAILURE)
    except Exception as e:
        LOG.exception("Unhandled exception in CLI: %s", e)
        sys.exit(EXIT_FAILURE)

    sys.exit(exit_code)


if __name__ == "__main__":
    main()
