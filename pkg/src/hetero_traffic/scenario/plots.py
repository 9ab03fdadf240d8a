"""
SVG figures for a run: density and velocity profiles per snapshot plus
space-time heatmaps of each class quantity, and equilibrium curve figures.
"""

from __future__ import annotations
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from hetero_traffic.errors import NoDataError  # noqa: E402
from hetero_traffic.integrator.runner import SimulationTrace  # noqa: E402
from hetero_traffic.scenario.outputs import format_float  # noqa: E402

log = logging.getLogger(__name__)

# text stays text and nothing is linked externally
SVG_RC = {
    "svg.fonttype": "none",
    "svg.hashsalt": "hetero-traffic",
    "figure.figsize": (6.4, 4.0),
    "font.size": 10,
    "legend.fontsize": 8,
    "figure.autolayout": True,
}

CLASS_STYLE = {"motorcycle": ("m", "tab:orange"), "car": ("c", "tab:blue")}
HEATMAP_QUANTITIES = (("rho_m", "Motorcycle density"), ("rho_c", "Car density"), ("v_m", "Motorcycle velocity"), ("v_c", "Car velocity"))


@dataclass(frozen=True)
class PlotPlan:
    """Axis limits shared by all figures of one run."""
    velocity_max: float
    density_max: float
    road_length: float

    @classmethod
    def for_trace(cls, trace: SimulationTrace) -> "PlotPlan":
        classes = trace.config.classes
        peak = max(float(np.max(s.primitive[:, 0::2])) for s in trace.snapshots)
        return cls(
            velocity_max=max(classes.car.v_max, classes.motorcycle.v_max),
            density_max=max(peak * 1.1, 1e-3),
            road_length=trace.config.road.length,
        )


def _save(fig: plt.Figure, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _profile(trace: SimulationTrace, index: int, quantity: str, plan: PlotPlan, out: Path) -> Path:
    snap = trace.snapshots[index]
    fig, ax = plt.subplots()
    for class_id, (suffix, color) in CLASS_STYLE.items():
        ax.plot(snap.x, getattr(snap, f"{quantity}_{suffix}"), color=color, label=class_id)
    ax.set_xlim(0.0, plan.road_length)
    if quantity == "rho":
        ax.set_ylim(0.0, plan.density_max)
        ax.set_ylabel("Normalized density")
    else:
        ax.set_ylim(0.0, plan.velocity_max * 1.05)
        ax.set_ylabel("Velocity (m/s)")
    ax.set_xlabel("x (m)")
    ax.set_title(f"t = {format_float(snap.time)} s")
    ax.legend(loc="best")
    name = "density" if quantity == "rho" else "velocity"
    return _save(fig, out / f"{name}_{index:03d}_t{format_float(snap.time)}.svg")


def _heatmap(trace: SimulationTrace, key: str, title: str, plan: PlotPlan, out: Path) -> Path:
    times = np.array([s.time for s in trace.snapshots])
    column = {"rho_m": 0, "v_m": 1, "rho_c": 2, "v_c": 3}[key]
    field = np.vstack([s.primitive[:, column] for s in trace.snapshots])
    t_lo, t_hi = float(times[0]), float(times[-1])
    if t_hi <= t_lo:
        t_hi = t_lo + 1.0
    fig, ax = plt.subplots()
    vmax = plan.density_max if key.startswith("rho") else plan.velocity_max
    image = ax.imshow(
        field,
        cmap="rainbow",
        origin="lower",
        aspect="auto",
        extent=[0.0, plan.road_length, t_lo, t_hi],
        vmin=0.0,
        vmax=vmax,
        interpolation="nearest",
    )
    fig.colorbar(image, ax=ax)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("t (s)")
    ax.set_title(title)
    return _save(fig, out / f"spacetime_{key}.svg")


def render_plots(trace: SimulationTrace, out_dir: Union[str, Path], plan: Optional[PlotPlan] = None) -> List[Path]:
    """Two profile SVGs per snapshot and four space-time heatmaps."""
    if not trace.snapshots:
        raise NoDataError("trace has no snapshots to plot")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    plan = plan or PlotPlan.for_trace(trace)
    written: List[Path] = []
    with plt.rc_context(SVG_RC):
        for index in range(len(trace.snapshots)):
            written.append(_profile(trace, index, "rho", plan, out))
            written.append(_profile(trace, index, "v", plan, out))
        for key, title in HEATMAP_QUANTITIES:
            written.append(_heatmap(trace, key, title, plan, out))
    log.info("rendered plots count=%d dir=%s", len(written), out)
    return written


def render_equilibrium_curves(table: pd.DataFrame, out_dir: Union[str, Path]) -> List[Path]:
    """Equilibrium speed of each class and total flow against total density, one line per delta."""
    if table.empty:
        raise NoDataError("equilibrium table is empty")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    panels = (
        ("v_e_m", "Motorcycle equilibrium speed (m/s)", "equilibrium_speed_m.svg"),
        ("v_e_c", "Car equilibrium speed (m/s)", "equilibrium_speed_c.svg"),
        ("flow", "Total equilibrium flow", "equilibrium_flow.svg"),
    )
    written: List[Path] = []
    with plt.rc_context(SVG_RC):
        for column, label, filename in panels:
            fig, ax = plt.subplots()
            for delta, group in table.groupby("delta", sort=True):
                ax.plot(group["rho"], group[column], label=f"delta = {format_float(delta)}")
            ax.set_xlabel("Total normalized density")
            ax.set_ylabel(label)
            ax.set_ylim(bottom=0.0)
            ax.legend(loc="best")
            written.append(_save(fig, out / filename))
    return written
