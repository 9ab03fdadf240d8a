"""
Time loop: drives `step` from the initial condition to T, recording snapshots
of the primitive field and one diagnostics row per completed step.
"""

from __future__ import annotations
import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence

import numpy as np

from hetero_traffic.errors import BlowUpError
from hetero_traffic.integrator.grid import ConservedField
from hetero_traffic.integrator.stepper import max_wave_speed, step
from hetero_traffic.model.state import conserved_to_primitive

if TYPE_CHECKING:  # pragma: no cover
    from hetero_traffic.scenario.config import ScenarioConfig

log = logging.getLogger(__name__)

# Snapshot instants closer than this (relative to dt) count as reached.
TIME_MATCH = 1e-9
ADAPTIVE_SAFETY = 1.0 - 1e-9


@dataclass(frozen=True)
class Snapshot:
    """Primitive field (rho_m, v_m, rho_c, v_c) per cell at one instant."""
    time: float
    x: np.ndarray
    primitive: np.ndarray

    @property
    def rho_m(self) -> np.ndarray:
        return self.primitive[:, 0]

    @property
    def v_m(self) -> np.ndarray:
        return self.primitive[:, 1]

    @property
    def rho_c(self) -> np.ndarray:
        return self.primitive[:, 2]

    @property
    def v_c(self) -> np.ndarray:
        return self.primitive[:, 3]


@dataclass(frozen=True)
class StepDiagnostics:
    step: int
    time: float
    dt: float
    cfl: float
    rho_min: tuple
    rho_max: tuple
    v_min: tuple
    v_max: tuple

    def as_row(self) -> Dict[str, float]:
        row: Dict[str, float] = {"step": self.step, "time": self.time, "dt": self.dt, "cfl": self.cfl}
        for i, suffix in enumerate(("m", "c")):
            row[f"rho_{suffix}_min"] = self.rho_min[i]
            row[f"rho_{suffix}_max"] = self.rho_max[i]
            row[f"v_{suffix}_min"] = self.v_min[i]
            row[f"v_{suffix}_max"] = self.v_max[i]
        return row


@dataclass
class SimulationTrace:
    """Snapshots and diagnostics of one run; `aborted_step` is set when a blow-up cut the run short."""
    config: "ScenarioConfig"
    snapshots: List[Snapshot] = field(default_factory=list)
    diagnostics: List[StepDiagnostics] = field(default_factory=list)
    aborted_step: Optional[int] = None


class SimulationAborted(BlowUpError):
    """Blow-up during a run; carries the partial trace."""

    def __init__(self, cause: BlowUpError, trace: SimulationTrace):
        super().__init__(str(cause).split(" (step=")[0], step=cause.step, cell=cause.cell)
        self.trace = trace


def _diagnostics(step_index: int, time: float, dt: float, cfl: float, prim: np.ndarray) -> StepDiagnostics:
    rho = prim[:, 0::2]
    v = prim[:, 1::2]
    return StepDiagnostics(
        step=step_index,
        time=time,
        dt=dt,
        cfl=cfl,
        rho_min=tuple(float(a) for a in rho.min(axis=0)),
        rho_max=tuple(float(a) for a in rho.max(axis=0)),
        v_min=tuple(float(a) for a in v.min(axis=0)),
        v_max=tuple(float(a) for a in v.max(axis=0)),
    )


def _targets(snapshots: Sequence[float], duration: float) -> List[float]:
    return sorted({float(t) for t in snapshots if 0 <= t <= duration + TIME_MATCH})


def run_scenario(config: "ScenarioConfig") -> SimulationTrace:
    """
    Run a validated scenario. Deterministic: the same config gives a
    bit-identical trace. Raises SimulationAborted (a BlowUpError) holding the
    partial trace if a step produces a nonphysical state.
    """
    from hetero_traffic.scenario.initial import build_initial_condition

    law = config.law
    grid = config.grid
    controls = config.time
    solver = config.solver
    x = grid.positions(solver.x_convention)
    trace = SimulationTrace(config=config)

    current = build_initial_condition(config)
    targets = _targets(config.snapshots, controls.duration)

    # fixed steps: a target is due once its nearest completed step is reached
    # (ties go to the earlier step); adaptive steps land on targets exactly
    reach = TIME_MATCH * controls.dt if solver.adaptive else 0.5 * controls.dt + TIME_MATCH * controls.dt

    def record(f: ConservedField, prim: np.ndarray) -> None:
        t = round(f.time, 12)
        if trace.snapshots and trace.snapshots[-1].time == t:
            return
        trace.snapshots.append(Snapshot(time=t, x=x.copy(), primitive=prim.copy()))
        log.debug("snapshot t=%.6g", f.time)

    def record_due(f: ConservedField, prim: np.ndarray) -> None:
        due = False
        while targets and targets[0] <= f.time + reach:
            targets.pop(0)
            due = True
        if due:
            record(f, prim)

    record_due(current, conserved_to_primitive(current.values, law))

    log.info(
        "run=start name=%s cells=%d dx=%g dt=%g T=%g adaptive=%s entropy=%s",
        config.name, grid.cells, grid.dx, controls.dt, controls.duration, solver.adaptive, solver.entropy_mode,
    )

    n = 0
    n_fixed = int(round(controls.duration / controls.dt))
    if not solver.adaptive and abs(n_fixed * controls.dt - controls.duration) > TIME_MATCH * controls.duration:
        log.warning("duration %g is not a multiple of dt %g; running %d steps", controls.duration, controls.dt, n_fixed)

    try:
        while True:
            if solver.adaptive:
                if current.time >= controls.duration - TIME_MATCH * controls.dt:
                    break
                speed = max_wave_speed(current.values, law)
                # rounding must not trip the CFL guard
                dt = ADAPTIVE_SAFETY * controls.cfl_max * grid.dx / speed if speed > 0 else controls.dt
                horizon = min([controls.duration] + [t for t in targets if t > current.time])
                dt = min(dt, horizon - current.time)
                new_time = None
                if horizon - (current.time + dt) <= TIME_MATCH * controls.dt:
                    new_time = horizon
            else:
                if n >= n_fixed:
                    break
                dt = controls.dt
                new_time = (n + 1) * controls.dt

            cfl = dt / grid.dx * max_wave_speed(current.values, law)
            nxt = step(
                current, dt, grid, config.classes, config.mix, solver,
                cfl_max=controls.cfl_max, step_index=n + 1, law=law,
            )
            if new_time is not None:
                nxt = ConservedField(values=nxt.values, time=new_time)
            n += 1
            current = nxt
            prim = conserved_to_primitive(current.values, law)
            trace.diagnostics.append(_diagnostics(n, current.time, dt, cfl, prim))
            log.debug("step=%d t=%.6g dt=%.6g nu=%.4g rho_max=%.4g", n, current.time, dt, cfl, float(prim[:, 0::2].max()))
            record_due(current, prim)
    except BlowUpError as e:
        trace.aborted_step = e.step
        log.error("run=abort name=%s step=%d cell=%s reason=%s", config.name, e.step, e.cell, e)
        raise SimulationAborted(e, trace) from e

    log.info("run=done name=%s steps=%d snapshots=%d t=%g", config.name, n, len(trace.snapshots), current.time)
    return trace

