"""Grid, periodic two-stage time stepping and the run loop."""

from hetero_traffic.integrator.grid import ConservedField, Grid, TimeControls
from hetero_traffic.integrator.stepper import (
    SolverConfig,
    apply_periodic_bc,
    cfl_number,
    homogeneous_step,
    step,
)

__all__ = [
    "ConservedField",
    "Grid",
    "SolverConfig",
    "TimeControls",
    "apply_periodic_bc",
    "cfl_number",
    "homogeneous_step",
    "step",
]
