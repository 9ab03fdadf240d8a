"""Piecewise-constant initial data at class equilibrium speeds."""

from __future__ import annotations
import logging
from typing import Sequence

import numpy as np

from hetero_traffic.errors import ScenarioValidationError
from hetero_traffic.integrator.grid import ConservedField
from hetero_traffic.model.constitutive import equilibrium_velocity, split_density
from hetero_traffic.model.state import primitive_to_conserved
from hetero_traffic.model.types import CAR, MOTORCYCLE
from hetero_traffic.scenario.config import ScenarioConfig, Segment

log = logging.getLogger(__name__)


def segment_density(segments: Sequence[Segment], x: np.ndarray) -> np.ndarray:
    """Total density at each position; membership by [start, end)."""
    rho = np.full(x.shape, np.nan)
    for seg in segments:
        rho[seg.contains(x)] = seg.rho
    if np.any(np.isnan(rho)):
        missing = float(x[np.isnan(rho)][0])
        raise ScenarioValidationError("initial.segments", f"no segment covers x={missing:g}")
    return rho


def build_initial_condition(config: ScenarioConfig) -> ConservedField:
    """
    Cell-center densities from the segments, split by delta, with velocities at
    equilibrium, returned in conserved form at t = 0.
    """
    grid = config.grid
    rho = segment_density(config.initial, grid.positions("center"))
    rho_m, rho_c = split_density(rho, config.mix)
    prim = np.column_stack(
        [
            rho_m,
            equilibrium_velocity(rho_m, MOTORCYCLE, config.classes, config.mix),
            rho_c,
            equilibrium_velocity(rho_c, CAR, config.classes, config.mix),
        ]
    )
    log.debug("initial condition cells=%d rho_range=[%g, %g]", grid.cells, float(rho.min()), float(rho.max()))
    return ConservedField(values=primitive_to_conserved(prim, config.law), time=0.0)
