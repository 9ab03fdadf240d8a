"""
Two-stage explicit update on a periodic road.

Stage 1 (homogeneous):  U* = U - dt/dx (F_{j+1/2} - F_{j-1/2}) with Roe fluxes.
Stage 2 (relaxation):   U^{n+1} = U* + dt S(U^n)   (or S(U*) when source_level="star").
"""

from __future__ import annotations
import logging
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from hetero_traffic.errors import BlowUpError, ConfigError, NonphysicalStateError, StepRejectedError
from hetero_traffic.integrator.grid import ConservedField, Grid, XConvention
from hetero_traffic.model.constitutive import pressure_law
from hetero_traffic.model.state import VACUUM_DENSITY, conserved_to_primitive, relaxation_source
from hetero_traffic.model.types import ClassPair, MixSpec, PressureLaw
from hetero_traffic.riemann.flux import cell_eigenvalues
from hetero_traffic.riemann.roe import DEFAULT_ENTROPY_MODE, check_entropy_mode, numerical_flux

log = logging.getLogger(__name__)

SourceLevel = Literal["n", "star"]


@dataclass(frozen=True)
class SolverConfig:
    entropy_mode: str = DEFAULT_ENTROPY_MODE
    source_enabled: bool = True
    source_level: SourceLevel = "n"
    adaptive: bool = False
    x_convention: XConvention = "center"

    def __post_init__(self) -> None:
        check_entropy_mode(self.entropy_mode)
        if self.source_level not in ("n", "star"):
            raise ConfigError(f"source_level must be 'n' or 'star', got {self.source_level!r}")
        if self.x_convention not in ("center", "node"):
            raise ConfigError(f"x_convention must be 'center' or 'node', got {self.x_convention!r}")


def apply_periodic_bc(values: np.ndarray) -> np.ndarray:
    """Ghost-extended copy (J + 2, 4): [U_J, U_1, ..., U_J, U_1]."""
    U = np.asarray(values, dtype=float)
    return np.concatenate([U[-1:], U, U[:1]], axis=0)


def interface_fluxes(values: np.ndarray, law: PressureLaw, entropy_mode: str = DEFAULT_ENTROPY_MODE) -> np.ndarray:
    """Roe fluxes at the J + 1 interfaces 1/2 .. J + 1/2; the first and last coincide."""
    ext = apply_periodic_bc(values)
    return numerical_flux(ext[:-1], ext[1:], law, entropy_mode)


def max_wave_speed(values: np.ndarray, law: PressureLaw) -> float:
    return float(np.max(np.abs(cell_eigenvalues(values, law))))


def cfl_number(field: ConservedField, dt: float, dx: float, law: PressureLaw) -> float:
    return dt / dx * max_wave_speed(field.values, law)


def _check_state(values: np.ndarray, law: PressureLaw, step_index: int) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        bad = int(np.argwhere(~np.all(np.isfinite(values), axis=1))[0][0])
        raise BlowUpError("non-finite state", step=step_index, cell=bad)
    try:
        return conserved_to_primitive(values, law)
    except NonphysicalStateError as e:
        raise BlowUpError(str(e), step=step_index, cell=e.cell) from e


def homogeneous_step(
    field: ConservedField,
    dt: float,
    grid: Grid,
    law: PressureLaw,
    config: SolverConfig,
    *,
    cfl_max: float = 1.0,
    step_index: int = 0,
) -> ConservedField:
    """Flux-difference stage; rejects the step when the CFL number exceeds cfl_max."""
    nu = cfl_number(field, dt, grid.dx, law)
    if nu > cfl_max:
        log.warning("step=%d action=reject nu=%.6g cfl_max=%.6g", step_index, nu, cfl_max)
        raise StepRejectedError(nu, cfl_max)
    F = interface_fluxes(field.values, law, config.entropy_mode)
    U_star = field.values - dt / grid.dx * (F[1:] - F[:-1])
    neg = U_star[:, 0::2] < -VACUUM_DENSITY
    if np.any(neg):
        cell = int(np.argwhere(neg)[0][0])
        raise BlowUpError("negative density after flux update", step=step_index, cell=cell)
    return field.advanced(U_star, dt)


def step(
    field: ConservedField,
    dt: float,
    grid: Grid,
    classes: ClassPair,
    mix: MixSpec,
    config: SolverConfig,
    *,
    cfl_max: float = 1.0,
    step_index: int = 0,
    law: Optional[PressureLaw] = None,
) -> ConservedField:
    """One full step; the source only touches the X components."""
    law = law or pressure_law(classes, mix)
    star = homogeneous_step(field, dt, grid, law, config, cfl_max=cfl_max, step_index=step_index)
    if not config.source_enabled:
        _check_state(star.values, law, step_index)
        return star
    base = star.values if config.source_level == "star" else field.values
    prim = _check_state(base, law, step_index)
    U_next = star.values + dt * relaxation_source(prim, classes, mix)
    _check_state(U_next, law, step_index)
    return ConservedField(values=U_next, time=star.time)
