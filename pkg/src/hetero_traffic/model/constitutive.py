"""
Constitutive relations of the two-class model.

The road carries a single area occupancy AO; each class sees it through its
own occupancy factor psi_i, so AO = psi_m * rho_m = psi_c * rho_c whenever the
class densities come from the same proportional split. Pressure and
equilibrium speed are functions of that occupancy.

All functions accept Python floats or numpy arrays and return the same kind.
"""

from __future__ import annotations
import logging
from typing import Sequence, Tuple, Union

import numpy as np
import pandas as pd

from hetero_traffic.errors import DomainError, InvalidMixError
from hetero_traffic.model.types import (
    CAR,
    CLASS_IDS,
    MOTORCYCLE,
    ClassPair,
    EquilibriumDiagnostics,
    MixSpec,
    PressureLaw,
    class_index,
)

log = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def _like(value: np.ndarray, template: ArrayLike) -> ArrayLike:
    return float(value) if np.ndim(template) == 0 else value


def _check_delta(delta: float) -> None:
    if not (0 < delta < 1):
        raise InvalidMixError(f"delta must lie strictly inside (0, 1), got {delta!r}")


def split_density(rho: ArrayLike, mix: MixSpec) -> Tuple[ArrayLike, ArrayLike]:
    """Proportional split of a total density into (rho_m, rho_c); the parts sum back to rho."""
    _check_delta(mix.delta)
    r = np.asarray(rho, dtype=float)
    if np.any(r < 0):
        raise DomainError("total density must be non-negative")
    rho_m = mix.delta * r
    rho_c = r - rho_m
    return _like(rho_m, rho), _like(rho_c, rho)


def _weighted_area(classes: ClassPair, delta: float) -> float:
    """(1 - delta) a_c + delta a_m: mean plan area per unit of total density."""
    return (1.0 - delta) * classes.car.plan_area + delta * classes.motorcycle.plan_area


def occupancy_factor(class_id: str, classes: ClassPair, mix: MixSpec) -> float:
    _check_delta(mix.delta)
    share = mix.delta if class_index(class_id) == 0 else 1.0 - mix.delta
    return _weighted_area(classes, mix.delta) / (mix.road_width * share)


def pressure_law(classes: ClassPair, mix: MixSpec) -> PressureLaw:
    """Bundle (psi, gamma) per class for the solver and state conversions."""
    psi = tuple(occupancy_factor(cid, classes, mix) for cid in CLASS_IDS)
    gamma = tuple(spec.pressure_exponent for spec in classes)
    return PressureLaw(psi=psi, gamma=gamma)  # type: ignore[arg-type]


def area_occupancy(rho_i: ArrayLike, psi_i: float) -> ArrayLike:
    r = np.asarray(rho_i, dtype=float)
    if np.any(r < 0):
        raise DomainError(f"class density must be non-negative, got min={float(np.min(r))!r}")
    return _like(psi_i * r, rho_i)


def pressure(rho_i: ArrayLike, psi_i: float, gamma_i: float) -> ArrayLike:
    """Traffic pressure p = (psi rho)^gamma."""
    return _like(np.power(np.asarray(area_occupancy(rho_i, psi_i)), gamma_i), rho_i)


def pressure_derivative(rho_i: ArrayLike, psi_i: float, gamma_i: float) -> ArrayLike:
    """dp/drho = gamma psi (psi rho)^(gamma - 1)."""
    ao = np.asarray(area_occupancy(rho_i, psi_i))
    return _like(gamma_i * psi_i * np.power(ao, gamma_i - 1.0), rho_i)


def equilibrium_velocity(rho_i: ArrayLike, class_id: str, classes: ClassPair, mix: MixSpec) -> ArrayLike:
    """Greenshields speed in the class's own occupancy, clamped at zero beyond ao_max."""
    spec = classes[class_id]
    ao = np.asarray(area_occupancy(rho_i, occupancy_factor(class_id, classes, mix)))
    v = spec.v_max * np.clip(1.0 - ao / spec.ao_max, 0.0, None)
    return _like(v, rho_i)


def equilibrium_diagnostics(rho: float, mix: MixSpec, classes: ClassPair) -> EquilibriumDiagnostics:
    """
    Closed-form sensitivities of both equilibrium speeds.

    d/dAO is the Greenshields slope. d/d(delta) holds the class density fixed
    and d/d(rho) holds delta fixed. Both are zero on the clamped (jammed) branch.
    """
    rho_m, rho_c = split_density(rho, mix)
    d = mix.delta
    width = mix.road_width
    mc, car = classes.motorcycle, classes.car
    area = _weighted_area(classes, d)
    ao = rho * area / width

    def free(spec) -> bool:
        return ao < spec.ao_max

    dve_dao = (-mc.v_max / mc.ao_max, -car.v_max / car.ao_max)
    dve_ddelta = (
        rho_m * car.plan_area * mc.v_max / (mc.ao_max * d * d * width) if free(mc) else 0.0,
        -car.v_max * rho_c * mc.plan_area / (car.ao_max * width * (1.0 - d) ** 2) if free(car) else 0.0,
    )
    dve_drho = (
        -mc.v_max * area / (mc.ao_max * width) if free(mc) else 0.0,
        -car.v_max * area / (car.ao_max * width) if free(car) else 0.0,
    )
    return EquilibriumDiagnostics(dve_dao=dve_dao, dve_ddelta=dve_ddelta, dve_drho=dve_drho)


def jam_density(class_id: str, classes: ClassPair, mix: MixSpec) -> float:
    """Total density at which the class's equilibrium speed first reaches zero."""
    _check_delta(mix.delta)
    return classes[class_id].ao_max * mix.road_width / _weighted_area(classes, mix.delta)


def equilibrium_flow(rho: ArrayLike, classes: ClassPair, mix: MixSpec) -> ArrayLike:
    """Total equilibrium flow rho_m v_e,m + rho_c v_e,c at total density rho."""
    rho_m, rho_c = split_density(rho, mix)
    q = np.asarray(rho_m) * np.asarray(equilibrium_velocity(rho_m, MOTORCYCLE, classes, mix)) + np.asarray(
        rho_c
    ) * np.asarray(equilibrium_velocity(rho_c, CAR, classes, mix))
    return _like(q, rho)


def equilibrium_curves(
    rho_grid: Sequence[float],
    deltas: Sequence[float],
    classes: ClassPair,
    road_width: float,
) -> pd.DataFrame:
    """
    Equilibrium speed and flow against total density, one family per delta.

    Columns: delta, rho, rho_m, rho_c, v_e_m, v_e_c, flow.
    """
    rho = np.asarray(rho_grid, dtype=float)
    frames = []
    for delta in deltas:
        mix = MixSpec(delta=float(delta), road_width=road_width)
        rho_m, rho_c = split_density(rho, mix)
        frames.append(
            pd.DataFrame(
                {
                    "delta": float(delta),
                    "rho": rho,
                    "rho_m": rho_m,
                    "rho_c": rho_c,
                    "v_e_m": equilibrium_velocity(rho_m, MOTORCYCLE, classes, mix),
                    "v_e_c": equilibrium_velocity(rho_c, CAR, classes, mix),
                    "flow": equilibrium_flow(rho, classes, mix),
                }
            )
        )
    table = pd.concat(frames, ignore_index=True)
    log.debug("equilibrium_curves deltas=%d points=%d", len(deltas), len(rho))
    return table
