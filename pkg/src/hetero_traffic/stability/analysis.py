"""
Linear stability of uniform equilibria.

A perturbation sigma exp(ikx + rt) of class i around (rho_0, v_e(rho_0))
satisfies, with s = r + i k v_0,

    s (s + 1/tau) + i k rho_0 (s p' - psi v_e' / tau) = 0,

one complex quadratic per class (the classes decouple). v_e' is the
Greenshields slope in its occupancy argument, -v_max / ao_max, and
p' = gamma psi (psi rho_0)^(gamma - 1).

Two closed-form verdicts are reported next to the roots:
  * class_stability_condition: stable when psi v_e' < -p'
  * subcharacteristic_condition: stable when psi v_e' > -p', i.e. the
    equilibrium wave speed lies between the two frozen characteristic speeds.
The roots agree with the second one for every k != 0.
"""

from __future__ import annotations
import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from hetero_traffic.errors import ConfigError, DomainError
from hetero_traffic.model.constitutive import (
    equilibrium_velocity,
    occupancy_factor,
    pressure_derivative,
    split_density,
)
from hetero_traffic.model.types import CAR, CLASS_IDS, MOTORCYCLE, ClassPair, MixSpec, class_index

log = logging.getLogger(__name__)

DEFAULT_K_GRID: Tuple[float, ...] = (0.01, 0.05, 0.1, 0.5, 1.0)
# Largest real part still counted as non-growing by the spectral verdict.
SPECTRAL_TOLERANCE = 1e-12
MAP_COLUMNS = ["delta", "rho0", "k", "class", "lhs", "rhs", "margin", "max_re_r", "stable"]


@dataclass(frozen=True)
class PerturbationSpec:
    """Wavenumber and the equilibrium base state it perturbs."""
    k: float
    rho_m0: float
    rho_c0: float
    v_m0: float
    v_c0: float

    def __post_init__(self) -> None:
        if self.k == 0 or not math.isfinite(self.k):
            raise ConfigError(f"wavenumber must be finite and non-zero, got {self.k!r}")
        if self.rho_m0 < 0 or self.rho_c0 < 0:
            raise DomainError("base densities must be non-negative")

    @classmethod
    def at_equilibrium(cls, k: float, rho0: float, classes: ClassPair, mix: MixSpec) -> "PerturbationSpec":
        rho_m, rho_c = split_density(rho0, mix)
        return cls(
            k=k,
            rho_m0=rho_m,
            rho_c0=rho_c,
            v_m0=equilibrium_velocity(rho_m, MOTORCYCLE, classes, mix),
            v_c0=equilibrium_velocity(rho_c, CAR, classes, mix),
        )


@dataclass(frozen=True)
class StabilityCondition:
    lhs: float
    rhs: float
    stable: bool

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs


@dataclass(frozen=True)
class ClassBlock:
    """Coefficients of one class's dispersion relation."""
    k: float
    rho0: float
    v0: float
    tau: float
    psi: float
    dp_drho: float
    dve_dao: float


@dataclass(frozen=True)
class StabilityMap:
    table: pd.DataFrame
    disagreements: pd.DataFrame


def _slopes(class_id: str, rho_i0: float, mix: MixSpec, classes: ClassPair) -> Tuple[float, float, float]:
    spec = classes[class_id]
    psi = occupancy_factor(class_id, classes, mix)
    dp = pressure_derivative(rho_i0, psi, spec.pressure_exponent)
    return psi, -spec.v_max / spec.ao_max, dp


def _class_density(class_id: str, rho0: float, mix: MixSpec) -> float:
    rho_m, rho_c = split_density(rho0, mix)
    return rho_m if class_index(class_id) == 0 else rho_c


def class_stability_condition(class_id: str, rho0: float, mix: MixSpec, classes: ClassPair) -> StabilityCondition:
    """lhs = psi v_e', rhs = -dp/drho at the class base density; stable when lhs < rhs."""
    psi, dve, dp = _slopes(class_id, _class_density(class_id, rho0, mix), mix, classes)
    lhs, rhs = psi * dve, -dp
    return StabilityCondition(lhs=lhs, rhs=rhs, stable=lhs < rhs)


def subcharacteristic_condition(class_id: str, rho0: float, mix: MixSpec, classes: ClassPair) -> StabilityCondition:
    """Same two sides; stable when psi v_e' > -dp/drho."""
    cond = class_stability_condition(class_id, rho0, mix, classes)
    return StabilityCondition(lhs=cond.lhs, rhs=cond.rhs, stable=cond.lhs > cond.rhs)


def complex_sqrt(R: float, I: float) -> complex:
    """Principal square root of R + iI: sqrt((|z| + R)/2) + i sign(I) sqrt((|z| - R)/2)."""
    modulus = math.hypot(R, I)
    re = math.sqrt(max(0.0, 0.5 * (modulus + R)))
    im = math.sqrt(max(0.0, 0.5 * (modulus - R)))
    return complex(re, math.copysign(im, I))


def class_block(spec: PerturbationSpec, class_id: str, classes: ClassPair, mix: MixSpec) -> ClassBlock:
    i = class_index(class_id)
    rho0 = spec.rho_m0 if i == 0 else spec.rho_c0
    v0 = spec.v_m0 if i == 0 else spec.v_c0
    psi, dve, dp = _slopes(class_id, rho0, mix, classes)
    return ClassBlock(
        k=spec.k, rho0=rho0, v0=v0, tau=classes[class_id].relaxation_time, psi=psi, dp_drho=dp, dve_dao=dve
    )


def block_determinant(r: complex, block: ClassBlock) -> complex:
    s = r + 1j * block.k * block.v0
    return s * (s + 1.0 / block.tau) + 1j * block.k * block.rho0 * (
        s * block.dp_drho - block.psi * block.dve_dao / block.tau
    )


def block_roots(block: ClassBlock) -> Tuple[complex, complex]:
    """Both zeros of the class determinant, larger real part first."""
    ik = 1j * block.k
    a = 1.0 / block.tau + ik * block.rho0 * block.dp_drho
    c = -ik * block.rho0 * block.psi * block.dve_dao / block.tau
    disc = a * a - 4.0 * c
    root = complex_sqrt(disc.real, disc.imag)
    shift = ik * block.v0
    r1 = 0.5 * (-a + root) - shift
    r2 = 0.5 * (-a - root) - shift
    return (r1, r2) if r1.real >= r2.real else (r2, r1)


def growth_rates(spec: PerturbationSpec, classes: ClassPair, mix: MixSpec) -> np.ndarray:
    """Four complex growth rates ordered (motorcycle pair, car pair)."""
    roots: List[complex] = []
    for class_id in CLASS_IDS:
        roots.extend(block_roots(class_block(spec, class_id, classes, mix)))
    return np.array(roots, dtype=complex)


def root_residual(r: complex, block: ClassBlock) -> float:
    """|det(r)| scaled by 1 + the coefficient magnitudes."""
    ik = 1j * block.k
    scale = 1.0 + abs(1.0 / block.tau + ik * block.rho0 * block.dp_drho) + abs(
        ik * block.rho0 * block.psi * block.dve_dao / block.tau
    ) + abs(block.k * block.v0) ** 2
    return abs(block_determinant(r, block)) / scale


def _check_grid(delta_grid: Sequence[float], rho_grid: Sequence[float], k_grid: Sequence[float]) -> None:
    if not len(delta_grid) or not len(rho_grid) or not len(k_grid):
        raise ConfigError("stability grids must be non-empty")
    if any(not (0 < d < 1) for d in delta_grid):
        raise ConfigError("every delta in the stability grid must lie strictly inside (0, 1)")
    if any(r < 0 for r in rho_grid):
        raise ConfigError("every base density in the stability grid must be non-negative")
    if any(k == 0 for k in k_grid):
        raise ConfigError("wavenumbers must be non-zero")


def stability_map(
    delta_grid: Sequence[float],
    rho_grid: Sequence[float],
    k_grid: Sequence[float],
    classes: ClassPair,
    road_width: float,
) -> StabilityMap:
    """
    Sweep (delta, rho0, k, class). `stable` is the class_stability_condition
    verdict; a (delta, rho0, class) whose spectral verdict (max over k of
    Re r <= 1e-12) differs from it is listed in `disagreements`.
    """
    _check_grid(delta_grid, rho_grid, k_grid)
    rows = []
    disagreements = []
    for delta in delta_grid:
        mix = MixSpec(delta=float(delta), road_width=road_width)
        for rho0 in rho_grid:
            for class_id in CLASS_IDS:
                cond = class_stability_condition(class_id, float(rho0), mix, classes)
                sub = subcharacteristic_condition(class_id, float(rho0), mix, classes)
                worst = -math.inf
                for k in k_grid:
                    spec = PerturbationSpec.at_equilibrium(float(k), float(rho0), classes, mix)
                    max_re = max(r.real for r in block_roots(class_block(spec, class_id, classes, mix)))
                    worst = max(worst, max_re)
                    rows.append(
                        {
                            "delta": float(delta),
                            "rho0": float(rho0),
                            "k": float(k),
                            "class": class_id,
                            "lhs": cond.lhs,
                            "rhs": cond.rhs,
                            "margin": cond.margin,
                            "max_re_r": max_re,
                            "stable": cond.stable,
                        }
                    )
                spectral = worst <= SPECTRAL_TOLERANCE
                if spectral != cond.stable:
                    disagreements.append(
                        {
                            "delta": float(delta),
                            "rho0": float(rho0),
                            "class": class_id,
                            "closed_form_stable": cond.stable,
                            "spectral_stable": spectral,
                            "subcharacteristic_stable": sub.stable,
                            "max_re_r": worst,
                        }
                    )
    table = pd.DataFrame(rows, columns=MAP_COLUMNS)
    extra = pd.DataFrame(
        disagreements,
        columns=[
            "delta", "rho0", "class", "closed_form_stable", "spectral_stable", "subcharacteristic_stable", "max_re_r",
        ],
    )
    if len(extra):
        log.warning(
            "stability_map disagreements=%d of %d points (closed form vs growth rates)",
            len(extra), len(delta_grid) * len(rho_grid) * 2,
        )
    log.info("stability_map points=%d rows=%d", len(delta_grid) * len(rho_grid), len(table))
    return StabilityMap(table=table, disagreements=extra)


def spectral_verdict(spec: PerturbationSpec, classes: ClassPair, mix: MixSpec) -> bool:
    """True when no growth rate has a positive real part (beyond 1e-12)."""
    return float(np.max(growth_rates(spec, classes, mix).real)) <= SPECTRAL_TOLERANCE


def conjugate_roots(block: ClassBlock) -> Tuple[complex, complex]:
    """Roots of the k -> -k block; the complex conjugates of block_roots."""
    mirrored = ClassBlock(
        k=-block.k, rho0=block.rho0, v0=block.v0, tau=block.tau, psi=block.psi,
        dp_drho=block.dp_drho, dve_dao=block.dve_dao,
    )
    return block_roots(mirrored)

