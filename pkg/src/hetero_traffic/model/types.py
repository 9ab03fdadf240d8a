"""
Typed contracts for the two-class traffic model.

State vectors are ordered (motorcycle, car) everywhere: conserved states as
(rho_m, X_m, rho_c, X_c) and primitive states as (rho_m, v_m, rho_c, v_c).
"""

from __future__ import annotations
import math
from dataclasses import dataclass
from typing import Iterator, Literal, Tuple

import numpy as np

from hetero_traffic.errors import InvalidMixError, InvalidSpecError

ClassId = Literal["motorcycle", "car"]
MOTORCYCLE: ClassId = "motorcycle"
CAR: ClassId = "car"
CLASS_IDS: Tuple[ClassId, ClassId] = (MOTORCYCLE, CAR)

# Car width over motorcycle width when a scenario leaves the motorcycle width out.
MOTORCYCLE_WIDTH_RATIO = 3.0


def class_index(class_id: str) -> int:
    """Position of a class in the (motorcycle, car) ordering."""
    try:
        return CLASS_IDS.index(class_id)  # type: ignore[arg-type]
    except ValueError:
        raise InvalidSpecError(f"unknown vehicle class {class_id!r}; expected one of {CLASS_IDS}") from None


@dataclass(frozen=True)
class VehicleClassSpec:
    """Geometric and behavioural parameters of one vehicle class (SI units)."""
    length: float
    width: float
    pressure_exponent: float
    relaxation_time: float
    v_max: float
    ao_max: float

    def __post_init__(self) -> None:
        for name in ("length", "width", "relaxation_time", "v_max"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidSpecError(f"{name} must be positive, got {value!r}")
        if not (math.isfinite(self.pressure_exponent) and self.pressure_exponent > 0):
            raise InvalidSpecError(f"pressure_exponent must be positive, got {self.pressure_exponent!r}")
        if not (0 < self.ao_max <= 1):
            raise InvalidSpecError(f"ao_max must lie in (0, 1], got {self.ao_max!r}")

    @property
    def plan_area(self) -> float:
        return self.length * self.width


@dataclass(frozen=True)
class ClassPair:
    """Both vehicle classes, indexable in the canonical order."""
    motorcycle: VehicleClassSpec
    car: VehicleClassSpec

    def __getitem__(self, class_id: str) -> VehicleClassSpec:
        return self.motorcycle if class_index(class_id) == 0 else self.car

    def __iter__(self) -> Iterator[VehicleClassSpec]:
        yield self.motorcycle
        yield self.car


@dataclass(frozen=True)
class MixSpec:
    """Motorcycle fraction delta of the total density, and road width W."""
    delta: float
    road_width: float

    def __post_init__(self) -> None:
        if not (0 < self.delta < 1):
            raise InvalidMixError(
                f"delta must lie strictly inside (0, 1), got {self.delta!r}; "
                "at the end points one class vanishes and its occupancy factor is undefined"
            )
        if not (math.isfinite(self.road_width) and self.road_width > 0):
            raise InvalidMixError(f"road_width must be positive, got {self.road_width!r}")


@dataclass(frozen=True)
class PressureLaw:
    """Per-class occupancy factor psi and pressure exponent gamma, in canonical order."""
    psi: Tuple[float, float]
    gamma: Tuple[float, float]

    @property
    def psi_array(self) -> np.ndarray:
        return np.asarray(self.psi, dtype=float)

    @property
    def gamma_array(self) -> np.ndarray:
        return np.asarray(self.gamma, dtype=float)


@dataclass(frozen=True)
class PrimitiveCell:
    rho_m: float
    v_m: float
    rho_c: float
    v_c: float

    def as_array(self) -> np.ndarray:
        return np.array([self.rho_m, self.v_m, self.rho_c, self.v_c], dtype=float)

    @classmethod
    def from_array(cls, values: np.ndarray) -> "PrimitiveCell":
        a = np.asarray(values, dtype=float).reshape(4)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


@dataclass(frozen=True)
class ConservedCell:
    rho_m: float
    x_m: float
    rho_c: float
    x_c: float

    def as_array(self) -> np.ndarray:
        return np.array([self.rho_m, self.x_m, self.rho_c, self.x_c], dtype=float)

    @classmethod
    def from_array(cls, values: np.ndarray) -> "ConservedCell":
        a = np.asarray(values, dtype=float).reshape(4)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


@dataclass(frozen=True)
class EquilibriumDiagnostics:
    """Closed-form sensitivities of the equilibrium speeds, (motorcycle, car) ordered."""
    dve_dao: Tuple[float, float]
    dve_ddelta: Tuple[float, float]
    dve_drho: Tuple[float, float]
