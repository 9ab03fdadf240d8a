"""Constitutive model: vehicle classes, occupancy, pressure, equilibrium speed and state conversions."""

from hetero_traffic.model.types import (
    CAR,
    CLASS_IDS,
    MOTORCYCLE,
    ClassPair,
    ConservedCell,
    EquilibriumDiagnostics,
    MixSpec,
    PressureLaw,
    PrimitiveCell,
    VehicleClassSpec,
)

__all__ = [
    "CAR",
    "CLASS_IDS",
    "MOTORCYCLE",
    "ClassPair",
    "ConservedCell",
    "EquilibriumDiagnostics",
    "MixSpec",
    "PressureLaw",
    "PrimitiveCell",
    "VehicleClassSpec",
]
