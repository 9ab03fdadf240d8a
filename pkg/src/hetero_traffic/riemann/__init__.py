"""Roe approximate Riemann solver for the two-class system."""

from hetero_traffic.riemann.flux import eigenstructure, jacobian, physical_flux
from hetero_traffic.riemann.properties import RoePropertyReport, verify_roe_properties
from hetero_traffic.riemann.roe import (
    ENTROPY_MODES,
    RoeInterfaceData,
    entropy_fixed_eigenvalues,
    numerical_flux,
    roe_average,
    roe_matrix,
    wave_strengths,
)

__all__ = [
    "ENTROPY_MODES",
    "RoeInterfaceData",
    "RoePropertyReport",
    "eigenstructure",
    "entropy_fixed_eigenvalues",
    "jacobian",
    "numerical_flux",
    "physical_flux",
    "roe_average",
    "roe_matrix",
    "verify_roe_properties",
    "wave_strengths",
]
