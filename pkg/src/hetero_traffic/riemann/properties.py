"""
Property verifier for the Roe linearization.

Checks, for one pair of states:
  (A) hyperbolicity: real averaged eigenvalues and independent eigenvectors,
  (B) consistency: the Roe matrix of a repeated state equals the exact Jacobian,
  (C) conservation: the residual |f_r - f_l - A_bar (U_r - U_l)| and how it
      shrinks when the jump is halved.
The parameter-vector matrices B_bar = dU/dZ and C_bar = df/dZ give a second
construction of the Roe matrix, reported as parameter_form_gap.
"""

from __future__ import annotations
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from hetero_traffic.model.state import VACUUM_DENSITY
from hetero_traffic.model.types import PressureLaw
from hetero_traffic.riemann.flux import jacobian, physical_flux
from hetero_traffic.riemann.roe import roe_average, roe_matrix, with_strengths

log = logging.getLogger(__name__)

INDEPENDENCE_TOLERANCE = 1e-12
CONSISTENCY_TOLERANCE = 1e-12
# Residuals below this are round-off and carry no scaling information.
RESIDUAL_FLOOR = 1e-13


@dataclass(frozen=True)
class RoePropertyReport:
    eigenvalues_real: bool
    block_determinants: Tuple[float, float]
    eigenvector_determinant: float
    consistency_error: float
    conservation_residual: float
    conservation_residual_half: float
    conservation_ratio: Optional[float]
    observed_order: Optional[float]
    mass_residual: float
    reconstruction_error: float
    parameter_form_gap: float

    @property
    def hyperbolic(self) -> bool:
        return self.eigenvalues_real and min(self.block_determinants) > INDEPENDENCE_TOLERANCE

    @property
    def consistent(self) -> bool:
        return math.isnan(self.consistency_error) or self.consistency_error <= CONSISTENCY_TOLERANCE


def parameter_vector(U: np.ndarray, eps_vac: float = VACUUM_DENSITY) -> np.ndarray:
    """Z = (sqrt(rho_m), X_m/sqrt(rho_m), sqrt(rho_c), X_c/sqrt(rho_c)); zero for vacuum classes."""
    U = np.asarray(U, dtype=float)
    Z = np.zeros_like(U)
    for i in range(2):
        k = 2 * i
        occupied = U[..., k] >= eps_vac
        root = np.sqrt(np.where(occupied, U[..., k], 0.0))
        Z[..., k] = root
        Z[..., k + 1] = np.where(occupied, U[..., k + 1] / np.where(occupied, root, 1.0), 0.0)
    return Z


def parameter_jacobian_b(Z: np.ndarray) -> np.ndarray:
    """B_bar = dU/dZ; U is quadratic in Z so U_r - U_l = B_bar(Z_mean) (Z_r - Z_l) exactly."""
    Z = np.asarray(Z, dtype=float)
    B = np.zeros(Z.shape + (4,))
    for i in range(2):
        k = 2 * i
        B[..., k, k] = 2.0 * Z[..., k]
        B[..., k + 1, k] = Z[..., k + 1]
        B[..., k + 1, k + 1] = Z[..., k]
    return B


def parameter_flux_c(Z: np.ndarray, law: PressureLaw) -> np.ndarray:
    """C_bar = df/dZ with f written in the parameter vector."""
    Z = np.asarray(Z, dtype=float)
    C = np.zeros(Z.shape + (4,))
    for i in range(2):
        k = 2 * i
        g = law.gamma[i]
        z1, z2 = Z[..., k], Z[..., k + 1]
        p = np.power(law.psi[i] * z1 * z1, g)
        C[..., k, k] = z2 - 2.0 * (1.0 + g) * p * z1
        C[..., k, k + 1] = z1
        C[..., k + 1, k] = -(2.0 * g + 1.0) * p * z2
        C[..., k + 1, k + 1] = 2.0 * z2 - p * z1
    return C


def conservation_residual(U_l: np.ndarray, U_r: np.ndarray, law: PressureLaw) -> np.ndarray:
    """Vector residual f(U_r) - f(U_l) - A_bar (U_r - U_l)."""
    A = roe_matrix(roe_average(U_l, U_r, law), law)
    dU = np.asarray(U_r, dtype=float) - np.asarray(U_l, dtype=float)
    return physical_flux(U_r, law) - physical_flux(U_l, law) - np.einsum("...ij,...j->...i", A, dU)


def verify_roe_properties(U_l: np.ndarray, U_r: np.ndarray, law: PressureLaw) -> RoePropertyReport:
    """Evaluate properties A, B and C on one interface; never raises for admissible states."""
    U_l = np.asarray(U_l, dtype=float)
    U_r = np.asarray(U_r, dtype=float)
    avg = with_strengths(roe_average(U_l, U_r, law), U_l, U_r)
    A = roe_matrix(avg, law)

    eig = np.linalg.eigvals(A)
    scale = max(1.0, float(np.max(np.abs(eig))))
    real = bool(np.all(np.abs(eig.imag) <= 1e-10 * scale))
    blocks = tuple(float(np.linalg.det(avg.eigenvectors[2 * i:2 * i + 2, 2 * i:2 * i + 2])) for i in range(2))

    if np.all(U_l[0::2] >= VACUUM_DENSITY) and np.all(U_r[0::2] >= VACUUM_DENSITY):
        consistency = max(
            float(np.max(np.abs(roe_matrix(roe_average(U, U, law), law) - jacobian(U, law))))
            for U in (U_l, U_r)
        )
    else:
        consistency = float("nan")

    full = conservation_residual(U_l, U_r, law)
    half = conservation_residual(U_l, U_l + 0.5 * (U_r - U_l), law)
    r_full = float(np.max(np.abs(full)))
    r_half = float(np.max(np.abs(half)))
    if r_full > RESIDUAL_FLOOR and r_half > 0.0:
        ratio: Optional[float] = r_full / r_half
        order: Optional[float] = math.log2(ratio)
    else:
        ratio = order = None

    dU = U_r - U_l
    reconstruction = float(np.max(np.abs(dU - avg.eigenvectors @ avg.strengths)))

    Z_mean = 0.5 * (parameter_vector(U_l) + parameter_vector(U_r))
    B_bar = parameter_jacobian_b(Z_mean)
    C_bar = parameter_flux_c(Z_mean, law)
    try:
        gap = float(np.max(np.abs(C_bar @ np.linalg.inv(B_bar) - A)))
    except np.linalg.LinAlgError:
        gap = float("nan")

    report = RoePropertyReport(
        eigenvalues_real=real,
        block_determinants=blocks,  # type: ignore[arg-type]
        eigenvector_determinant=float(np.linalg.det(avg.eigenvectors)),
        consistency_error=consistency,
        conservation_residual=r_full,
        conservation_residual_half=r_half,
        conservation_ratio=ratio,
        observed_order=order,
        mass_residual=float(np.max(np.abs(full[0::2]))),
        reconstruction_error=reconstruction,
        parameter_form_gap=gap,
    )
    log.debug(
        "roe_properties hyperbolic=%s consistency=%.3g residual=%.3g ratio=%s",
        report.hyperbolic, consistency, r_full, ratio,
    )
    return report
