"""
Roe linearization across a cell interface and the resulting upwind flux.

Averages per class:
    w_bar = (X_l/sqrt(rho_l) + X_r/sqrt(rho_r)) / (sqrt(rho_l) + sqrt(rho_r))   (= v_bar + p_bar)
    p_bar = (psi (rho_l + rho_r) / 2) ** gamma
    v_bar = w_bar - p_bar
The Roe matrix is built from (w_bar, p_bar) so its eigenvalues are exactly
{v_bar - gamma p_bar, v_bar}. A vacuum side drops out of the sqrt-weighted
mean; a class vacuous on both sides contributes nothing to the flux.
"""

from __future__ import annotations
import logging
from dataclasses import dataclass, replace
from typing import Literal, Optional, Tuple

import numpy as np

from hetero_traffic.errors import ConfigError
from hetero_traffic.model.state import VACUUM_DENSITY
from hetero_traffic.model.types import PressureLaw
from hetero_traffic.riemann.flux import cell_eigenvalues, physical_flux

log = logging.getLogger(__name__)

EntropyMode = Literal["harten-hyman", "paper-literal", "none"]
ENTROPY_MODES: Tuple[str, ...] = ("harten-hyman", "paper-literal", "none")
DEFAULT_ENTROPY_MODE: EntropyMode = "harten-hyman"

# Below this averaged pressure a class jump is resolved as a pure contact.
DEGENERATE_PRESSURE = 1e-12


def check_entropy_mode(mode: str) -> str:
    if mode not in ENTROPY_MODES:
        raise ConfigError(f"unknown entropy fix mode {mode!r}; expected one of {ENTROPY_MODES}")
    return mode


@dataclass(frozen=True)
class RoeInterfaceData:
    """
    Interface averages, per class arrays of shape (..., 2) and per wave (..., 4).

    alpha_bar and beta_bar are the arithmetic means of the parameter vector
    components sqrt(rho) and X/sqrt(rho); w_bar = beta_bar / alpha_bar.
    """
    alpha_bar: np.ndarray
    beta_bar: np.ndarray
    w_bar: np.ndarray
    p_bar: np.ndarray
    v_bar: np.ndarray
    gamma: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    vacuum: np.ndarray
    strengths: Optional[np.ndarray] = None


def _parameter_halves(rho: np.ndarray, X: np.ndarray, eps_vac: float) -> Tuple[np.ndarray, np.ndarray]:
    occupied = rho >= eps_vac
    root = np.sqrt(np.where(occupied, rho, 0.0))
    q = np.where(occupied, X / np.where(occupied, root, 1.0), 0.0)
    return root, q


def roe_average(
    U_l: np.ndarray, U_r: np.ndarray, law: PressureLaw, eps_vac: float = VACUUM_DENSITY
) -> RoeInterfaceData:
    U_l = np.asarray(U_l, dtype=float)
    U_r = np.asarray(U_r, dtype=float)
    shape = np.broadcast_shapes(U_l.shape, U_r.shape)
    U_l = np.broadcast_to(U_l, shape)
    U_r = np.broadcast_to(U_r, shape)
    lead = shape[:-1]

    alpha = np.zeros(lead + (2,))
    beta = np.zeros(lead + (2,))
    w_bar = np.zeros(lead + (2,))
    p_bar = np.zeros(lead + (2,))
    vacuum = np.zeros(lead + (2,), dtype=bool)
    lam = np.zeros(shape)
    R = np.zeros(shape + (4,))
    gamma = np.asarray(law.gamma, dtype=float)

    for i in range(2):
        k = 2 * i
        root_l, q_l = _parameter_halves(U_l[..., k], U_l[..., k + 1], eps_vac)
        root_r, q_r = _parameter_halves(U_r[..., k], U_r[..., k + 1], eps_vac)
        a = 0.5 * (root_l + root_r)
        b = 0.5 * (q_l + q_r)
        empty = a == 0.0
        w = np.where(empty, 0.0, b / np.where(empty, 1.0, a))
        rho_mean = 0.5 * (np.maximum(U_l[..., k], 0.0) + np.maximum(U_r[..., k], 0.0))
        p = np.where(empty, 0.0, np.power(law.psi[i] * rho_mean, gamma[i]))

        alpha[..., i], beta[..., i], w_bar[..., i], p_bar[..., i], vacuum[..., i] = a, b, w, p, empty
        v = w - p
        lam[..., k] = v - gamma[i] * p
        lam[..., k + 1] = v
        R[..., k, k] = 1.0
        R[..., k + 1, k] = w
        R[..., k, k + 1] = 1.0
        R[..., k + 1, k + 1] = w + gamma[i] * p

    return RoeInterfaceData(
        alpha_bar=alpha,
        beta_bar=beta,
        w_bar=w_bar,
        p_bar=p_bar,
        v_bar=w_bar - p_bar,
        gamma=gamma,
        eigenvalues=lam,
        eigenvectors=R,
        vacuum=vacuum,
    )


def roe_matrix(avg: RoeInterfaceData, law: PressureLaw) -> np.ndarray:
    """Block-diagonal Roe matrix; equals the exact Jacobian when both states coincide."""
    lead = avg.w_bar.shape[:-1]
    A = np.zeros(lead + (4, 4))
    for i in range(2):
        k = 2 * i
        g = law.gamma[i]
        w = avg.w_bar[..., i]
        p = avg.p_bar[..., i]
        A[..., k, k] = -(1.0 + g) * p
        A[..., k, k + 1] = 1.0
        A[..., k + 1, k] = -(w * w + g * p * w)
        A[..., k + 1, k + 1] = 2.0 * w - p
    return A


def wave_strengths(U_l: np.ndarray, U_r: np.ndarray, avg: RoeInterfaceData) -> np.ndarray:
    """
    Coefficients s with U_r - U_l = sum_k s_k r_bar_k, canonical wave order.

    Classes with p_bar <= 1e-12 are resolved as a pure contact jump; classes
    vacuous on both sides get zero strengths.
    """
    dU = np.asarray(U_r, dtype=float) - np.asarray(U_l, dtype=float)
    s = np.zeros(dU.shape)
    for i in range(2):
        k = 2 * i
        d_rho = dU[..., k]
        d_x = dU[..., k + 1]
        gp = avg.gamma[i] * avg.p_bar[..., i]
        degenerate = avg.p_bar[..., i] <= DEGENERATE_PRESSURE
        contact = np.where(degenerate, d_rho, (d_x - avg.w_bar[..., i] * d_rho) / np.where(degenerate, 1.0, gp))
        empty = avg.vacuum[..., i]
        s[..., k + 1] = np.where(empty, 0.0, contact)
        s[..., k] = np.where(empty, 0.0, d_rho - s[..., k + 1])
    return s


def entropy_fixed_eigenvalues(
    lam_l: np.ndarray, lam_bar: np.ndarray, lam_r: np.ndarray, mode: str = DEFAULT_ENTROPY_MODE
) -> np.ndarray:
    """
    Non-negative wave speeds used in the upwind dissipation.

    delta = max(0, lam_bar - lam_l, lam_r - lam_bar);
    harten-hyman -> max(|lam_bar|, delta), paper-literal -> delta, none -> |lam_bar|.
    """
    check_entropy_mode(mode)
    lam_bar = np.asarray(lam_bar, dtype=float)
    magnitude = np.abs(lam_bar)
    if mode == "none":
        return magnitude
    delta = np.maximum(0.0, np.maximum(lam_bar - np.asarray(lam_l, dtype=float), np.asarray(lam_r, dtype=float) - lam_bar))
    if mode == "paper-literal":
        return delta
    return np.maximum(magnitude, delta)


def _one_sided_speeds(U: np.ndarray, lam_bar: np.ndarray, law: PressureLaw, eps_vac: float) -> np.ndarray:
    lam = cell_eigenvalues(U, law, eps_vac)
    occupied = np.repeat(U[..., 0::2] >= eps_vac, 2, axis=-1)
    return np.where(occupied, lam, lam_bar)


def numerical_flux(
    U_l: np.ndarray,
    U_r: np.ndarray,
    law: PressureLaw,
    entropy_mode: str = DEFAULT_ENTROPY_MODE,
    eps_vac: float = VACUUM_DENSITY,
) -> np.ndarray:
    """Roe flux F = (f_l + f_r)/2 - 1/2 sum_k s_k lam_tilde_k r_bar_k, broadcast over interfaces."""
    check_entropy_mode(entropy_mode)
    U_l = np.asarray(U_l, dtype=float)
    U_r = np.asarray(U_r, dtype=float)
    avg = roe_average(U_l, U_r, law, eps_vac)
    s = wave_strengths(U_l, U_r, avg)
    lam_tilde = entropy_fixed_eigenvalues(
        _one_sided_speeds(U_l, avg.eigenvalues, law, eps_vac),
        avg.eigenvalues,
        _one_sided_speeds(U_r, avg.eigenvalues, law, eps_vac),
        entropy_mode,
    )
    dissipation = np.einsum("...jk,...k->...j", avg.eigenvectors, s * lam_tilde)
    return 0.5 * (physical_flux(U_l, law, eps_vac) + physical_flux(U_r, law, eps_vac)) - 0.5 * dissipation


def dissipation_matrix(avg: RoeInterfaceData, lam_tilde: np.ndarray) -> np.ndarray:
    """Matrix form e |Gamma| e^-1 of the upwind dissipation (needs p_bar > 0 in every class)."""
    R = avg.eigenvectors
    return np.einsum("...ij,...j,...jk->...ik", R, lam_tilde, np.linalg.inv(R))


def with_strengths(avg: RoeInterfaceData, U_l: np.ndarray, U_r: np.ndarray) -> RoeInterfaceData:
    """Copy of the averages carrying the wave strengths of this jump."""
    return replace(avg, strengths=wave_strengths(U_l, U_r, avg))
