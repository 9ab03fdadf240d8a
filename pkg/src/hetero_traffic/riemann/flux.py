"""
Exact flux, Jacobian and eigenstructure of the two-class system.

The system is block-diagonal: each class contributes an independent 2x2 block
acting on (rho_i, X_i). Eigenpairs are returned in canonical order
(motorcycle acoustic, motorcycle contact, car acoustic, car contact) where
acoustic means lambda = v - gamma p with r = (1, v + p) and contact means
lambda = v with r = (1, v + (1 + gamma) p).
"""

from __future__ import annotations
import logging
from typing import Tuple

import numpy as np

from hetero_traffic.errors import SingularStateError
from hetero_traffic.model.state import VACUUM_DENSITY
from hetero_traffic.model.types import CLASS_IDS, PressureLaw

log = logging.getLogger(__name__)


def _split(U: np.ndarray, i: int) -> Tuple[np.ndarray, np.ndarray]:
    return U[..., 2 * i], U[..., 2 * i + 1]


def _class_pressure(rho: np.ndarray, law: PressureLaw, i: int) -> np.ndarray:
    return np.power(law.psi[i] * np.maximum(rho, 0.0), law.gamma[i])


def _require_occupied(U: np.ndarray, eps_vac: float) -> None:
    for i, class_id in enumerate(CLASS_IDS):
        if np.any(U[..., 2 * i] < eps_vac):
            raise SingularStateError(f"{class_id} density below vacuum floor {eps_vac:g}")


def physical_flux(U: np.ndarray, law: PressureLaw, eps_vac: float = VACUUM_DENSITY) -> np.ndarray:
    """f = (X - rho p, X^2/rho - p X) per class; vacuum carries no flux."""
    U = np.asarray(U, dtype=float)
    f = np.zeros_like(U)
    for i in range(2):
        rho, X = _split(U, i)
        occupied = rho >= eps_vac
        p = _class_pressure(rho, law, i)
        w = np.where(occupied, X / np.where(occupied, rho, 1.0), 0.0)
        f[..., 2 * i] = np.where(occupied, X - rho * p, 0.0)
        f[..., 2 * i + 1] = np.where(occupied, X * w - p * X, 0.0)
    return f


def jacobian(U: np.ndarray, law: PressureLaw, eps_vac: float = VACUUM_DENSITY) -> np.ndarray:
    """Exact flux Jacobian dF/dU, shape (..., 4, 4), block-diagonal."""
    U = np.asarray(U, dtype=float)
    _require_occupied(U, eps_vac)
    B = np.zeros(U.shape + (4,))
    for i in range(2):
        rho, X = _split(U, i)
        gamma = law.gamma[i]
        p = _class_pressure(rho, law, i)
        w = X / rho
        k = 2 * i
        B[..., k, k] = -(gamma + 1.0) * p
        B[..., k, k + 1] = 1.0
        B[..., k + 1, k] = -(w * w + gamma * p * w)
        B[..., k + 1, k + 1] = 2.0 * w - p
    return B


def class_eigenvalues(w: np.ndarray, p: np.ndarray, gamma: float) -> Tuple[np.ndarray, np.ndarray]:
    """(acoustic, contact) eigenvalues of one class block given w = v + p."""
    v = w - p
    return v - gamma * p, v


def eigenstructure(
    U: np.ndarray, law: PressureLaw, eps_vac: float = VACUUM_DENSITY
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigenvalues (..., 4) and right eigenvectors as matrix columns (..., 4, 4).
    """
    U = np.asarray(U, dtype=float)
    _require_occupied(U, eps_vac)
    lam = np.zeros(U.shape)
    R = np.zeros(U.shape + (4,))
    for i in range(2):
        rho, X = _split(U, i)
        p = _class_pressure(rho, law, i)
        w = X / rho
        k = 2 * i
        lam[..., k], lam[..., k + 1] = class_eigenvalues(w, p, law.gamma[i])
        R[..., k, k] = 1.0
        R[..., k + 1, k] = w
        R[..., k, k + 1] = 1.0
        R[..., k + 1, k + 1] = w + law.gamma[i] * p
    return lam, R


def cell_eigenvalues(U: np.ndarray, law: PressureLaw, eps_vac: float = VACUUM_DENSITY) -> np.ndarray:
    """
    Eigenvalues of every cell, vacuum-safe: a vacuum class gets lambda = 0 on
    both of its waves. Used for CFL numbers and one-sided entropy fix speeds.
    """
    U = np.asarray(U, dtype=float)
    lam = np.zeros(U.shape)
    for i in range(2):
        rho, X = _split(U, i)
        occupied = rho >= eps_vac
        p = _class_pressure(rho, law, i)
        w = np.where(occupied, X / np.where(occupied, rho, 1.0), 0.0)
        a, c = class_eigenvalues(w, p, law.gamma[i])
        lam[..., 2 * i] = np.where(occupied, a, 0.0)
        lam[..., 2 * i + 1] = np.where(occupied, c, 0.0)
    return lam
