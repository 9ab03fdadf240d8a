"""
Conversions between primitive (rho, v) and conserved (rho, X) states, and the
relaxation source term.

Arrays have a trailing axis of length 4 in canonical order; any leading shape
is allowed, so a whole grid of shape (J, 4) converts in one call. Dataclass
cells are accepted too and come back as dataclass cells.
"""

from __future__ import annotations
import logging
from typing import Optional, Union

import numpy as np

from hetero_traffic.errors import NonphysicalStateError
from hetero_traffic.model.constitutive import equilibrium_velocity, pressure
from hetero_traffic.model.types import (
    CLASS_IDS,
    ClassPair,
    ConservedCell,
    MixSpec,
    PressureLaw,
    PrimitiveCell,
)

log = logging.getLogger(__name__)

VACUUM_DENSITY = 1e-10
NEGATIVE_VELOCITY_TOLERANCE = 1e-9


def _first_bad_cell(mask: np.ndarray) -> Optional[int]:
    if mask.ndim == 0:
        return None
    idx = np.argwhere(mask)
    return int(idx[0][0]) if idx.size else None


def primitive_to_conserved(
    prim: Union[PrimitiveCell, np.ndarray], law: PressureLaw
) -> Union[ConservedCell, np.ndarray]:
    """X_i = rho_i (v_i + p_i(rho_i)); densities are copied unchanged."""
    if isinstance(prim, PrimitiveCell):
        return ConservedCell.from_array(primitive_to_conserved(prim.as_array(), law))
    w = np.asarray(prim, dtype=float)
    out = w.copy()
    for i in range(2):
        rho = w[..., 2 * i]
        out[..., 2 * i + 1] = rho * (w[..., 2 * i + 1] + pressure(rho, law.psi[i], law.gamma[i]))
    return out


def conserved_to_primitive(
    cons: Union[ConservedCell, np.ndarray],
    law: PressureLaw,
    eps_vac: float = VACUUM_DENSITY,
) -> Union[PrimitiveCell, np.ndarray]:
    """
    Recover velocities v_i = X_i / rho_i - p_i.

    Densities below eps_vac are vacuum (v = 0, and densities in [-eps_vac, 0)
    are snapped to 0). Velocities in (-1e-9, 0) are clamped to 0; anything
    more negative, or a density below -eps_vac, raises NonphysicalStateError.
    """
    if isinstance(cons, ConservedCell):
        return PrimitiveCell.from_array(conserved_to_primitive(cons.as_array(), law, eps_vac))
    u = np.asarray(cons, dtype=float)
    out = np.empty_like(u)
    for i, class_id in enumerate(CLASS_IDS):
        rho = u[..., 2 * i]
        x = u[..., 2 * i + 1]
        negative = rho < -eps_vac
        if np.any(negative):
            cell = _first_bad_cell(negative)
            raise NonphysicalStateError(
                f"negative {class_id} density {float(np.min(rho)):.6g}", cell=cell, class_id=class_id
            )
        occupied = rho >= eps_vac
        safe_rho = np.where(occupied, rho, 1.0)
        v = np.where(occupied, x / safe_rho - pressure(np.where(occupied, rho, 0.0), law.psi[i], law.gamma[i]), 0.0)
        bad = v <= -NEGATIVE_VELOCITY_TOLERANCE
        if np.any(bad):
            cell = _first_bad_cell(bad)
            raise NonphysicalStateError(
                f"negative {class_id} velocity {float(np.min(v)):.6g}", cell=cell, class_id=class_id
            )
        # "+ 0.0" turns -0.0 into 0.0
        out[..., 2 * i] = np.where(occupied, rho, 0.0) + 0.0
        out[..., 2 * i + 1] = np.maximum(v, 0.0) + 0.0
    return out


def relaxation_source(
    prim: Union[PrimitiveCell, np.ndarray], classes: ClassPair, mix: MixSpec
) -> np.ndarray:
    """S = (0, rho_m (v_e,m - v_m) / tau_m, 0, rho_c (v_e,c - v_c) / tau_c)."""
    w = prim.as_array() if isinstance(prim, PrimitiveCell) else np.asarray(prim, dtype=float)
    s = np.zeros_like(w)
    for i, class_id in enumerate(CLASS_IDS):
        rho = w[..., 2 * i]
        v_e = equilibrium_velocity(rho, class_id, classes, mix)
        s[..., 2 * i + 1] = rho * (v_e - w[..., 2 * i + 1]) / classes[class_id].relaxation_time
    return s
