"""
Primitive <-> conserved conversions, vacuum handling and the relaxation source.
"""

import logging

import numpy as np
import pytest

from hetero_traffic.errors import NonphysicalStateError
from hetero_traffic.model.constitutive import equilibrium_velocity, pressure, split_density
from hetero_traffic.model.state import conserved_to_primitive, primitive_to_conserved, relaxation_source
from hetero_traffic.model.types import CAR, MOTORCYCLE, ConservedCell, PrimitiveCell

LOG = logging.getLogger(__name__)


def test_conserved_momentum_is_rho_times_v_plus_p(law):
    LOG.info("Start test_conserved_momentum_is_rho_times_v_plus_p")
    prim = np.array([0.04, 9.0, 0.16, 12.0])
    cons = primitive_to_conserved(prim, law)
    assert cons[0] == prim[0] and cons[2] == prim[2]
    assert cons[1] == pytest.approx(0.04 * (9.0 + pressure(0.04, law.psi[0], law.gamma[0])))
    assert cons[3] == pytest.approx(0.16 * (12.0 + pressure(0.16, law.psi[1], law.gamma[1])))


def test_conversion_inverts_on_a_grid(law, rng):
    prim = np.column_stack(
        [rng.uniform(1e-3, 0.9, 50), rng.uniform(0, 14, 50), rng.uniform(1e-3, 0.9, 50), rng.uniform(0, 14, 50)]
    )
    back = conserved_to_primitive(primitive_to_conserved(prim, law), law)
    np.testing.assert_allclose(back, prim, rtol=1e-12, atol=1e-12)


def test_dataclass_cells_come_back_as_cells(law):
    cell = PrimitiveCell(rho_m=0.05, v_m=8.0, rho_c=0.2, v_c=11.0)
    cons = primitive_to_conserved(cell, law)
    assert isinstance(cons, ConservedCell)
    prim = conserved_to_primitive(cons, law)
    assert isinstance(prim, PrimitiveCell)
    assert prim.v_c == pytest.approx(11.0, rel=1e-12)


def test_vacuum_decodes_to_zero_velocity(law):
    U = np.array([[0.0, 0.0, 0.2, 2.5], [5e-11, 1e-9, 0.2, 2.5], [-5e-11, 0.0, 0.2, 2.5]])
    prim = conserved_to_primitive(U, law)
    assert np.all(prim[:, 0] == 0.0)
    assert np.all(prim[:, 1] == 0.0)
    assert not np.any(np.signbit(prim[:, 0]))


def test_tiny_negative_velocity_is_clamped(law):
    p = pressure(0.2, law.psi[1], law.gamma[1])
    U = np.array([0.1, 0.1 * (5.0 + pressure(0.1, law.psi[0], law.gamma[0])), 0.2, 0.2 * (p - 5e-10)])
    prim = conserved_to_primitive(U, law)
    assert prim[3] == 0.0
    assert not np.signbit(prim[3])


def test_negative_density_reports_cell_and_class(law):
    U = np.tile(np.array([0.1, 1.0, 0.2, 3.0]), (5, 1))
    U[3, 2] = -1e-6
    with pytest.raises(NonphysicalStateError) as excinfo:
        conserved_to_primitive(U, law)
    assert excinfo.value.cell == 3
    assert excinfo.value.class_id == CAR


def test_negative_velocity_is_nonphysical(law):
    U = np.tile(np.array([0.1, 1.0, 0.2, 3.0]), (4, 1))
    U[1, 1] = 0.0
    with pytest.raises(NonphysicalStateError) as excinfo:
        conserved_to_primitive(U, law)
    assert excinfo.value.cell == 1
    assert excinfo.value.class_id == MOTORCYCLE


def test_relaxation_source_vanishes_at_equilibrium(classes, mix):
    rho_m, rho_c = split_density(np.array([0.1, 0.3, 0.6]), mix)
    prim = np.column_stack(
        [
            rho_m,
            equilibrium_velocity(rho_m, MOTORCYCLE, classes, mix),
            rho_c,
            equilibrium_velocity(rho_c, CAR, classes, mix),
        ]
    )
    np.testing.assert_array_equal(relaxation_source(prim, classes, mix), np.zeros_like(prim))


def test_relaxation_source_pulls_toward_equilibrium(classes, mix):
    prim = np.array([0.04, 0.0, 0.16, 20.0])
    s = relaxation_source(prim, classes, mix)
    assert s[0] == 0.0 and s[2] == 0.0
    v_e_m = equilibrium_velocity(0.04, MOTORCYCLE, classes, mix)
    assert s[1] == pytest.approx(0.04 * v_e_m / 2.0)
    assert s[3] < 0.0
