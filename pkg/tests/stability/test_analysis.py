"""
Linear stability: closed-form conditions, growth-rate roots and the map sweep.
"""

import logging
import math

import numpy as np
import pytest

from hetero_traffic.errors import ConfigError
from hetero_traffic.model.types import CAR, CLASS_IDS, MOTORCYCLE, MixSpec
from hetero_traffic.stability.analysis import (
    MAP_COLUMNS,
    PerturbationSpec,
    block_determinant,
    block_roots,
    class_block,
    class_stability_condition,
    complex_sqrt,
    conjugate_roots,
    growth_rates,
    root_residual,
    spectral_verdict,
    stability_map,
    subcharacteristic_condition,
)

LOG = logging.getLogger(__name__)


def test_reference_condition_values(classes, mix):
    LOG.info("Start test_reference_condition_values")
    cond = class_stability_condition(MOTORCYCLE, 0.2, mix, classes)
    assert cond.lhs == pytest.approx(-28.64, abs=0.01)
    assert cond.rhs == pytest.approx(-0.2503, abs=5e-4)
    assert cond.stable
    assert cond.margin == pytest.approx(cond.lhs - cond.rhs)


def test_subcharacteristic_condition_flips_the_inequality(classes, mix):
    for class_id in CLASS_IDS:
        a = class_stability_condition(class_id, 0.4, mix, classes)
        b = subcharacteristic_condition(class_id, 0.4, mix, classes)
        assert (a.lhs, a.rhs) == (b.lhs, b.rhs)
        assert a.stable != b.stable


@pytest.mark.parametrize(
    "R, I",
    [(4.0, 0.0), (-4.0, 0.0), (3.0, 4.0), (3.0, -4.0), (-1.0, 1e-3), (0.0, 2.0), (-2.5, -7.1)],
)
def test_complex_sqrt_is_the_principal_root(R, I):
    z = complex_sqrt(R, I)
    assert z * z == pytest.approx(complex(R, I), abs=1e-12)
    assert z.real >= 0.0


def test_complex_sqrt_branch_on_the_negative_axis():
    assert complex_sqrt(-4.0, 0.0) == pytest.approx(2j)


@pytest.mark.parametrize("k", [0.01, 0.05, 0.1, 0.5, 1.0, -0.3])
@pytest.mark.parametrize("class_id", CLASS_IDS)
def test_roots_solve_the_dispersion_relation(classes, mix, k, class_id):
    spec = PerturbationSpec.at_equilibrium(k, 0.35, classes, mix)
    block = class_block(spec, class_id, classes, mix)
    for r in block_roots(block):
        assert root_residual(r, block) <= 1e-10
        assert abs(block_determinant(r, block)) <= 1e-9


@pytest.mark.parametrize("k", [0.01, 0.5, -2.0])
@pytest.mark.parametrize("rho0", [0.15, 0.35, 0.7])
@pytest.mark.parametrize("class_id", CLASS_IDS)
def test_roots_match_a_polynomial_solver(classes, mix, k, rho0, class_id):
    block = class_block(PerturbationSpec.at_equilibrium(k, rho0, classes, mix), class_id, classes, mix)
    ik = 1j * block.k
    # s^2 + (1/tau + ik rho p') s - ik rho psi v_e' / tau = 0, with r = s - ik v_0
    coeffs = [
        1.0,
        1.0 / block.tau + ik * block.rho0 * block.dp_drho,
        -ik * block.rho0 * block.psi * block.dve_dao / block.tau,
    ]
    reference = np.roots(coeffs) - ik * block.v0
    ours = np.array(block_roots(block))
    for r in ours:
        assert np.min(np.abs(reference - r)) <= 1e-9
    for r in reference:
        assert np.min(np.abs(ours - r)) <= 1e-9


@pytest.mark.parametrize("class_id", CLASS_IDS)
def test_long_wave_limit_roots(classes, mix, class_id):
    tau = classes[class_id].relaxation_time
    for k in (1e-4, 1e-6):
        block = class_block(PerturbationSpec.at_equilibrium(k, 0.3, classes, mix), class_id, classes, mix)
        r1, r2 = block_roots(block)
        assert abs(r1) <= 1e3 * k
        assert abs(r2 + 1.0 / tau) <= 1e3 * k


def test_roots_are_ordered_by_real_part(classes, mix):
    spec = PerturbationSpec.at_equilibrium(0.5, 0.3, classes, mix)
    r1, r2 = block_roots(class_block(spec, CAR, classes, mix))
    assert r1.real >= r2.real


def test_mirrored_wavenumber_gives_conjugate_roots(classes, mix):
    spec = PerturbationSpec.at_equilibrium(0.1, 0.3, classes, mix)
    block = class_block(spec, MOTORCYCLE, classes, mix)
    roots = sorted(block_roots(block), key=lambda r: r.real)
    mirrored = sorted(conjugate_roots(block), key=lambda r: r.real)
    for a, b in zip(roots, mirrored):
        assert a.conjugate() == pytest.approx(b, abs=1e-12)


def test_growth_rates_has_two_roots_per_class(classes, mix):
    rates = growth_rates(PerturbationSpec.at_equilibrium(0.1, 0.3, classes, mix), classes, mix)
    assert rates.shape == (4,)
    assert rates.dtype == complex


@pytest.mark.parametrize("delta", [0.2, 0.5, 0.9])
@pytest.mark.parametrize("rho0", [0.1, 0.3, 0.6, 0.9])
def test_spectral_verdict_agrees_with_subcharacteristic_condition(classes, delta, rho0):
    LOG.info("Start test_spectral_verdict_agrees_with_subcharacteristic_condition")
    mix = MixSpec(delta=delta, road_width=12.0)
    for class_id in CLASS_IDS:
        expected = subcharacteristic_condition(class_id, rho0, mix, classes).stable
        for k in (0.01, 0.1, 1.0):
            spec = PerturbationSpec.at_equilibrium(k, rho0, classes, mix)
            worst = max(r.real for r in block_roots(class_block(spec, class_id, classes, mix)))
            assert (worst <= 1e-12) == expected


def test_reference_parameters_grow_slowly_at_long_wavelengths(classes):
    mix = MixSpec(delta=0.2, road_width=12.0)
    spec = PerturbationSpec.at_equilibrium(0.03, 0.15, classes, mix)
    assert not spectral_verdict(spec, classes, mix)
    worst = max(r.real for r in block_roots(class_block(spec, CAR, classes, mix)))
    assert 0.0 < worst < 0.05


def test_stability_map_table_and_disagreements(classes, caplog):
    caplog.set_level(logging.WARNING, logger="hetero_traffic.stability.analysis")
    result = stability_map([0.2, 0.9], [0.2, 0.5], [0.05, 1.0], classes, 12.0)
    assert list(result.table.columns) == MAP_COLUMNS
    assert len(result.table) == 2 * 2 * 2 * 2
    row = result.table[(result.table["delta"] == 0.2) & (result.table["rho0"] == 0.2)].iloc[0]
    assert row["class"] == MOTORCYCLE
    assert row["lhs"] == pytest.approx(-28.64, abs=0.01)
    # closed form says stable while the roots grow at every point of this grid
    assert len(result.disagreements) == 2 * 2 * 2
    assert not result.disagreements["spectral_stable"].any()
    assert (result.disagreements["spectral_stable"] == result.disagreements["subcharacteristic_stable"]).all()
    assert "disagreements=8" in caplog.text


@pytest.mark.parametrize(
    "deltas, rhos, ks",
    [([], [0.2], [0.1]), ([0.0], [0.2], [0.1]), ([0.2], [-0.1], [0.1]), ([0.2], [0.2], [0.0])],
)
def test_stability_map_rejects_bad_grids(classes, deltas, rhos, ks):
    with pytest.raises(ConfigError):
        stability_map(deltas, rhos, ks, classes, 12.0)


def test_zero_wavenumber_is_rejected():
    with pytest.raises(ConfigError):
        PerturbationSpec(k=0.0, rho_m0=0.1, rho_c0=0.1, v_m0=1.0, v_c0=1.0)
    with pytest.raises(ConfigError):
        PerturbationSpec(k=math.inf, rho_m0=0.1, rho_c0=0.1, v_m0=1.0, v_c0=1.0)


def test_perturbation_at_equilibrium_uses_equilibrium_speeds(classes, mix):
    spec = PerturbationSpec.at_equilibrium(0.1, 0.2, classes, mix)
    assert spec.rho_m0 == pytest.approx(0.04)
    assert spec.v_m0 == pytest.approx(9.854, abs=1e-3)
    assert spec.v_c0 == pytest.approx(12.149, abs=1e-3)
    assert np.isfinite([spec.k, spec.rho_c0]).all()
