"""
Whole runs: snapshot timing, determinism, conservation, abort handling and the
four shipped scenarios.
"""

import functools
import logging

import numpy as np
import pytest

from hetero_traffic.errors import BlowUpError
from hetero_traffic.integrator.runner import SimulationAborted, SimulationTrace, run_scenario
from hetero_traffic.scenario.config import load_scenario, scenario_from_document
from tests.conftest import SCENARIO_DIR

LOG = logging.getLogger(__name__)


def test_fixed_step_snapshots_land_on_requested_times(scenario_doc):
    LOG.info("Start test_fixed_step_snapshots_land_on_requested_times")
    trace = run_scenario(scenario_from_document(scenario_doc))
    assert [s.time for s in trace.snapshots] == [0.0, 0.5, 1.0]
    assert len(trace.diagnostics) == 20
    assert trace.diagnostics[-1].time == pytest.approx(1.0)
    assert trace.aborted_step is None


def test_zero_duration_yields_only_the_initial_snapshot(scenario_doc):
    scenario_doc["time"] = {"dt": 0.05, "duration": 0, "snapshots": [0]}
    trace = run_scenario(scenario_from_document(scenario_doc))
    assert [s.time for s in trace.snapshots] == [0.0]
    assert trace.diagnostics == []


def test_initial_snapshot_is_segment_data_at_equilibrium(scenario_doc):
    trace = run_scenario(scenario_from_document(scenario_doc))
    first = trace.snapshots[0]
    np.testing.assert_allclose(first.x[:2], [2.5, 7.5])
    np.testing.assert_allclose(first.rho_m + first.rho_c, np.where(first.x < 100, 0.1, 0.2))
    assert np.all(first.v_c > first.v_m)


def test_runs_are_bit_identical(scenario_doc):
    config = scenario_from_document(scenario_doc)
    a = run_scenario(config)
    b = run_scenario(config)
    for sa, sb in zip(a.snapshots, b.snapshots):
        np.testing.assert_array_equal(sa.primitive, sb.primitive)


def test_class_densities_are_conserved(scenario_doc):
    scenario_doc["initial"]["segments"] = [
        {"from": 0, "to": 130, "rho": 0.3},
        {"from": 130, "to": 180, "rho": 0.6},
        {"from": 180, "to": 200, "rho": 0.1},
    ]
    scenario_doc["time"] = {"dt": 0.05, "duration": 5.0, "snapshots": [0, 5]}
    trace = run_scenario(scenario_from_document(scenario_doc))
    first, last = trace.snapshots
    for col in (0, 2):
        start = first.primitive[:, col].sum()
        assert abs(last.primitive[:, col].sum() - start) <= 1e-12 * start


def test_adaptive_mode_hits_snapshot_times_exactly(scenario_doc):
    scenario_doc["solver"] = {"adaptive": True}
    scenario_doc["time"] = {"dt": 0.05, "duration": 2.0, "cfl_max": 0.5, "snapshots": [0, 0.3, 2.0]}
    trace = run_scenario(scenario_from_document(scenario_doc))
    assert [s.time for s in trace.snapshots] == [0.0, 0.3, 2.0]
    assert max(d.cfl for d in trace.diagnostics) <= 0.5 + 1e-12
    # the step is stretched to the CFL limit, well beyond the nominal dt
    assert max(d.dt for d in trace.diagnostics) > 0.05


def test_node_convention_reports_left_edges(scenario_doc):
    scenario_doc["solver"] = {"x_convention": "node"}
    trace = run_scenario(scenario_from_document(scenario_doc))
    np.testing.assert_allclose(trace.snapshots[0].x[:3], [0.0, 5.0, 10.0])


def test_blow_up_aborts_with_partial_trace(scenario_doc, mocker, caplog):
    caplog.set_level(logging.ERROR, logger="hetero_traffic.integrator.runner")
    import hetero_traffic.integrator.runner as runner_mod

    real_step = runner_mod.step
    calls = {"n": 0}

    def failing_step(*args, **kwargs):
        calls["n"] += 1
        if calls["n"] == 13:
            raise BlowUpError("negative motorcycle velocity", step=kwargs["step_index"], cell=17)
        return real_step(*args, **kwargs)

    mocker.patch.object(runner_mod, "step", side_effect=failing_step)
    with pytest.raises(SimulationAborted) as excinfo:
        run_scenario(scenario_from_document(scenario_doc))
    err = excinfo.value
    assert isinstance(err, BlowUpError)
    assert err.step == 13 and err.cell == 17
    assert isinstance(err.trace, SimulationTrace)
    assert [s.time for s in err.trace.snapshots] == [0.0, 0.5]
    assert err.trace.aborted_step == 13
    assert len(err.trace.diagnostics) == 12
    assert "run=abort" in caplog.text


def test_diagnostics_rows(scenario_doc):
    trace = run_scenario(scenario_from_document(scenario_doc))
    row = trace.diagnostics[0].as_row()
    assert list(row) == [
        "step", "time", "dt", "cfl",
        "rho_m_min", "rho_m_max", "v_m_min", "v_m_max",
        "rho_c_min", "rho_c_max", "v_c_min", "v_c_max",
    ]
    assert row["step"] == 1


@pytest.mark.parametrize(
    "snapshots, expected",
    [
        ([0.01, 0.5, 1.0], [0.0, 0.5, 1.0]),
        ([0.024, 0.026, 1.0], [0.0, 0.05, 1.0]),
        ([0, 0.524, 0.9, 1.0], [0.0, 0.5, 0.9, 1.0]),
        ([0.3, 0.96], [0.3, 0.95]),
    ],
)
def test_fixed_step_snapshots_take_the_nearest_step(scenario_doc, snapshots, expected):
    LOG.info("Start test_fixed_step_snapshots_take_the_nearest_step")
    scenario_doc["time"] = {"dt": 0.05, "duration": 1.0, "snapshots": snapshots}
    trace = run_scenario(scenario_from_document(scenario_doc))
    assert [s.time for s in trace.snapshots] == expected


def test_targets_sharing_a_step_give_one_snapshot(scenario_doc):
    scenario_doc["time"] = {"dt": 0.05, "duration": 1.0, "snapshots": [0, 0.01, 0.49, 0.5, 1.0]}
    trace = run_scenario(scenario_from_document(scenario_doc))
    assert [s.time for s in trace.snapshots] == [0.0, 0.5, 1.0]


SHIPPED = ["freeway_d20", "freeway_d90", "congested_d20", "congested_d90"]
FREEWAY = ["freeway_d20", "freeway_d90"]
V_MAX = {"m": 11.0, "c": 13.8}


@functools.lru_cache(maxsize=None)
def shipped_run(name):
    return run_scenario(load_scenario(SCENARIO_DIR / f"{name}.json"))


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_runs_reach_every_snapshot(name):
    LOG.info("Start test_shipped_runs_reach_every_snapshot %s", name)
    trace = shipped_run(name)
    assert [s.time for s in trace.snapshots] == [0.0, 1.0, 20.0, 40.0, 60.0]
    assert len(trace.diagnostics) == 1200
    assert trace.aborted_step is None


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_runs_stay_within_bounds_at_every_step(name):
    trace = shipped_run(name)
    for d in trace.diagnostics:
        row = d.as_row()
        assert row["rho_m_min"] >= 0.0 and row["rho_c_min"] >= 0.0, d.step
        # the per-class maxima bound the largest total density from above
        assert row["rho_m_max"] + row["rho_c_max"] <= 1.0, d.step
        for suffix, v_max in V_MAX.items():
            assert row[f"v_{suffix}_min"] >= 0.0, d.step
            assert row[f"v_{suffix}_max"] <= v_max + 1e-9, d.step
    for snap in trace.snapshots:
        total = snap.rho_m + snap.rho_c
        assert np.all((total >= 0.0) & (total <= 1.0))


@pytest.mark.parametrize("name", FREEWAY)
def test_freeway_runs_respect_the_cfl_bound(name):
    assert max(d.cfl for d in shipped_run(name).diagnostics) <= 13.8 * 0.05 / 5 + 1e-9


@pytest.mark.parametrize("name", FREEWAY)
def test_freeway_runs_relax_close_to_free_flow(name):
    trace = shipped_run(name)
    last = trace.snapshots[-1]
    assert last.time == 60.0
    assert float(np.min(last.v_c)) >= 0.9 * V_MAX["c"]
    assert float(np.min(last.v_m)) >= 0.9 * V_MAX["m"]
    # the two plateaus have been smeared toward each other
    first = trace.snapshots[0]
    assert np.ptp(last.rho_c) < np.ptp(first.rho_c)


@pytest.mark.parametrize("name", FREEWAY)
def test_freeway_runs_conserve_class_densities(name):
    trace = shipped_run(name)
    first, last = trace.snapshots[0], trace.snapshots[-1]
    for col in (0, 2):
        start = first.primitive[:, col].sum()
        assert abs(last.primitive[:, col].sum() - start) <= 1e-12 * start
