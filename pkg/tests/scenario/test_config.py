"""
Scenario documents: shipped files, defaults, strict validation and the
serialize -> parse round trip.
"""

import logging

import orjson
import pytest

from hetero_traffic.errors import ConfigError, ScenarioParseError, ScenarioValidationError
from hetero_traffic.scenario.config import (
    load_defaults,
    load_scenario,
    parse_scenario,
    scenario_from_document,
    serialize_scenario,
    validate_snapshots,
    with_snapshots,
)
from tests.conftest import CAR_SPEC, MOTORCYCLE_SPEC, SCENARIO_DIR

LOG = logging.getLogger(__name__)


@pytest.mark.parametrize(
    "name, delta, segments",
    [
        ("freeway_d20", 0.2, [(0, 100, 0.1), (100, 200, 0.2)]),
        ("freeway_d90", 0.9, [(0, 100, 0.1), (100, 200, 0.2)]),
        ("congested_d20", 0.2, [(0, 130, 0.3), (130, 180, 0.6), (180, 200, 0.1)]),
        ("congested_d90", 0.9, [(0, 130, 0.3), (130, 180, 0.6), (180, 200, 0.1)]),
    ],
)
def test_shipped_scenarios(name, delta, segments):
    LOG.info("Start test_shipped_scenarios")
    config = load_scenario(SCENARIO_DIR / f"{name}.json")
    assert config.name == name
    assert config.mix.delta == delta
    assert config.grid.cells == 40 and config.grid.dx == 5.0
    assert config.time.dt == 0.05 and config.time.duration == 60.0
    assert config.snapshots == (0.0, 1.0, 20.0, 40.0, 60.0)
    assert [(s.start, s.end, s.rho) for s in config.initial] == segments
    assert config.classes.motorcycle == MOTORCYCLE_SPEC
    assert config.classes.car == CAR_SPEC


def test_defaults_fill_missing_sections(scenario_doc):
    config = scenario_from_document(scenario_doc)
    assert config.classes.car == CAR_SPEC
    # motorcycle width defaults to a third of the car width
    assert config.classes.motorcycle.width == pytest.approx(1.6 / 3.0)
    assert config.solver.entropy_mode == "harten-hyman"
    assert config.solver.source_enabled is True
    assert config.output.formats == ("csv", "trace", "svg")
    assert config.time.cfl_max == 1.0


def test_packaged_defaults():
    defaults = load_defaults()
    assert defaults.k_grid == (0.01, 0.05, 0.1, 0.5, 1.0)
    assert defaults.trials == 1000 and defaults.seed == 0


def test_missing_defaults_file_raises(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_defaults(tmp_path / "nope.toml")


def test_malformed_defaults_file_raises(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("[classes\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_defaults(path)


def test_round_trip_is_exact(scenario_doc):
    config = scenario_from_document(scenario_doc)
    text = serialize_scenario(config)
    again = parse_scenario(text)
    assert again == config
    assert serialize_scenario(again) == text


def test_invalid_json_reports_position():
    with pytest.raises(ScenarioParseError) as excinfo:
        parse_scenario(b'{"name": "x",\n  "road": }')
    assert excinfo.value.line == 2
    assert excinfo.value.column is not None


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda d: d.update(extra=1), "extra"),
        (lambda d: d["road"].update(lanes=3), "road.lanes"),
        (lambda d: d["road"].pop("cells"), "road.cells"),
        (lambda d: d["road"].update(cells=2), "road.cells"),
        (lambda d: d["road"].update(width=-1), "road.width"),
        (lambda d: d["time"].update(dt="fast"), "time.dt"),
        (lambda d: d["time"].update(snapshots=[0, 5]), "time.snapshots[1]"),
        (lambda d: d["mix"].update(delta=1.0), "mix.delta"),
        (lambda d: d["initial"]["segments"][1].update(rho=1.5), "initial.segments[1].rho"),
        (lambda d: d["initial"]["segments"][0].update(to=90), "initial.segments"),
        (lambda d: d["initial"]["segments"][1].update(to=190), "initial.segments"),
        (lambda d: d.update(solver={"entropy_fix": "bogus"}), "solver"),
        (lambda d: d.update(output={"formats": ["pdf"]}), "output.formats"),
        (lambda d: d.update(classes={"car": {"ao_max": 1.5}}), "classes.car"),
        (lambda d: d.pop("mix"), "mix"),
    ],
)
def test_validation_errors_name_the_field(scenario_doc, mutate, field):
    mutate(scenario_doc)
    with pytest.raises(ScenarioValidationError) as excinfo:
        parse_scenario(orjson.dumps(scenario_doc))
    assert excinfo.value.field == field


def test_single_class_mix_explains_itself(scenario_doc):
    scenario_doc["mix"]["delta"] = 0.0
    with pytest.raises(ScenarioValidationError, match="unstable"):
        scenario_from_document(scenario_doc)


def test_overlapping_segments_are_rejected(scenario_doc):
    scenario_doc["initial"]["segments"][1]["from"] = 90
    with pytest.raises(ScenarioValidationError, match="overlapping"):
        scenario_from_document(scenario_doc)


def test_validation_error_is_a_config_error(scenario_doc):
    scenario_doc["road"]["length"] = 0
    with pytest.raises(ConfigError):
        scenario_from_document(scenario_doc)


def test_snapshots_are_sorted_and_deduplicated():
    assert validate_snapshots([1.0, 0, 0.5, 1], 1.0) == (0.0, 0.5, 1.0)
    with pytest.raises(ScenarioValidationError):
        validate_snapshots([True], 1.0)


def test_with_snapshots_replaces_times(scenario_doc):
    config = with_snapshots(scenario_from_document(scenario_doc), [1.0, 0.25])
    assert config.snapshots == (0.25, 1.0)
    with pytest.raises(ScenarioValidationError):
        with_snapshots(config, [2.0])


def test_missing_scenario_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_scenario(tmp_path / "missing.json")
