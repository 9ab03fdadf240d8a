"""
Test helper file.

Pytest special file for global test configuration and fixtures.
Provides the reference vehicle classes, a mix, the matching pressure law and
scenario documents small enough to run in a test.
"""
import copy
from pathlib import Path

import numpy as np
import orjson
import pytest

from hetero_traffic.model.constitutive import pressure_law
from hetero_traffic.model.types import ClassPair, MixSpec, VehicleClassSpec

REPO_ROOT = Path(__file__).resolve().parent.parent
SCENARIO_DIR = REPO_ROOT / "config" / "scenarios"

MOTORCYCLE_SPEC = VehicleClassSpec(
    length=1.8, width=1.6 / 3.0, pressure_exponent=2.23, relaxation_time=2.0, v_max=11.0, ao_max=0.85
)
CAR_SPEC = VehicleClassSpec(
    length=4.0, width=1.6, pressure_exponent=2.12, relaxation_time=2.5, v_max=13.8, ao_max=0.74
)

_BASE_DOCUMENT = {
    "name": "unit",
    "road": {"length": 200, "width": 12, "cells": 40},
    "time": {"dt": 0.05, "duration": 1.0, "snapshots": [0, 0.5, 1.0]},
    "mix": {"delta": 0.2},
    "initial": {"segments": [{"from": 0, "to": 100, "rho": 0.1}, {"from": 100, "to": 200, "rho": 0.2}]},
}


@pytest.fixture
def classes():
    return ClassPair(motorcycle=MOTORCYCLE_SPEC, car=CAR_SPEC)


@pytest.fixture
def mix():
    return MixSpec(delta=0.2, road_width=12.0)


@pytest.fixture
def law(classes, mix):
    return pressure_law(classes, mix)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def scenario_doc():
    """A short freeway run; tests edit their own deep copy."""
    return copy.deepcopy(_BASE_DOCUMENT)


@pytest.fixture
def write_scenario(tmp_path):
    """Write a scenario document to tmp_path and return its path."""

    def _write(doc, name="scenario.json"):
        path = tmp_path / name
        path.write_bytes(orjson.dumps(doc))
        return path

    return _write
