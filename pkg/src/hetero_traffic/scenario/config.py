"""
Scenario configuration (JSON) and package defaults (TOML).

A scenario document looks like:

    {
      "name": "freeway_d20",
      "road":    {"length": 200, "width": 12, "cells": 40},
      "time":    {"dt": 0.05, "duration": 60, "cfl_max": 1.0, "snapshots": [0, 1, 20, 40, 60]},
      "mix":     {"delta": 0.2},
      "initial": {"segments": [{"from": 0, "to": 100, "rho": 0.1}, {"from": 100, "to": 200, "rho": 0.2}]},
      "classes": {"motorcycle": {...}, "car": {...}},          (optional)
      "solver":  {"entropy_fix": "harten-hyman", ...},         (optional)
      "output":  {"directory": "out", "formats": ["csv"]}      (optional)
    }

Unknown keys are rejected; missing optional sections come from
`hetero_traffic/data/defaults.toml`. The full grammar is in docs/scenario-format.md.
"""

from __future__ import annotations
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import orjson

from hetero_traffic.errors import (
    ConfigError,
    InvalidMixError,
    InvalidSpecError,
    ScenarioParseError,
    ScenarioValidationError,
)
from hetero_traffic.integrator.grid import Grid, TimeControls
from hetero_traffic.integrator.stepper import SolverConfig
from hetero_traffic.model.constitutive import pressure_law
from hetero_traffic.model.types import (
    MOTORCYCLE_WIDTH_RATIO,
    ClassPair,
    MixSpec,
    PressureLaw,
    VehicleClassSpec,
)

# --- TOML loader: use stdlib 'tomllib' on 3.11+, fall back to 'tomli' on older ---
try:
    import tomllib  # Python 3.11+
except ModuleNotFoundError:  # < 3.11
    try:
        import tomli as tomllib  # type: ignore[no-redef]
    except ModuleNotFoundError as e:
        raise ImportError(
            "Reading defaults requires Python 3.11+ (tomllib) or the 'tomli' package on older Pythons.\n"
            "Install with: pip install tomli"
        ) from e

log = logging.getLogger(__name__)

DEFAULTS_PATH = Path(__file__).resolve().parent.parent / "data" / "defaults.toml"
OUTPUT_FORMATS = ("csv", "trace", "svg")
# Tolerance when checking that segments tile the road.
COVER_TOLERANCE = 1e-9

_CLASS_KEYS = ("length", "width", "pressure_exponent", "relaxation_time", "v_max", "ao_max")


# ======================= Defaults (TOML) ======================================

@dataclass(frozen=True)
class Defaults:
    classes: Dict[str, Dict[str, float]]
    cfl_max: float
    solver: Dict[str, Any]
    formats: Tuple[str, ...]
    k_grid: Tuple[float, ...]
    trials: int
    seed: int


def _resolve_defaults_path(path: Optional[Union[str, Path]]) -> Path:
    """An explicit path must exist; otherwise the packaged defaults.toml is used."""
    if path:
        p = Path(path)
        if not p.exists():
            raise FileNotFoundError(f"defaults file not found: {p}")
        return p
    return DEFAULTS_PATH


def load_defaults(path: Optional[Union[str, Path]] = None) -> Defaults:
    """Load package defaults. Raises FileNotFoundError or ConfigError."""
    cfg_path = _resolve_defaults_path(path)
    try:
        with open(cfg_path, "rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"malformed defaults file {cfg_path}: {e}") from e

    try:
        defaults = Defaults(
            classes={name: dict(values) for name, values in data["classes"].items()},
            cfl_max=float(data["time"]["cfl_max"]),
            solver=dict(data["solver"]),
            formats=tuple(str(x) for x in data["output"]["formats"]),
            k_grid=tuple(float(k) for k in data["stability"]["k_grid"]),
            trials=int(data["check"]["trials"]),
            seed=int(data["check"]["seed"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"defaults file {cfg_path} is missing or mistypes {e}") from e
    log.debug("defaults loaded path=%s", cfg_path)
    return defaults


# ======================= Scenario types =======================================

@dataclass(frozen=True)
class RoadSpec:
    length: float
    width: float
    cells: int


@dataclass(frozen=True)
class Segment:
    """Total density rho on the left-closed, right-open interval [start, end)."""
    start: float
    end: float
    rho: float

    def contains(self, x: np.ndarray) -> np.ndarray:
        """Boolean mask of the positions inside the segment."""
        x = np.asarray(x, dtype=float)
        return (x >= self.start) & (x < self.end)


@dataclass(frozen=True)
class OutputPlan:
    directory: Optional[str] = None
    formats: Tuple[str, ...] = OUTPUT_FORMATS


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    road: RoadSpec
    time: TimeControls
    snapshots: Tuple[float, ...]
    classes: ClassPair
    mix: MixSpec
    initial: Tuple[Segment, ...]
    solver: SolverConfig = field(default_factory=SolverConfig)
    output: OutputPlan = field(default_factory=OutputPlan)

    @property
    def grid(self) -> Grid:
        return Grid(cells=self.road.cells, dx=self.road.length / self.road.cells)

    @property
    def law(self) -> PressureLaw:
        return pressure_law(self.classes, self.mix)


# ======================= Field readers ========================================

def _object(value: Any, path: str, allowed: Iterable[str]) -> Mapping[str, Any]:
    if not isinstance(value, dict):
        raise ScenarioValidationError(path or "<root>", "expected an object")
    allowed = tuple(allowed)
    for key in value:
        if key not in allowed:
            where = f"{path}.{key}" if path else key
            raise ScenarioValidationError(where, f"unknown key; allowed keys are {', '.join(allowed)}")
    return value


def _number(obj: Mapping[str, Any], key: str, path: str, default: Optional[float] = None) -> float:
    where = f"{path}.{key}"
    if key not in obj:
        if default is None:
            raise ScenarioValidationError(where, "required")
        return float(default)
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioValidationError(where, f"expected a finite number, got {value!r}")
    return float(value)


def _integer(obj: Mapping[str, Any], key: str, path: str) -> int:
    where = f"{path}.{key}"
    if key not in obj:
        raise ScenarioValidationError(where, "required")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioValidationError(where, f"expected an integer, got {value!r}")
    return value


def _flag(obj: Mapping[str, Any], key: str, path: str, default: bool) -> bool:
    value = obj.get(key, default)
    if not isinstance(value, bool):
        raise ScenarioValidationError(f"{path}.{key}", f"expected true or false, got {value!r}")
    return value


def _text(obj: Mapping[str, Any], key: str, path: str, default: Optional[str]) -> Optional[str]:
    value = obj.get(key, default)
    if value is not None and not isinstance(value, str):
        raise ScenarioValidationError(f"{path}.{key}", f"expected a string, got {value!r}")
    return value


# ======================= Section parsers ======================================

def _road(doc: Any) -> RoadSpec:
    obj = _object(doc, "road", ("length", "width", "cells"))
    road = RoadSpec(
        length=_number(obj, "length", "road"),
        width=_number(obj, "width", "road"),
        cells=_integer(obj, "cells", "road"),
    )
    if road.length <= 0:
        raise ScenarioValidationError("road.length", "must be positive")
    if road.width <= 0:
        raise ScenarioValidationError("road.width", "must be positive")
    try:
        Grid(cells=road.cells, dx=road.length / max(road.cells, 1))
    except ConfigError as e:
        raise ScenarioValidationError("road.cells", str(e)) from e
    return road


def _time(doc: Any, defaults: Defaults) -> Tuple[TimeControls, Tuple[float, ...]]:
    obj = _object(doc, "time", ("dt", "duration", "cfl_max", "snapshots"))
    try:
        controls = TimeControls(
            dt=_number(obj, "dt", "time"),
            duration=_number(obj, "duration", "time"),
            cfl_max=_number(obj, "cfl_max", "time", defaults.cfl_max),
        )
    except ConfigError as e:
        if isinstance(e, ScenarioValidationError):
            raise
        raise ScenarioValidationError("time", str(e)) from e
    raw = obj.get("snapshots", [0.0, controls.duration])
    if not isinstance(raw, list):
        raise ScenarioValidationError("time.snapshots", "expected a list of times")
    snapshots = validate_snapshots(raw, controls.duration, "time.snapshots")
    return controls, snapshots


def validate_snapshots(raw: Sequence[Any], duration: float, path: str = "snapshots") -> Tuple[float, ...]:
    """Sorted, de-duplicated snapshot instants inside [0, duration]."""
    times: List[float] = []
    for idx, value in enumerate(raw):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ScenarioValidationError(f"{path}[{idx}]", f"expected a finite number, got {value!r}")
        if value < 0 or value > duration:
            raise ScenarioValidationError(f"{path}[{idx}]", f"must lie in [0, duration={duration:g}]")
        times.append(float(value))
    return tuple(sorted(set(times)))


def _vehicle(doc: Any, path: str, fallback: Mapping[str, float], car_width: Optional[float]) -> VehicleClassSpec:
    obj = _object(doc, path, _CLASS_KEYS)
    values: Dict[str, float] = {}
    for key in _CLASS_KEYS:
        if key == "width" and key not in obj and key not in fallback and car_width is not None:
            values[key] = car_width / MOTORCYCLE_WIDTH_RATIO
            continue
        values[key] = _number(obj, key, path, fallback.get(key))
    try:
        return VehicleClassSpec(**values)
    except InvalidSpecError as e:
        raise ScenarioValidationError(path, str(e)) from e


def _classes(doc: Any, defaults: Defaults) -> ClassPair:
    obj = _object(doc if doc is not None else {}, "classes", ("motorcycle", "car"))
    car = _vehicle(obj.get("car", {}), "classes.car", defaults.classes.get("car", {}), None)
    motorcycle = _vehicle(
        obj.get("motorcycle", {}), "classes.motorcycle", defaults.classes.get("motorcycle", {}), car.width
    )
    return ClassPair(motorcycle=motorcycle, car=car)


def _mix(doc: Any, road: RoadSpec) -> MixSpec:
    obj = _object(doc, "mix", ("delta",))
    delta = _number(obj, "delta", "mix")
    try:
        return MixSpec(delta=delta, road_width=road.width)
    except InvalidMixError as e:
        raise ScenarioValidationError(
            "mix.delta",
            f"{delta!r} is outside (0, 1); with a single vehicle class the proportional split "
            "is undefined and the results become unstable",
        ) from e


def _segments(doc: Any, road: RoadSpec) -> Tuple[Segment, ...]:
    obj = _object(doc, "initial", ("segments",))
    raw = obj.get("segments")
    if not isinstance(raw, list) or not raw:
        raise ScenarioValidationError("initial.segments", "expected a non-empty list")
    segments = []
    for idx, item in enumerate(raw):
        path = f"initial.segments[{idx}]"
        seg_obj = _object(item, path, ("from", "to", "rho"))
        seg = Segment(
            start=_number(seg_obj, "from", path),
            end=_number(seg_obj, "to", path),
            rho=_number(seg_obj, "rho", path),
        )
        if seg.end <= seg.start:
            raise ScenarioValidationError(path, "'to' must be greater than 'from'")
        if not (0 <= seg.rho <= 1):
            raise ScenarioValidationError(f"{path}.rho", "total density must lie in [0, 1]")
        segments.append(seg)

    ordered = sorted(segments, key=lambda s: s.start)
    tol = COVER_TOLERANCE * road.length
    if abs(ordered[0].start) > tol:
        raise ScenarioValidationError("initial.segments", f"must start at 0, first segment starts at {ordered[0].start:g}")
    for prev, nxt in zip(ordered, ordered[1:]):
        if nxt.start < prev.end - tol:
            raise ScenarioValidationError(
                "initial.segments", f"overlapping segments [{prev.start:g}, {prev.end:g}) and [{nxt.start:g}, {nxt.end:g})"
            )
        if nxt.start > prev.end + tol:
            raise ScenarioValidationError("initial.segments", f"gap between {prev.end:g} and {nxt.start:g}")
    if abs(ordered[-1].end - road.length) > tol:
        raise ScenarioValidationError(
            "initial.segments", f"must end at the road length {road.length:g}, last segment ends at {ordered[-1].end:g}"
        )
    return tuple(ordered)


def _solver(doc: Any, defaults: Defaults) -> SolverConfig:
    keys = ("entropy_fix", "source", "source_level", "adaptive", "x_convention")
    obj = _object(doc if doc is not None else {}, "solver", keys)
    base = defaults.solver
    try:
        return SolverConfig(
            entropy_mode=_text(obj, "entropy_fix", "solver", base.get("entropy_fix", "harten-hyman")),
            source_enabled=_flag(obj, "source", "solver", bool(base.get("source", True))),
            source_level=_text(obj, "source_level", "solver", base.get("source_level", "n")),  # type: ignore[arg-type]
            adaptive=_flag(obj, "adaptive", "solver", bool(base.get("adaptive", False))),
            x_convention=_text(obj, "x_convention", "solver", base.get("x_convention", "center")),  # type: ignore[arg-type]
        )
    except ScenarioValidationError:
        raise
    except ConfigError as e:
        raise ScenarioValidationError("solver", str(e)) from e


def _output(doc: Any, defaults: Defaults) -> OutputPlan:
    obj = _object(doc if doc is not None else {}, "output", ("directory", "formats"))
    formats = obj.get("formats", list(defaults.formats))
    if not isinstance(formats, list) or any(f not in OUTPUT_FORMATS for f in formats):
        raise ScenarioValidationError("output.formats", f"expected a list drawn from {OUTPUT_FORMATS}")
    return OutputPlan(directory=_text(obj, "directory", "output", None), formats=tuple(formats))


# ======================= Public API ===========================================

def scenario_from_document(doc: Any, *, defaults: Optional[Defaults] = None) -> ScenarioConfig:
    """Validate an already-decoded document tree."""
    defaults = defaults or load_defaults()
    top = _object(doc, "", ("name", "road", "time", "mix", "initial", "classes", "solver", "output"))
    for required in ("road", "time", "mix", "initial"):
        if required not in top:
            raise ScenarioValidationError(required, "required section missing")
    name = _text(top, "name", "", "scenario") or "scenario"
    road = _road(top["road"])
    controls, snapshots = _time(top["time"], defaults)
    config = ScenarioConfig(
        name=name,
        road=road,
        time=controls,
        snapshots=snapshots,
        classes=_classes(top.get("classes"), defaults),
        mix=_mix(top["mix"], road),
        initial=_segments(top["initial"], road),
        solver=_solver(top.get("solver"), defaults),
        output=_output(top.get("output"), defaults),
    )
    log.debug("scenario parsed name=%s cells=%d delta=%g", config.name, road.cells, config.mix.delta)
    return config


def parse_scenario(document: Union[str, bytes], *, defaults: Optional[Defaults] = None) -> ScenarioConfig:
    """Parse and validate a JSON scenario. Raises ScenarioParseError or ScenarioValidationError."""
    try:
        doc = orjson.loads(document)
    except orjson.JSONDecodeError as e:
        raise ScenarioParseError(f"invalid scenario JSON: {e.msg}", line=e.lineno, column=e.colno) from e
    return scenario_from_document(doc, defaults=defaults)


def load_scenario(path: Union[str, Path], *, defaults: Optional[Defaults] = None) -> ScenarioConfig:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"scenario file not found: {p}")
    return parse_scenario(p.read_bytes(), defaults=defaults)


def scenario_document(config: ScenarioConfig) -> Dict[str, Any]:
    """Complete document tree for a config; parsing it yields an equal config."""

    def vehicle(spec: VehicleClassSpec) -> Dict[str, float]:
        return {key: getattr(spec, key) for key in _CLASS_KEYS}

    doc: Dict[str, Any] = {
        "name": config.name,
        "road": {"length": config.road.length, "width": config.road.width, "cells": config.road.cells},
        "time": {
            "dt": config.time.dt,
            "duration": config.time.duration,
            "cfl_max": config.time.cfl_max,
            "snapshots": list(config.snapshots),
        },
        "mix": {"delta": config.mix.delta},
        "initial": {"segments": [{"from": s.start, "to": s.end, "rho": s.rho} for s in config.initial]},
        "classes": {"motorcycle": vehicle(config.classes.motorcycle), "car": vehicle(config.classes.car)},
        "solver": {
            "entropy_fix": config.solver.entropy_mode,
            "source": config.solver.source_enabled,
            "source_level": config.solver.source_level,
            "adaptive": config.solver.adaptive,
            "x_convention": config.solver.x_convention,
        },
        "output": {"formats": list(config.output.formats)},
    }
    if config.output.directory is not None:
        doc["output"]["directory"] = config.output.directory
    return doc


def serialize_scenario(config: ScenarioConfig) -> bytes:
    return orjson.dumps(scenario_document(config), option=orjson.OPT_INDENT_2)


def with_snapshots(config: ScenarioConfig, times: Sequence[float]) -> ScenarioConfig:
    """Copy of the config with its snapshot instants replaced (validated)."""
    return replace(config, snapshots=validate_snapshots(list(times), config.time.duration))
