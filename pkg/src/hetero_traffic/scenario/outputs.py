"""
Purpose:
    Writers and readers for run artifacts: snapshot CSVs, the per-step
    diagnostics CSV, the NDJSON trace, the stability map and equilibrium tables.

Numbers are rendered as the shortest decimal text that round-trips to the
same double, with zero always written as `0` (never `-0` or `0.0`) and a
trailing `.0` dropped, so write -> read -> write is byte-identical and the
text does not depend on locale. Files use LF line endings.
"""

from __future__ import annotations
import logging
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, TextIO, Union

import numpy as np
import orjson
import pandas as pd

from hetero_traffic.errors import ConfigError, NoDataError
from hetero_traffic.integrator.runner import SimulationTrace, Snapshot
from hetero_traffic.scenario.config import scenario_document, scenario_from_document
from hetero_traffic.stability.analysis import StabilityMap

log = logging.getLogger(__name__)

SNAPSHOT_COLUMNS = ["x", "rho_m", "v_m", "rho_c", "v_c"]
TRACE_FILENAME = "trace.ndjson"
DIAGNOSTICS_FILENAME = "diagnostics.csv"

PathLike = Union[str, Path]


# ======================= Number formatting ====================================

def format_float(value: Any) -> str:
    """Shortest round-trip decimal; canonical zero; booleans as true/false."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    v = float(value)
    if v == 0.0:
        return "0"
    text = repr(v)
    return text[:-2] if text.endswith(".0") else text


def _formatted(frame: pd.DataFrame) -> pd.DataFrame:
    return pd.DataFrame({col: [format_float(v) for v in frame[col].tolist()] for col in frame.columns})


def _write_csv(frame: pd.DataFrame, destination: Union[PathLike, TextIO]) -> None:
    text = _formatted(frame).to_csv(index=False, lineterminator="\n")
    if hasattr(destination, "write"):
        destination.write(text)  # type: ignore[union-attr]
        return
    path = Path(destination)  # type: ignore[arg-type]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


def read_table(path: PathLike) -> pd.DataFrame:
    """Read any CSV written here without losing a bit of precision."""
    return pd.read_csv(path, float_precision="round_trip")


# ======================= Snapshots ============================================

def snapshot_frame(snapshot: Snapshot) -> pd.DataFrame:
    order = np.argsort(snapshot.x, kind="stable")
    data = np.column_stack([snapshot.x, snapshot.primitive])[order]
    return pd.DataFrame(data, columns=SNAPSHOT_COLUMNS)


def snapshot_filename(index: int, time: float) -> str:
    return f"snapshot_{index:03d}_t{format_float(time)}.csv"


def write_snapshot(snapshot: Snapshot, destination: PathLike) -> Path:
    """CSV `x,rho_m,v_m,rho_c,v_c`, one row per cell in ascending x."""
    path = Path(destination)
    _write_csv(snapshot_frame(snapshot), path)
    log.debug("wrote snapshot t=%g path=%s", snapshot.time, path)
    return path


def read_snapshot(path: PathLike) -> pd.DataFrame:
    frame = read_table(path)
    if list(frame.columns) != SNAPSHOT_COLUMNS:
        raise ConfigError(f"{path}: unexpected snapshot header {list(frame.columns)}")
    return frame


def rewrite_table(source: PathLike, destination: PathLike) -> Path:
    """Read a CSV written by this module and write it again (round-trip check)."""
    _write_csv(read_table(source), destination)
    return Path(destination)


# ======================= Diagnostics ==========================================

def write_diagnostics(trace: SimulationTrace, destination: PathLike) -> Path:
    if not trace.diagnostics:
        columns = ["step", "time", "dt", "cfl"]
        frame = pd.DataFrame(columns=columns)
    else:
        frame = pd.DataFrame([d.as_row() for d in trace.diagnostics])
    _write_csv(frame, destination)
    return Path(destination)


# ======================= Trace (NDJSON) =======================================

def _trace_records(trace: SimulationTrace) -> Iterable[Dict[str, Any]]:
    yield {"kind": "config", "config": scenario_document(trace.config)}
    for snap in trace.snapshots:
        yield {
            "kind": "snapshot",
            "time": snap.time,
            "x": snap.x.tolist(),
            "rho_m": snap.rho_m.tolist(),
            "v_m": snap.v_m.tolist(),
            "rho_c": snap.rho_c.tolist(),
            "v_c": snap.v_c.tolist(),
        }
    if trace.aborted_step is not None:
        yield {"kind": "abort", "step": trace.aborted_step}


def write_trace(trace: SimulationTrace, destination: PathLike) -> Path:
    """One JSON object per line; written to a temp file and moved into place."""
    path = Path(destination)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as f:
        for record in _trace_records(trace):
            f.write(orjson.dumps(record))
            f.write(b"\n")
    os.replace(tmp, path)
    log.info("wrote trace snapshots=%d path=%s", len(trace.snapshots), path)
    return path


def read_trace(path: PathLike) -> SimulationTrace:
    """Rebuild a trace (config echo and snapshots) from NDJSON; diagnostics are not stored there."""
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"trace file not found: {p}")
    records: List[Mapping[str, Any]] = [orjson.loads(line) for line in p.read_bytes().splitlines() if line.strip()]
    if not records or records[0].get("kind") != "config":
        raise NoDataError(f"{p}: trace has no config record")
    trace = SimulationTrace(config=scenario_from_document(records[0]["config"]))
    for rec in records[1:]:
        if rec.get("kind") == "snapshot":
            prim = np.column_stack([rec["rho_m"], rec["v_m"], rec["rho_c"], rec["v_c"]]).astype(float)
            trace.snapshots.append(Snapshot(time=float(rec["time"]), x=np.asarray(rec["x"], dtype=float), primitive=prim))
        elif rec.get("kind") == "abort":
            trace.aborted_step = int(rec["step"])
    return trace


# ======================= Run artifacts ========================================

def write_run_outputs(trace: SimulationTrace, out_dir: PathLike, formats: Optional[Iterable[str]] = None) -> List[Path]:
    """Everything `simulate` produces except plots: snapshots, diagnostics and the trace."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    formats = tuple(formats if formats is not None else trace.config.output.formats)
    written: List[Path] = []
    if "csv" in formats:
        for i, snap in enumerate(trace.snapshots):
            written.append(write_snapshot(snap, out / snapshot_filename(i, snap.time)))
        written.append(write_diagnostics(trace, out / DIAGNOSTICS_FILENAME))
    if "trace" in formats:
        written.append(write_trace(trace, out / TRACE_FILENAME))
    return written


# ======================= Tables ===============================================

def write_stability_map(result: StabilityMap, destination: Union[PathLike, TextIO]) -> None:
    """Columns delta,rho0,k,class,lhs,rhs,margin,max_re_r,stable."""
    _write_csv(result.table, destination)


def write_disagreements(result: StabilityMap, destination: PathLike) -> Path:
    _write_csv(result.disagreements, destination)
    return Path(destination)


def write_table(frame: pd.DataFrame, destination: PathLike) -> Path:
    _write_csv(frame, destination)
    return Path(destination)
