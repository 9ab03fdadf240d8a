"""Grid, time controls and the conserved field carried through a run."""

from __future__ import annotations
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from hetero_traffic.errors import ConfigError

XConvention = Literal["center", "node"]
MIN_CELLS = 4


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid of J cells of width dx."""
    cells: int
    dx: float

    def __post_init__(self) -> None:
        if int(self.cells) != self.cells or self.cells < MIN_CELLS:
            raise ConfigError(f"grid needs an integer cell count >= {MIN_CELLS}, got {self.cells!r}")
        if not (math.isfinite(self.dx) and self.dx > 0):
            raise ConfigError(f"dx must be positive, got {self.dx!r}")

    @property
    def length(self) -> float:
        return self.cells * self.dx

    def positions(self, convention: XConvention = "center") -> np.ndarray:
        """Reporting coordinate of each cell: centers (j + 1/2) dx or nodes j dx, j = 0..J-1."""
        j = np.arange(self.cells, dtype=float)
        if convention == "node":
            return j * self.dx
        if convention == "center":
            return (j + 0.5) * self.dx
        raise ConfigError(f"unknown x convention {convention!r}")


@dataclass(frozen=True)
class TimeControls:
    """Fixed step dt, run duration T and the CFL ceiling. T = 0 means 'initial state only'."""
    dt: float
    duration: float
    cfl_max: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be positive, got {self.dt!r}")
        if not (math.isfinite(self.duration) and (self.duration == 0 or self.duration >= self.dt)):
            raise ConfigError(f"duration must be 0 or at least dt={self.dt!r}, got {self.duration!r}")
        if not (0 < self.cfl_max <= 1):
            raise ConfigError(f"cfl_max must lie in (0, 1], got {self.cfl_max!r}")


@dataclass(frozen=True)
class ConservedField:
    """Cell averages of shape (J, 4) at one instant; never mutated in place."""
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise ConfigError(f"conserved field must have shape (J, 4), got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def cells(self) -> int:
        return int(self.values.shape[0])

    def advanced(self, values: np.ndarray, dt: float) -> "ConservedField":
        if values.shape != self.values.shape:
            raise ConfigError("field length is fixed during a run")
        return ConservedField(values=values, time=self.time + dt)
