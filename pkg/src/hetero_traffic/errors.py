"""
Exception hierarchy shared by the model, solver, scenario and CLI layers.

Model and configuration problems derive from ValueError (bad input); solver
failures derive from RuntimeError (a run that went wrong). The CLI maps any
HeteroTrafficError to exit code 1.
"""

from __future__ import annotations
from typing import Optional


class HeteroTrafficError(Exception):
    """Base class for every error raised on purpose by this package."""


# ----------------------------- model ------------------------------------------

class ModelError(HeteroTrafficError, ValueError):
    """Invalid physical input to the constitutive model."""


class InvalidMixError(ModelError):
    """Mix fraction outside (0, 1) or non-positive road width."""


class InvalidSpecError(ModelError):
    """Vehicle class parameters violate their invariants."""


class DomainError(ModelError):
    """A density or area occupancy outside the model's domain (e.g. negative)."""


class NonphysicalStateError(ModelError):
    """A conserved state decodes to negative density or negative velocity."""

    def __init__(self, message: str, *, cell: Optional[int] = None, class_id: Optional[str] = None):
        super().__init__(message)
        self.cell = cell
        self.class_id = class_id


# ----------------------------- solver -----------------------------------------

class SolverError(HeteroTrafficError, RuntimeError):
    """The numerical solver could not proceed."""


class SingularStateError(SolverError):
    """An operation needing division by density was given a vacuum state."""


class StepRejectedError(SolverError):
    """The CFL guard refused a time step."""

    def __init__(self, nu: float, cfl_max: float):
        super().__init__(f"CFL number {nu:.6g} exceeds cfl_max={cfl_max:.6g}")
        self.nu = nu
        self.cfl_max = cfl_max


class BlowUpError(SolverError):
    """A step produced a nonphysical state."""

    def __init__(self, message: str, *, step: int, cell: Optional[int] = None):
        super().__init__(f"{message} (step={step} cell={cell})")
        self.step = step
        self.cell = cell


# ----------------------------- configuration ----------------------------------

class ConfigError(HeteroTrafficError, ValueError):
    """Configuration could not be loaded or is invalid."""


class ScenarioParseError(ConfigError):
    """The scenario document is not valid JSON."""

    def __init__(self, message: str, *, line: Optional[int] = None, column: Optional[int] = None):
        where = f" at line {line} column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.line = line
        self.column = column


class ScenarioValidationError(ConfigError):
    """A scenario field is missing, unknown or out of range."""

    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


class NoDataError(HeteroTrafficError, ValueError):
    """Nothing to plot or tabulate."""
