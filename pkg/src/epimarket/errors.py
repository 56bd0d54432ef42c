"""Exception taxonomy for the simulation engine.

Every numerical failure derives from SimulationError so callers (and the CLI
exit-code contract) can distinguish engine breakdowns from configuration
mistakes, which raise ConfigError instead.
"""
from __future__ import annotations


class SimulationError(Exception):
    """Base class for all numerical/engine failures."""


class IntegrationError(SimulationError):
    """A derivative evaluation produced a non-finite value.

    Carries the time of the offending stage in ``time``.
    """

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class BracketError(SimulationError):
    """A root bracket does not actually bracket a sign change."""


class ConvergenceError(SimulationError):
    """An iteration budget was exhausted; ``best`` holds the last iterate."""

    def __init__(self, message: str, best: float | None = None):
        super().__init__(message)
        self.best = best


class RangeError(SimulationError):
    """Target value lies outside the range of the map being inverted."""


class DomainError(SimulationError):
    """An argument lies outside the mathematical domain of an operation."""


class ConsistencyError(SimulationError):
    """Two inputs that must describe the same run disagree."""


class PriceFloorError(SimulationError):
    """Holdings drove the clearing price to zero or below.

    Signals parameter misconfiguration (the slump is too deep for the supply
    curve); the price is never clamped.
    """

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class NoPlateauError(SimulationError):
    """No sell-start time produces a plateau (no boom to smooth out)."""


class GridTooCoarseError(SimulationError):
    """The shooting solve cannot meet tolerance at this step size.

    Retry with dt/2.
    """


class BoundaryExtremumError(SimulationError):
    """The discrete extremum sits on the first or last sample, so parabolic
    refinement has no interior stencil."""


class ConfigError(Exception):
    """Invalid configuration text, key, or parameter bound."""
