"""
errors.py

Exception hierarchy for the string-bank simulator.

The CLI maps these onto exit codes:
- ConfigError / DomainError  -> 2 (the caller asked for something invalid)
- NumericError               -> 3 (the numerics could not deliver)
"""

from __future__ import annotations


class BasilarError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(BasilarError, ValueError):
    """Unresolvable parameter set, malformed params/signal spec, unreadable input file."""


class DomainError(BasilarError, ValueError):
    """A precondition on an input value was violated (x outside [0, L], xi outside the band, ...)."""


class InconsistentIntervalError(DomainError):
    """Two-tone frequencies do not stand in the exact ratio u/w."""


class NotGenuineSoundError(BasilarError):
    """Audio input has no periodic structure the model can use."""

    def __init__(self, detail: str = "") -> None:
        msg = "not a genuine sound"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)


class NumericError(BasilarError, ArithmeticError):
    """A numerical procedure failed or was asked to leave its valid regime."""


class UndefinedMaximumError(NumericError):
    """The response maximum does not exist (negative radicand)."""


class StepSizeError(NumericError):
    """Integrator step too coarse for the fastest natural period."""


class RegimeMismatchError(NumericError):
    """Fit model does not apply to the requested regime (e.g. overdamped mode)."""
