"""Exception types shared across the package."""

from __future__ import annotations


class ParameterError(ValueError):
    """A family or operation parameter is outside its valid range."""


class ConfigError(ValueError):
    """Run configuration is malformed (unknown key, bad type, missing value)."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (bracket expansion, root solve, ...)."""


class DivergenceError(NumericalError):
    """An orbit exceeded the coordinate magnitude cap.

    ``partial`` carries whatever was computed before the blow-up (a truncated
    trajectory or estimate), so callers can report instead of crash.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NonGraphImageError(NumericalError):
    """The image of a loop is not a graph over the angle; refine the sampling
    or pick a loop the map folds less."""


class BracketError(NumericalError):
    """A bisection bracket failed its endpoint verdicts.

    Carries the two verdicts so threshold callers can report which end broke.
    """

    def __init__(self, message, verdict_lo=None, verdict_hi=None):
        super().__init__(message)
        self.verdict_lo = verdict_lo
        self.verdict_hi = verdict_hi
