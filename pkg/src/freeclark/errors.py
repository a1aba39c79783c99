"""
Exception hierarchy for freeclark.

Every error is also a ValueError so callers that only know about bad input
can keep catching that.
"""

from __future__ import annotations


class FreeClarkError(ValueError):
    """Base class for all freeclark errors."""


class ConfigurationError(FreeClarkError):
    """Alphabet size, truncation degree or multi-index outside the supported range."""


class DimensionMismatchError(FreeClarkError):
    pass


class NonUnitalViolationError(FreeClarkError):
    """Constant term is not a strict contraction, or I - F_0 is singular."""


class NotHerglotzError(FreeClarkError):
    pass


class NotCompletelyPositiveError(FreeClarkError):
    """Moment Gram matrix fails the level-N positivity check."""


class NotContractionError(FreeClarkError):
    pass


class DegenerateInstanceError(FreeClarkError):
    pass


class ResolventError(FreeClarkError):
    pass


class LiftCheckError(FreeClarkError):
    pass
