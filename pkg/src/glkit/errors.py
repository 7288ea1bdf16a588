"""Exception hierarchy for glkit.

All errors derive from :class:`GlkitError` so callers (and the CLI) can catch
the whole family at once. Errors that signal bad user input also derive from
``ValueError``.
"""

from __future__ import annotations

from typing import Any


class GlkitError(Exception):
    """Base class for every error raised by glkit."""


class TooLarge(GlkitError):
    """Enumeration would exceed the configured cap."""

    def __init__(self, message: str, cap: int | None = None):
        super().__init__(message)
        self.cap = cap


class EmptySet(GlkitError):
    """The decision set contains no decision."""


class OracleUnavailable(GlkitError):
    """No exact DP and no enumeration within cap for a budgeted query."""


class Unsupported(GlkitError):
    """The structure has no exact compact hull representation."""


class InvalidStructure(GlkitError, ValueError):
    """A decision set could not be constructed from its description."""


class NonPositiveEntry(GlkitError, ValueError):
    """Discretization needs strictly positive reward means."""


class IdentityViolation(GlkitError):
    """The reduced cost does not reproduce the gaps; the hull is wrong."""


class NumericFailure(GlkitError):
    """An iterative numerical routine failed to converge."""


class DivisionGuard(GlkitError, ZeroDivisionError):
    """A constraint was evaluated at a point with a non-positive sample rate."""


class IterationBudgetExhausted(GlkitError):
    """The solver stopped without a certified point; ``partial`` holds the last state."""

    def __init__(self, message: str, partial: Any = None):
        super().__init__(message)
        self.partial = partial


class DecompositionFailure(GlkitError):
    """The point could not be written as a nonnegative combination of decisions."""


class InstanceError(GlkitError, ValueError):
    """An instance file is missing, malformed or inconsistent."""
