"""Exception types shared across the package.

The CLI maps these onto process exit codes, so anything user-facing
should raise one of them rather than a bare Exception.
"""

from __future__ import annotations

__all__ = ["WenzlLabError", "DimensionCapError", "InvariantViolation"]


class WenzlLabError(Exception):
    """Base class for all package-specific errors."""


class DimensionCapError(WenzlLabError):
    """A requested object exceeds the configured ambient-dimension cap."""


class InvariantViolation(WenzlLabError):
    """A mathematical identity that must hold numerically failed its tolerance.

    Raised only for internal consistency failures (never for bad user input),
    so it always indicates a genuine numerical or logic problem.
    """
