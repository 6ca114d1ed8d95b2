"""Exception types shared across the package.

Both classes carry an optional ``stage`` tag so the CLI can emit a
machine-parsable ``stage=... reason=...`` line and map the failure to the
right exit code (1 for data/usage problems, 2 for numerical failures).
"""

from __future__ import annotations


class MenError(Exception):
    """Base class for all errors raised by this package."""

    def __init__(self, message: str, *, stage: str | None = None):
        super().__init__(message)
        self.stage = stage


class DataError(MenError, ValueError):
    """Invalid user input: bad data files, bad config values, bad shapes."""


class NumericalError(MenError, ArithmeticError):
    """Numerical failure: singular systems, empty spectra, nonfinite values."""
