"""Structured errors shared across the library and surfaced by the CLI."""
from __future__ import annotations


class IdeaflowError(Exception):
    """Base class for all errors raised by this package."""


class SpanError(IdeaflowError):
    """A requested time lies outside the span of a series or path."""


class DomainError(IdeaflowError, ValueError):
    """An argument violates its mathematical domain (sign, ordering, range)."""


class SingularityError(IdeaflowError):
    """A trajectory blows down to zero before the end of the interval."""

    def __init__(self, message: str, critical_time: float | None = None):
        super().__init__(message)
        self.critical_time = critical_time


class NoSolutionError(IdeaflowError):
    """A bracketed root search found no admissible solution."""

    def __init__(self, message: str, bracket: tuple[float, float] | None = None,
                 values: tuple[float, float] | None = None):
        super().__init__(message)
        self.bracket = bracket
        self.values = values


class IncreasingOutputError(IdeaflowError):
    """An estimator that needs strictly increasing output levels saw a decrease."""


class SingularDesignError(IdeaflowError):
    """Regression design is singular; only the growth-rate ratio is identified.

    `degenerate_ratio` carries g_A/g_I, the one combination the degenerate
    design still pins down.
    """

    def __init__(self, message: str, degenerate_ratio: float | None = None):
        super().__init__(message)
        self.degenerate_ratio = degenerate_ratio


class IdentificationError(IdeaflowError):
    """Fewer effective data points than free parameters."""


class ConvergenceError(IdeaflowError):
    """All optimizer restarts failed; `trace` holds per-restart diagnostics."""

    def __init__(self, message: str, trace: list[str] | None = None):
        super().__init__(message)
        self.trace = trace or []


class ConstraintError(IdeaflowError):
    """Parameters violate a model admissibility constraint."""


class ParseError(IdeaflowError):
    """A data file failed validation; `line` is the 1-based offending line."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class ConfigError(IdeaflowError):
    """A run configuration contains unknown or inconsistent entries."""
