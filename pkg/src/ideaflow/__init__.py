"""Estimation toolkit for the Jones idea-production law."""
from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConstraintError,
    ConvergenceError,
    DomainError,
    IdeaflowError,
    IdentificationError,
    IncreasingOutputError,
    NoSolutionError,
    ParseError,
    SingularDesignError,
    SingularityError,
    SpanError,
)
from .law import JonesParams, ode_oracle, propagate, q_beta, simulate_deterministic
from .series import InputPath, ObservationSet, TimeSeries, avg_growth, lp_norm

__all__ = [
    "ConfigError",
    "ConstraintError",
    "ConvergenceError",
    "DomainError",
    "IdeaflowError",
    "IdentificationError",
    "IncreasingOutputError",
    "InputPath",
    "JonesParams",
    "NoSolutionError",
    "ObservationSet",
    "ParseError",
    "SingularDesignError",
    "SingularityError",
    "SpanError",
    "TimeSeries",
    "avg_growth",
    "lp_norm",
    "ode_oracle",
    "propagate",
    "q_beta",
    "simulate_deterministic",
]
