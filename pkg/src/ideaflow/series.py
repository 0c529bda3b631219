"""Time-series data model: levels, interpolation, growth rates, input norms.

All estimators consume these types. A ``TimeSeries`` holds strictly increasing
decimal-year times with positive levels; an ``InputPath`` equips one with an
interpolation rule and a composite-Simpson quadrature used for every
integral of the form ``integral of I(t)^p dt``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SpanError

INTERPOLATIONS = ("step-left", "linear", "log-linear")


def _as_float_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """Strictly increasing times (decimal years) with positive levels."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = _as_float_array(self.times, "times")
        values = _as_float_array(self.values, "values")
        if times.size < 2:
            raise DomainError("a series needs at least 2 points")
        if times.size != values.size:
            raise DomainError("times and values must have equal length")
        if not np.all(np.diff(times) > 0):
            raise DomainError("times must be strictly increasing")
        if not np.all(values > 0):
            raise DomainError("levels must be positive")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def span(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def level(self, t: float, interpolation: str = "log-linear") -> float:
        """Level at ``t``, interpolating inside the span (log-linear default)."""
        lo, hi = self.span
        if t < lo or t > hi:
            raise SpanError(f"time {t} outside series span [{lo}, {hi}]")
        return float(_interp(np.asarray([t], dtype=float), self.times,
                             self.values, interpolation)[0])

    def scaled(self, factor: float) -> "TimeSeries":
        """Series with all levels multiplied by a positive constant."""
        if factor <= 0:
            raise DomainError("scale factor must be positive")
        return TimeSeries(self.times, self.values * factor)


@dataclass(frozen=True)
class ObservationSet:
    """Sparse observations of the output level A at known times."""

    times: np.ndarray
    levels: np.ndarray

    def __post_init__(self):
        times = _as_float_array(self.times, "times")
        levels = _as_float_array(self.levels, "levels")
        if times.size < 2:
            raise DomainError("an observation set needs at least 2 points")
        if times.size != levels.size:
            raise DomainError("times and levels must have equal length")
        if not np.all(np.diff(times) > 0):
            raise DomainError("observation times must be strictly increasing")
        if not np.all(levels > 0):
            raise DomainError("observed levels must be positive")
        times.setflags(write=False)
        levels.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "levels", levels)

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def pairs(self) -> list[tuple[float, float, float, float]]:
        """Consecutive (t1, a1, t2, a2) transition windows."""
        t, a = self.times, self.levels
        return [(float(t[k]), float(a[k]), float(t[k + 1]), float(a[k + 1]))
                for k in range(t.size - 1)]


def _interp(ts: np.ndarray, knots: np.ndarray, values: np.ndarray,
            interpolation: str) -> np.ndarray:
    """Vectorized interpolation of a positive series at times ``ts``."""
    if interpolation not in INTERPOLATIONS:
        raise DomainError(f"unknown interpolation {interpolation!r}; "
                          f"choose one of {INTERPOLATIONS}")
    idx = np.searchsorted(knots, ts, side="right") - 1
    idx = np.clip(idx, 0, knots.size - 2)
    if interpolation == "step-left":
        return values[idx]
    t0, t1 = knots[idx], knots[idx + 1]
    w = (ts - t0) / (t1 - t0)
    if interpolation == "linear":
        return (1.0 - w) * values[idx] + w * values[idx + 1]
    logv = np.log(values)
    return np.exp((1.0 - w) * logv[idx] + w * logv[idx + 1])


# Composite Simpson weights on one piece with n even subdivisions.
def _simpson_weights(n: int) -> np.ndarray:
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / 3.0


@dataclass(frozen=True)
class InputPath:
    """Input series with an interpolation rule and a fixed quadrature.

    Quadrature is composite Simpson with ``subdivisions`` (even) subintervals
    per data interval; window rules are memoized per (t1, t2).
    """

    series: TimeSeries
    interpolation: str = "log-linear"
    subdivisions: int = 16
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.interpolation not in INTERPOLATIONS:
            raise DomainError(f"unknown interpolation {self.interpolation!r}; "
                              f"choose one of {INTERPOLATIONS}")
        if self.subdivisions < 2 or self.subdivisions % 2 != 0:
            raise DomainError("subdivisions must be an even integer >= 2")

    @property
    def span(self) -> tuple[float, float]:
        return self.series.span

    def _check_window(self, t1: float, t2: float):
        lo, hi = self.span
        if t1 < lo or t2 > hi:
            raise SpanError(f"window [{t1}, {t2}] outside path span [{lo}, {hi}]")
        if not t1 < t2:
            raise DomainError(f"window start {t1} must precede end {t2}")

    def values(self, ts: np.ndarray) -> np.ndarray:
        """Vectorized evaluation of the interpolant inside the span."""
        ts = np.asarray(ts, dtype=float)
        lo, hi = self.span
        if ts.size and (ts.min() < lo or ts.max() > hi):
            raise SpanError(f"evaluation time outside path span [{lo}, {hi}]")
        return _interp(ts, self.series.times, self.series.values,
                       self.interpolation)

    def value(self, t: float) -> float:
        return float(self.values(np.asarray([t]))[0])

    def window_rule(self, t1: float, t2: float,
                    subdivisions: int | None = None
                    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Quadrature nodes, weights and log-input values for the window.

        ``weights @ exp(p * logs)`` equals the composite-Simpson value of
        the integral of I^p over [t1, t2]. Step-left pieces are evaluated with
        the left knot value throughout, so the rule integrates the actual
        interpolant exactly piecewise.
        """
        n = self.subdivisions if subdivisions is None else subdivisions
        key = (float(t1), float(t2), n)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        self._check_window(t1, t2)
        knots = self.series.times
        vals = self.series.values
        # Piece boundaries: window ends plus interior data knots.
        inner = knots[(knots > t1) & (knots < t2)]
        bounds = np.concatenate(([t1], inner, [t2]))
        base_w = _simpson_weights(n)
        nodes_parts, weights_parts, logs_parts = [], [], []
        logv = np.log(vals)
        for a, b in zip(bounds[:-1], bounds[1:]):
            h = (b - a) / n
            nodes = a + h * np.arange(n + 1)
            k = min(int(np.searchsorted(knots, a, side="right")) - 1,
                    knots.size - 2)
            if self.interpolation == "step-left":
                logs = np.full(n + 1, logv[k])
            elif self.interpolation == "linear":
                w = (nodes - knots[k]) / (knots[k + 1] - knots[k])
                logs = np.log((1 - w) * vals[k] + w * vals[k + 1])
            else:
                w = (nodes - knots[k]) / (knots[k + 1] - knots[k])
                logs = (1 - w) * logv[k] + w * logv[k + 1]
            nodes_parts.append(nodes)
            weights_parts.append(base_w * h)
            logs_parts.append(logs)
        rule = (np.concatenate(nodes_parts), np.concatenate(weights_parts),
                np.concatenate(logs_parts))
        for arr in rule:
            arr.setflags(write=False)
        self._cache[key] = rule
        return rule

    def log_integral_power(self, p: float, t1: float, t2: float,
                           subdivisions: int | None = None) -> float:
        """log of the integral of I^p over [t1, t2], overflow-safe."""
        _, weights, logs = self.window_rule(t1, t2, subdivisions)
        shift = float(np.max(p * logs))
        return shift + float(np.log(weights @ np.exp(p * logs - shift)))

    def integral_power(self, p: float, t1: float, t2: float,
                       subdivisions: int | None = None) -> float:
        """Integral of I^p over [t1, t2] by the fixed composite Simpson rule."""
        return float(np.exp(self.log_integral_power(p, t1, t2, subdivisions)))


def lp_norm(path: InputPath, p: float, t1: float, t2: float) -> float:
    """L^p norm of the input path over [t1, t2]: (integral of I^p)^(1/p)."""
    if p <= 0:
        raise DomainError(f"lp_norm needs p > 0, got {p}")
    return float(np.exp(path.log_integral_power(p, t1, t2) / p))


def avg_growth(series: TimeSeries, t1: float, t2: float,
               interpolation: str = "log-linear") -> float:
    """Average growth rate log(X(t2)/X(t1))/(t2 - t1) per year."""
    if not t1 < t2:
        raise DomainError(f"avg_growth needs t1 < t2, got {t1} >= {t2}")
    x1 = series.level(t1, interpolation)
    x2 = series.level(t2, interpolation)
    return float(np.log(x2 / x1) / (t2 - t1))
