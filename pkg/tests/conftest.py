"""Shared builders for synthetic series used across the test suite."""
from __future__ import annotations

import numpy as np
import pytest
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from ideaflow.series import InputPath, TimeSeries
from ideaflow.stochastic import StableParams, stable_cdf, stable_sample


def exponential_series(growth: float, start: float = 0.0, stop: float = 10.0,
                       n: int = 11, level0: float = 1.0) -> TimeSeries:
    """Annual-style sampling of level0 * exp(growth * (t - start))."""
    times = np.linspace(start, stop, n)
    return TimeSeries(times, level0 * np.exp(growth * (times - start)))


def exponential_path(growth: float, start: float = 0.0, stop: float = 10.0,
                     n: int = 11, level0: float = 1.0,
                     interpolation: str = "log-linear") -> InputPath:
    return InputPath(exponential_series(growth, start, stop, n, level0),
                     interpolation=interpolation)


def constant_path(level: float, start: float = 0.0, stop: float = 1.0,
                  n: int = 2) -> InputPath:
    times = np.linspace(start, stop, n)
    return InputPath(TimeSeries(times, np.full(times.size, level)))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260825)


def stable_quantile(p: StableParams, prob: float) -> float:
    """Invert the numeric stable CDF by geometric bracketing + brentq."""
    lo, hi = p.rate - p.scale, p.rate + p.scale
    while stable_cdf(lo, p) > prob:
        lo = p.rate + 4.0 * (lo - p.rate)
    while stable_cdf(hi, p) < prob:
        hi = p.rate + 4.0 * (hi - p.rate)
    return brentq(lambda x: stable_cdf(x, p) - prob, lo, hi,
                  xtol=1e-10 * p.scale)


def stable_ks_distance(p: StableParams, n: int, seed: int) -> float:
    """Exact KS statistic of n sampler draws against the numeric CDF.

    The CDF is interpolated monotonically on a grid with a linear core and
    geometric tail extensions (a linear grid between extreme quantiles of a
    heavy-tailed law would starve the bulk); draws beyond the grid get exact
    CDF evaluations, so the interpolation error is far below the statistic.
    """
    xs = np.sort(stable_sample(p, np.random.default_rng(seed), size=n))
    z01, z99 = stable_quantile(p, 0.01), stable_quantile(p, 0.99)
    zlo, zhi = stable_quantile(p, 2e-4), stable_quantile(p, 1.0 - 2e-4)
    core = np.linspace(z01, z99, 501)
    step = core[1] - core[0]
    right = z99 + np.geomspace(step, max(zhi - z99, 2.0 * step), 80)
    left = z01 - np.geomspace(step, max(z01 - zlo, 2.0 * step), 80)
    grid = np.unique(np.concatenate([left, core, right]))
    interp = PchipInterpolator(
        grid, np.maximum.accumulate(np.clip(stable_cdf(grid, p), 0.0, 1.0)))
    fx = np.empty(n)
    inside = (xs >= grid[0]) & (xs <= grid[-1])
    fx[inside] = np.clip(interp(xs[inside]), 0.0, 1.0)
    for mask in (xs < grid[0], xs > grid[-1]):
        if mask.any():
            fx[mask] = stable_cdf(xs[mask], p)
    i = np.arange(n)
    return float(np.max(np.maximum((i + 1) / n - fx, fx - i / n)))


def feller_em_sample(s1: float, theta: float, sigma: float, beta: float,
                     tau: float, n_steps: int, n_paths: int,
                     seed: int) -> np.ndarray:
    """Euler--Maruyama endpoints of dS = theta S^(1-b) dt + sigma S^(1-b/2) dW.

    Time stepping on the level itself, independent of the power-coordinate
    closed form it is used to check. Paths that step at or below zero are
    frozen there (the boundary is absorbing).
    """
    gen = np.random.default_rng(seed)
    h = tau / n_steps
    sqh = np.sqrt(h)
    s = np.full(n_paths, float(s1))
    for _ in range(n_steps):
        alive = s > 0.0
        sa = s[alive]
        sa = (sa + theta * sa ** (1.0 - beta) * h
              + sigma * sa ** (1.0 - 0.5 * beta) * sqh
              * gen.standard_normal(sa.size))
        s[alive] = np.maximum(sa, 0.0)
    return s


def feller_chi2_pvalue(draws: np.ndarray, s1: float, theta: float,
                       sigma: float, beta: float, tau: float,
                       n_bins: int = 25) -> float:
    """Chi-square p-value of sampled levels against the exact transition law.

    Bins are survivor quantiles plus an explicit zero bin for the absorbed
    atom; expected masses integrate the density in the X = S^beta coordinate,
    where the integrand has no endpoint singularity.
    """
    from scipy import integrate, stats

    from ideaflow.stochastic import (feller_absorbed_mass,
                                     feller_transition_logpdf)

    atom = feller_absorbed_mass(s1, theta, sigma, beta, tau)
    pos = draws[draws > 0.0]
    edges = np.unique(np.quantile(pos, np.linspace(0.02, 0.98, n_bins)))

    def f_x(x: float) -> float:
        s2 = x ** (1.0 / beta)
        return (np.exp(feller_transition_logpdf(s1, s2, theta, sigma, beta,
                                                tau))
                / (beta * s2 ** (beta - 1.0)))

    xedges = np.concatenate([[0.0], edges ** beta, [np.inf]])
    hi_cap = max(60.0, 6.0 * xedges[-2])
    probs = np.array([
        integrate.quad(f_x, a, b if np.isfinite(b) else hi_cap, limit=300)[0]
        for a, b in zip(xedges[:-1], xedges[1:])])
    expected = np.concatenate([[atom], probs]) * draws.size
    counts = np.concatenate([
        [np.sum(draws == 0.0)],
        np.histogram(pos, np.concatenate([[0.0], edges, [np.inf]]))[0]])
    keep = expected > 5.0
    chi2 = float(((counts[keep] - expected[keep]) ** 2 / expected[keep]).sum())
    return float(stats.chi2.sf(chi2, int(keep.sum()) - 1))
