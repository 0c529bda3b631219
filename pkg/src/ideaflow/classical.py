"""Closed-form and root-finding estimators for the law of motion.

Covers the naive growth-rate ratio, the refined naive solver, the bracket
estimator for coarse data, the deprecated diminishing-returns approximation
with its bias correction, and the approximate log-linear OLS regression with
multicollinearity diagnostics.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DomainError,
    IdentificationError,
    IncreasingOutputError,
    NoSolutionError,
    SingularDesignError,
    SpanError,
)
from .series import InputPath, ObservationSet

# Default root bracket for the diminishing-returns exponent, expanded x4 up to
# three times before giving up.
_BETA_BRACKET = (1e-8, 64.0)
_BRACKET_EXPANSIONS = 3


def naive_r(gA: float, gI: float) -> float:
    """Returns ratio estimated by dividing average growth rates."""
    if gI == 0:
        raise DomainError("naive_r: input growth rate is zero, ratio undefined")
    return gA / gI


def effective_sample_size(n: int, rho: float) -> float:
    """Observations left after collinearity shrinkage, n * (1 - rho^2)."""
    if n < 0:
        raise DomainError(f"sample size must be nonnegative, got {n!r}")
    if not -1.0 <= rho <= 1.0:
        raise DomainError(f"correlation must lie in [-1, 1], got {rho!r}")
    return n * (1.0 - rho ** 2)


def _log_abs_expm1(x: float) -> float:
    """log|exp(x) - 1|, overflow-safe for large positive x."""
    if x > 30.0:
        return x + np.log1p(-np.exp(-x))
    return float(np.log(np.abs(np.expm1(x))))


def refined_naive_beta(a0: float, a1: float, a2: float,
                       t0: float, t1: float, t2: float,
                       path: InputPath, lam: float) -> float:
    """Diminishing-returns exponent from three levels and the input path.

    Solves ((a2/a0)^beta - 1)/((a1/a0)^beta - 1) = J(t0,t2)/J(t0,t1) with
    J the integral of I^lam; the left side is strictly increasing in beta with
    range (1, inf), so a bracketed root is unique.
    """
    if not (0 < a0 < a1 < a2):
        raise DomainError("refined_naive_beta needs a2 > a1 > a0 > 0")
    if not (t0 < t1 < t2):
        raise DomainError("refined_naive_beta needs t0 < t1 < t2")
    if lam < 0:
        raise DomainError("lam must be nonnegative")
    ratio = (path.integral_power(lam, t0, t2)
             / path.integral_power(lam, t0, t1))
    if ratio <= 1.0:
        raise NoSolutionError(
            f"input integral ratio {ratio:.6g} is not above 1; the defining "
            "map cannot attain it")
    log_ratio = np.log(ratio)
    l1, l2 = np.log(a1 / a0), np.log(a2 / a0)

    def gap(beta: float) -> float:
        return _log_abs_expm1(beta * l2) - _log_abs_expm1(beta * l1) - log_ratio

    # The beta -> 0 limit of the left side is l2/l1; it decides the root sign.
    eps = 1e-8
    if abs(gap(eps)) < 1e-14:
        return eps
    if gap(eps) > 0 and gap(-eps) < 0:
        return 0.0
    sign = 1.0 if gap(eps) < 0 else -1.0
    lo, hi = _BETA_BRACKET
    for attempt in range(_BRACKET_EXPANSIONS + 1):
        blo, bhi = sign * lo, sign * hi
        if sign < 0:
            blo, bhi = bhi, blo
        flo, fhi = gap(blo), gap(bhi)
        if flo == 0.0:
            return blo
        if fhi == 0.0:
            return bhi
        if flo * fhi < 0:
            return float(brentq(gap, blo, bhi, xtol=1e-12, rtol=8.9e-16))
        hi *= 4.0
    raise NoSolutionError(
        "no diminishing-returns exponent matches the level/input geometry "
        f"within |beta| <= {hi / 4:.3g}",
        bracket=(sign * lo, sign * hi / 4),
        values=(gap(sign * lo), gap(sign * hi / 4)))


@dataclass(frozen=True)
class BracketProblem:
    """Inputs of the coarse-data estimator.

    ``g1`` is the instantaneous growth rate observed at t1; ``gbar`` the
    average growth log(A(t2)/A(ts))/(t2 - ts) over the later window
    [ts, t2], with t1 < ts < t2 inside the input-path span.
    """

    path: InputPath
    t1: float
    ts: float
    t2: float
    g1: float
    gbar: float

    def __post_init__(self):
        if not (self.t1 < self.ts < self.t2):
            raise DomainError("bracket problem needs t1 < ts < t2")
        if self.g1 <= 0 or self.gbar <= 0:
            raise DomainError("bracket problem needs positive growth rates")
        lo, hi = self.path.span
        if self.t1 < lo or self.t2 > hi:
            raise SpanError("bracket problem times must lie in the path span")


def _bracket_tables(problem: BracketProblem, lam: float):
    """Quadrature nodes over [ts, t2] with input powers and running integrals."""
    path = problem.path
    nodes, weights, logs = path.window_rule(problem.ts, problem.t2)
    ipow = np.exp(lam * logs)
    running = np.array([path.integral_power(lam, problem.t1, float(q))
                        for q in nodes])
    d1 = path.value(problem.t1) ** lam / problem.g1
    return weights, ipow, running, d1


def bracket_phi(problem: BracketProblem, lam: float) -> float:
    """Diminishing-returns exponent solving the averaged-growth identity.

    The right side, the window average of I(q)^lam / (D1 + phi * J(t1, q)),
    is strictly decreasing in phi; bisection converges to 1e-10.
    """
    if lam < 0:
        raise DomainError("lam must be nonnegative")
    if lam == 0.0:
        lam = 1e-6  # degenerate case solved just off the boundary
    weights, ipow, running, d1 = _bracket_tables(problem, lam)
    width = problem.t2 - problem.ts

    def mean_growth(phi: float) -> float:
        denom = d1 + phi * running
        if np.any(denom <= 0):
            return np.inf
        return float(weights @ (ipow / denom)) / width

    # Denominator must stay positive up to t2; phi_min is just inside.
    phi_min = -d1 / running[-1]
    phi_lo = phi_min * (1.0 - 1e-9)
    lo_val = mean_growth(phi_lo)
    if lo_val < problem.gbar:
        raise NoSolutionError(
            f"average growth {problem.gbar:.6g} unattainable: the identity "
            f"tops out at {lo_val:.6g} near phi = {phi_lo:.6g}",
            bracket=(phi_lo, phi_lo), values=(lo_val, lo_val))
    phi_hi = 1.0
    for _ in range(200):
        if mean_growth(phi_hi) < problem.gbar:
            break
        phi_hi *= 4.0
    else:
        raise NoSolutionError(
            f"average growth {problem.gbar:.6g} unattainable below "
            f"phi = {phi_hi:.3g}",
            bracket=(phi_lo, phi_hi),
            values=(lo_val, mean_growth(phi_hi)))
    for _ in range(200):
        mid = 0.5 * (phi_lo + phi_hi)
        if mean_growth(mid) > problem.gbar:
            phi_lo = mid
        else:
            phi_hi = mid
        if phi_hi - phi_lo < 1e-10 * max(1.0, abs(phi_hi)):
            break
    return 0.5 * (phi_lo + phi_hi)


def bracket_r_bounds(problem: BracketProblem, lambda_lo: float,
                     lambda_hi: float, grid_points: int = 41
                     ) -> tuple[float, float]:
    """Min and max of r(lam) = lam/phi(lam) over a geometric lambda grid."""
    if lambda_lo < 0 or lambda_hi < lambda_lo:
        raise DomainError("need 0 <= lambda_lo <= lambda_hi")
    if lambda_hi == lambda_lo:
        grid = np.asarray([lambda_lo])
    elif lambda_lo > 0:
        grid = np.geomspace(lambda_lo, lambda_hi, grid_points)
    else:
        grid = np.concatenate(([0.0], np.geomspace(lambda_hi * 1e-6, lambda_hi,
                                                   grid_points - 1)))
    rs = []
    for lam in grid:
        try:
            phi = bracket_phi(problem, float(lam))
        except NoSolutionError as err:
            raise NoSolutionError(
                f"no solution at lambda = {lam:.6g}: {err}",
                bracket=err.bracket, values=err.values) from err
        if lam == 0.0:
            rs.append(0.0)  # r -> 0 limit with phi solved at lambda = 1e-6
        else:
            rs.append(float(lam) / phi)
    return float(min(rs)), float(max(rs))


@dataclass(frozen=True)
class DimReturnsResult:
    """Output of the deprecated windowed approximation."""

    beta_approx: float
    beta_corrected: float
    deprecated: bool = True


def dim_returns_beta(levels: tuple[float, float, float, float],
                     times: tuple[float, float, float, float],
                     path: InputPath, lam: float) -> DimReturnsResult:
    """Two-window approximation of the diminishing-returns exponent.

    Deprecated: biased at finite window sizes; kept for comparison with older
    analyses. The corrected value divides out the first-order bias term.
    """
    warnings.warn("dim_returns_beta is a deprecated approximation; prefer "
                  "refined_naive_beta or a likelihood fit", DeprecationWarning,
                  stacklevel=2)
    a1, a2, a3, a4 = levels
    t1, t2, t3, t4 = times
    if not (t1 < t2 <= t3 < t4):
        raise DomainError("windows must be ordered: t1 < t2 <= t3 < t4")
    if not (0 < a1 < a2 and 0 < a3 < a4):
        raise DomainError("levels must increase within each window")
    growth12 = np.log(a2 / a1)
    growth34 = np.log(a4 / a3)
    growth13 = np.log(a3 / a1)
    if growth13 <= 0:
        raise DomainError("windows must be separated by growth: a3 > a1")
    j12 = path.integral_power(lam, t1, t2)
    j34 = path.integral_power(lam, t3, t4)
    beta_approx = (np.log(growth12 / j12) - np.log(growth34 / j34)) / growth13
    correction = 1.0 - (growth12 - growth34) / (2.0 * growth13)
    if correction == 0.0:
        raise DomainError("bias correction degenerate: window growths differ "
                          "by exactly twice the separation growth")
    return DimReturnsResult(beta_approx=float(beta_approx),
                            beta_corrected=float(beta_approx / correction))


@dataclass(frozen=True)
class OlsFit:
    """Approximate log-linear regression estimates and diagnostics."""

    theta_hat: float
    beta_hat: float
    lambda_hat: float
    stderrs: dict[str, float]
    residual_variance: float
    rho: float
    effective_n: float
    n_windows: int
    coefficients: np.ndarray = field(repr=False)

    @property
    def r(self) -> float:
        if self.beta_hat == 0:
            raise DomainError("returns ratio undefined for beta_hat = 0")
        return self.lambda_hat / self.beta_hat


def ols_fit(observations: ObservationSet, path: InputPath) -> OlsFit:
    """OLS of log average growth on log level and log mean input.

    Regresses y = log((1/dt) * log(A2/A1)) on {1, log A(t1), log mean I} per
    consecutive observation window; coefficients map to (log theta, -beta,
    lambda). Reports classical standard errors, the regressor correlation rho
    and the effective sample size n * (1 - rho^2).
    """
    pairs = observations.pairs
    n = len(pairs)
    if n < 4:
        raise IdentificationError(
            f"need at least 4 observation windows to fit 3 coefficients "
            f"and a residual variance, got {n}")
    y = np.empty(n)
    log_level = np.empty(n)
    log_mean_input = np.empty(n)
    for k, (t1, a1, t2, a2) in enumerate(pairs):
        if a2 <= a1:
            raise IncreasingOutputError(
                f"window [{t1:g}, {t2:g}] has nonincreasing output "
                f"({a1:g} -> {a2:g}); the log-growth regression is undefined")
        dt = t2 - t1
        y[k] = np.log(np.log(a2 / a1) / dt)
        log_level[k] = np.log(a1)
        log_mean_input[k] = np.log(path.integral_power(1.0, t1, t2) / dt)
    design = np.column_stack([np.ones(n), log_level, log_mean_input])

    rho = _safe_corr(log_level, log_mean_input)
    effective_n = effective_sample_size(n, rho)

    # Collinearity check on the standardized design.
    scale = np.linalg.norm(design, axis=0)
    singulars = np.linalg.svd(design / scale, compute_uv=False)
    if singulars[-1] < 1e-10 * singulars[0]:
        g_out = (np.log(observations.levels[-1] / observations.levels[0])
                 / (observations.times[-1] - observations.times[0]))
        t_lo, t_hi = observations.times[0], observations.times[-1]
        g_in = (np.log(path.value(t_hi) / path.value(t_lo)) / (t_hi - t_lo))
        ratio = g_out / g_in if g_in != 0 else np.nan
        raise SingularDesignError(
            "regressors are perfectly collinear (jointly exponential data); "
            "only the ratio lambda/beta is identified and it equals the "
            f"growth-rate ratio {ratio:.6g}", degenerate_ratio=float(ratio))

    gram = design.T @ design
    coef = np.linalg.solve(gram, design.T @ y)
    residuals = y - design @ coef
    dof = n - 3
    s2 = float(residuals @ residuals / dof)
    cov = s2 * np.linalg.inv(gram)
    ses = np.sqrt(np.diag(cov))
    return OlsFit(
        theta_hat=float(np.exp(coef[0])),
        beta_hat=float(-coef[1]),
        lambda_hat=float(coef[2]),
        stderrs={"log_theta": float(ses[0]), "beta": float(ses[1]),
                 "lambda": float(ses[2])},
        residual_variance=s2,
        rho=float(rho),
        effective_n=float(effective_n),
        n_windows=n,
        coefficients=coef,
    )


def _safe_corr(x: np.ndarray, y: np.ndarray) -> float:
    sx, sy = np.std(x), np.std(y)
    if sx == 0 or sy == 0:
        return 0.0
    return float(np.corrcoef(x, y)[0, 1])
