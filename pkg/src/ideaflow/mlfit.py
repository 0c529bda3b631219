"""Maximum-likelihood fitting of any noise structure over sparse observations.

The log-likelihood is the Markov sum of transition log-densities over
consecutive observation pairs.  Optimization is derivative-free simplex
search in a log-parametrization of the positive parameters, multi-started
from perturbed growth-accounting initializations.  Standard errors come
from the finite-difference Fisher information and from a parametric
bootstrap (simulate from the fit, refit, tabulate).

The per-pair densities are evaluated in vectorized form for the two
families the heavy studies use (Gaussian increments at alpha = 2 and the
square-root diffusion); other stable exponents fall back to the scalar
density, which is accurate but slow inside an optimizer loop.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special, stats

from .errors import ConvergenceError, DomainError, IdentificationError
from .law import JonesParams, q_beta
from .series import InputPath, ObservationSet, TimeSeries
from .stochastic import (STRUCTURES, DriftDiffusionParams, NoiseModel,
                         StableParams, simulate_path, transition_logpdf)
from .stochastic.feller import _cir_constants, _log_bessel_i

__all__ = [
    "BootstrapResult",
    "FitResult",
    "ModelClass",
    "cross_validate",
    "fisher_se",
    "lrt_lambda_zero",
    "mle_fit",
    "parametric_bootstrap",
    "total_loglik",
]

logger = logging.getLogger("ideaflow.mlfit")

PARAM_NAMES = ("theta", "beta", "lam", "noise")
# Penalized objective value standing in for any non-finite log-likelihood.
_BIG = 1e15
# Soft barrier pushing lam_raw back toward [0, inf); likelihood below zero
# is flat (lam clipped), so this is the only restoring force there.
_BARRIER_SCALE = 0.05
_BARRIER_SLOPE = 20.0
# Noise scales are optimized in log-space down to this floor; deterministic
# data drive the scale onto it instead of diverging to -inf.  The floor
# also bounds how precisely the drift parameters must be polished before
# the likelihood flattens (residuals enter as (resid/noise)^2).
_NOISE_FLOOR = 1e-6
_LAMBDA_CAP = 50.0


@dataclass(frozen=True)
class ModelClass:
    """Noise structure plus the fixed shape of its increment law.

    ``alpha`` and ``skew`` are not fitted; they select the family.  The
    square-root diffusion ignores them (its noise is Gaussian).
    """

    structure: str
    alpha: float = 2.0
    skew: float = 0.0

    def __post_init__(self) -> None:
        if self.structure not in STRUCTURES:
            raise DomainError(f"unknown structure {self.structure!r}; "
                              f"choose one of {STRUCTURES}")
        if not 0.0 < self.alpha <= 2.0:
            raise DomainError(f"alpha must be in (0, 2], got {self.alpha!r}")
        if not abs(self.skew) <= 1.0:
            raise DomainError(f"skew must be in [-1, 1], got {self.skew!r}")

    def build(self, theta: float, beta: float, lam: float,
              noise: float) -> NoiseModel:
        jones = JonesParams(theta=theta, beta=beta, lam=lam)
        if self.structure == "feller":
            return NoiseModel(self.structure, jones,
                              DriftDiffusionParams(theta, noise))
        return NoiseModel(self.structure, jones,
                          StableParams(self.alpha, self.skew, theta, noise))


def class_of(model: NoiseModel) -> ModelClass:
    """The fitting family a concrete model belongs to."""
    if model.structure == "feller":
        return ModelClass("feller")
    return ModelClass(model.structure, model.levy.alpha, model.levy.skew)


def params_of(model: NoiseModel) -> dict[str, float]:
    """Natural-space parameter dict (theta, beta, lam, noise) of a model."""
    noise = (model.levy.sigma if model.structure == "feller"
             else model.levy.scale)
    return {"theta": model.jones.theta, "beta": model.jones.beta,
            "lam": model.jones.lam, "noise": float(noise)}


@dataclass(frozen=True)
class FitResult:
    """Point estimate with likelihood value and optimization diagnostics.

    ``lambda_raw`` is the optimizer's unclipped elasticity; the model holds
    its value clipped to zero.  ``fisher_se`` is None when the numerical
    Hessian is not positive definite (boundary or flat directions).
    """

    model: NoiseModel
    loglik: float
    fisher_se: dict[str, float] | None
    converged: bool
    n_restarts_used: int
    lambda_raw: float

    @property
    def params(self) -> dict[str, float]:
        return params_of(self.model)

    @property
    def r(self) -> float:
        beta = self.model.jones.beta
        if beta <= 0.0:
            return math.nan
        return self.model.jones.lam / beta


@dataclass(frozen=True)
class BootstrapResult:
    """Parametric bootstrap draws and the summaries built from them.

    Each draw is (lam_raw, beta, theta, noise, r) with r = lam/beta left
    undefined (NaN) for beta <= 0 draws.  ``conditional_r`` summarizes r
    over draws with lam_raw > 0 and beta > 0 by median and a robust
    (median-absolute-deviation) standard error, which stays bounded when
    the ratio distribution has no moments.
    """

    draws: np.ndarray
    se: dict[str, float]
    conditional_r: dict[str, float]
    n_lambda_negative: int


class _PairData:
    """Per-pair arrays and flattened quadrature for fast re-evaluation."""

    def __init__(self, obs: ObservationSet, path: InputPath):
        pairs = obs.pairs
        self.n = len(pairs)
        arr = np.asarray(pairs, dtype=float)
        self.t1, self.a1, self.t2, self.a2 = arr.T
        self.log_a1 = np.log(self.a1)
        self.log_a2 = np.log(self.a2)
        self.log_ratio = self.log_a2 - self.log_a1
        weights, logs, starts = [], [], []
        offset = 0
        for t1, _, t2, _ in pairs:
            _, w, lg = path.window_rule(t1, t2)
            starts.append(offset)
            weights.append(w)
            logs.append(lg)
            offset += w.size
        self.flat_w = np.concatenate(weights)
        self.flat_logs = np.concatenate(logs)
        self.starts = np.asarray(starts, dtype=np.intp)

    def tau(self, lam: float) -> np.ndarray:
        """Vector of ∫ I^lam over each observation window."""
        vals = self.flat_w * np.exp(lam * self.flat_logs)
        return np.add.reduceat(vals, self.starts)


def _raw_increments(pd: _PairData, beta: float) -> np.ndarray:
    """(a2^beta - a1^beta)/beta per pair, with the beta -> 0 limit."""
    g = pd.log_ratio
    if abs(beta) < 1e-12:
        return g.copy()
    x1 = np.exp(beta * pd.log_a1)
    small = np.abs(beta * g) < 1e-8
    generic = np.expm1(beta * g) / beta
    return x1 * np.where(small, g, generic)


def _gaussian_terms(pd: _PairData, model: NoiseModel) -> np.ndarray:
    """Per-pair log transition densities for alpha = 2 stable structures."""
    jones, levy = model.jones, model.levy
    beta, lam = jones.beta, jones.lam
    tau = pd.tau(lam)
    loc = levy.rate * tau
    if model.structure == "independent-levy":
        scale = levy.scale * np.sqrt(tau)
    elif model.structure == "synchronized":
        scale = levy.scale * np.sqrt(pd.tau(2.0 * lam))
    else:
        scale = levy.scale * np.exp(0.5 * beta * pd.log_a1) * np.sqrt(tau)
    h = _raw_increments(pd, beta)
    z = (h - loc) / scale
    log_norm = math.log(2.0 * math.sqrt(math.pi))
    return (-0.25 * z * z - np.log(scale) - log_norm
            + (beta - 1.0) * pd.log_a2)


def _log_ive_vec(nu: float, z: np.ndarray) -> np.ndarray:
    """log(I_nu(z) e^-z) elementwise, scalar fallback off the easy range."""
    with np.errstate(over="ignore", invalid="ignore"):
        scaled = special.ive(nu, z)
    good = (scaled > 0.0) & np.isfinite(scaled)
    out = np.where(good, np.log(np.where(good, scaled, 1.0)), -np.inf)
    hard = ~good
    if hard.any():
        out[hard] = [_log_bessel_i(nu, float(v)) - float(v)
                     for v in z[hard]]
    return out


# Above this value of c0*(x1+x2) the exact Bessel assembly loses more to
# float cancellation than the Gaussian (Laplace) limit loses to
# truncation, so the near-deterministic branch takes over.
_NEEDLE = 1e8


def _feller_terms(pd: _PairData, model: NoiseModel) -> np.ndarray:
    """Per-pair log transition densities for the square-root diffusion."""
    jones, levy = model.jones, model.levy
    beta, lam = jones.beta, jones.lam
    tau = pd.tau(lam)
    # _cir_constants is scalar in tau; the identities it encodes are
    # algebraic, so broadcast them directly.
    b2 = (beta * levy.sigma) ** 2
    a = beta * (jones.theta + 0.5 * (beta - 1.0) * levy.sigma ** 2)
    c0 = 2.0 / (b2 * tau)
    q = 2.0 * a / b2 - 1.0
    x1 = np.exp(beta * pd.log_a1)
    x2 = np.exp(beta * pd.log_a2)
    out = np.empty(pd.n)
    needle = (c0 * (x1 + x2) > _NEEDLE) if q > 0.0 else np.zeros(pd.n, bool)
    exact = ~needle
    if exact.any():
        c0e, x1e, x2e, taue = c0[exact], x1[exact], x2[exact], tau[exact]
        z = 2.0 * c0e * np.sqrt(x1e * x2e)
        # -c0 (x1 + x2) + z = -c0 (sqrt(x1) - sqrt(x2))^2 avoids the
        # leading cancellation between the exponent and the Bessel growth.
        spread = c0e * (np.sqrt(x1e) - np.sqrt(x2e)) ** 2
        out[exact] = (np.log(c0e)
                      + 0.5 * q * beta * pd.log_ratio[exact]
                      - spread + _log_ive_vec(abs(q), z))
    if needle.any():
        c0n, x1n, x2n, taun = c0[needle], x1[needle], x2[needle], tau[needle]
        mean_shift = a * taun
        var = b2 * taun * (x1n + 0.5 * mean_shift)
        resid = x2n - x1n - mean_shift
        t = resid / np.sqrt(var)
        skew = (3.0 * b2 * b2 * taun * taun * (0.5 * x1n + mean_shift / 6.0)
                / var ** 1.5)
        corr = skew * (t ** 3 - 3.0 * t) / 6.0
        edge = np.where(corr > -0.5, np.log1p(np.maximum(corr, -0.5)), 0.0)
        out[needle] = (-0.5 * np.log(2.0 * math.pi * var) - 0.5 * t * t
                       + edge)
    return out + math.log(beta) + (beta - 1.0) * pd.log_a2


def _loglik_terms(model: NoiseModel, pd: _PairData,
                  path: InputPath) -> np.ndarray:
    if model.structure == "feller":
        if model.levy.sigma == 0.0:
            raise DomainError(
                "sigma = 0 is a deterministic transition with no density; "
                "the likelihood is defined only for sigma > 0")
        return _feller_terms(pd, model)
    if model.levy.alpha == 2.0:
        return _gaussian_terms(pd, model)
    out = np.empty(pd.n)
    for k in range(pd.n):
        out[k] = transition_logpdf(model, float(pd.a1[k]), float(pd.a2[k]),
                                   path, float(pd.t1[k]), float(pd.t2[k]))
    return out


def total_loglik(model: NoiseModel, obs: ObservationSet,
                 path: InputPath) -> float:
    """Markov log-likelihood: sum of transition log-densities over pairs."""
    pd = _PairData(obs, path)
    terms = _loglik_terms(model, pd, path)
    bad = ~np.isfinite(terms)
    if bad.any():
        k = int(np.argmax(bad))
        logger.warning(
            "zero transition density for the pair t=%s -> t=%s "
            "(levels %s -> %s); log-likelihood is -inf",
            pd.t1[k], pd.t2[k], pd.a1[k], pd.a2[k])
        return -math.inf
    return float(terms.sum())


def _barrier(lam_raw: float) -> float:
    # softplus(-slope * lam): ~0 for lam >> 0, linear in -lam below zero
    y = -_BARRIER_SLOPE * lam_raw
    if y > 40.0:
        return _BARRIER_SCALE * y
    return _BARRIER_SCALE * math.log1p(math.exp(y))


class _Objective:
    """Penalized negative log-likelihood over the optimizer vector.

    Layout: [log theta, beta, lam_raw, log noise], with lam_raw dropped
    when the elasticity is held fixed.  Out-of-domain points return a
    large finite value so the simplex can recover.
    """

    def __init__(self, model_class: ModelClass, pd: _PairData,
                 path: InputPath, fixed_lam: float | None,
                 bounds: dict[str, tuple[float, float]] | None):
        self.cls = model_class
        self.pd = pd
        self.path = path
        self.fixed_lam = fixed_lam
        self.bounds = bounds or {}

    def unpack(self, u: np.ndarray) -> dict[str, float] | None:
        if self.fixed_lam is None:
            log_theta, beta, lam_raw, log_noise = u
        else:
            log_theta, beta, log_noise = u
            lam_raw = self.fixed_lam
        if abs(log_theta) > 30.0 or abs(log_noise) > 30.0 or abs(beta) > 20.0:
            return None
        lam = min(max(lam_raw, 0.0), _LAMBDA_CAP)
        theta = math.exp(log_theta)
        noise = max(math.exp(log_noise), _NOISE_FLOOR)
        if self.cls.structure == "feller":
            if beta <= 0.0 or not theta > 0.5 * noise ** 2 * (1.0 - beta):
                return None
        return {"theta": theta, "beta": beta, "lam": lam, "noise": noise,
                "lam_raw": lam_raw}

    def model_at(self, u: np.ndarray) -> NoiseModel | None:
        p = self.unpack(u)
        if p is None:
            return None
        return self.cls.build(p["theta"], p["beta"], p["lam"], p["noise"])

    def __call__(self, u: np.ndarray) -> float:
        p = self.unpack(u)
        if p is None:
            return _BIG
        model = self.cls.build(p["theta"], p["beta"], p["lam"], p["noise"])
        with np.errstate(all="ignore"):
            terms = _loglik_terms(model, self.pd, self.path)
        total = float(terms.sum())
        if not math.isfinite(total):
            return _BIG
        penalty = _barrier(p["lam_raw"])
        for name, (lo, hi) in self.bounds.items():
            value = p[name]
            if value < lo:
                penalty += 1e4 * math.log(lo / max(value, 1e-300)) ** 2
            elif value > hi:
                penalty += 1e4 * math.log(value / hi) ** 2
        return -total + penalty


def _naive_init(obs: ObservationSet, path: InputPath,
                pd: _PairData) -> dict[str, float]:
    """Growth-accounting starting point: beta = 1 and matched drift."""
    t, a = obs.times, obs.levels
    span = float(t[-1] - t[0])
    g_a = math.log(a[-1] / a[0]) / span
    i1, i2 = path.value(float(t[0])), path.value(float(t[-1]))
    g_i = math.log(i2 / i1) / span
    if abs(g_i) > 1e-12 and g_a / g_i > 0.0:
        lam0 = min(max(g_a / g_i, 0.05), 5.0)
    else:
        lam0 = 0.5
    tau = pd.tau(lam0)
    dx = np.diff(a)
    drift = float(dx.sum() / tau.sum())
    theta0 = min(max(drift, 1e-6), 1e6)
    resid = dx - theta0 * tau
    noise0 = min(max(float(np.std(resid) / math.sqrt(float(tau.mean()))),
                     1e-4), 100.0)
    return {"theta": theta0, "beta": 1.0, "lam": lam0, "noise": noise0}


def _pack(init: dict[str, float], fixed_lam: float | None) -> np.ndarray:
    u = [math.log(init["theta"]), init["beta"]]
    if fixed_lam is None:
        u.append(init["lam"])
    u.append(math.log(max(init["noise"], _NOISE_FLOOR)))
    return np.asarray(u, dtype=float)


def mle_fit(model_class: ModelClass, obs: ObservationSet, path: InputPath, *,
            restarts: int = 8, tolerance: float = 1e-7,
            bounds: dict[str, tuple[float, float]] | None = None,
            seed: int = 0, fixed_lam: float | None = None,
            init: dict[str, float] | None = None,
            with_fisher: bool = True) -> FitResult:
    """Best-of-restarts simplex maximization of the total log-likelihood.

    ``init`` warm-starts the first restart (later ones perturb it);
    ``fixed_lam`` pins the elasticity for nested-model comparisons.
    """
    if len(obs) - 1 < 4:
        raise IdentificationError(
            f"need at least 4 observation pairs to identify "
            f"(theta, beta, lam, noise); got {len(obs) - 1}")
    pd = _PairData(obs, path)
    objective = _Objective(model_class, pd, path, fixed_lam, bounds)
    base = dict(init) if init is not None else _naive_init(obs, path, pd)
    if model_class.structure == "feller":
        base["beta"] = max(base["beta"], 0.05)
    rng = np.random.default_rng([seed, 20260825])
    starts = [base]
    for _ in range(max(restarts, 1) - 1):
        z = rng.normal(size=4)
        cand = {
            "theta": base["theta"] * math.exp(0.7 * z[0]),
            "beta": (base["beta"] * math.exp(0.4 * z[1])
                     if model_class.structure == "feller"
                     else base["beta"] + 0.5 * z[1]),
            "lam": base["lam"] * math.exp(0.6 * z[2]),
            "noise": base["noise"] * math.exp(0.8 * z[3]),
        }
        starts.append(cand)
    best = None
    trace: list[str] = []
    options = {"xatol": tolerance, "fatol": tolerance,
               "maxiter": 4000, "maxfev": 4000, "adaptive": True}
    for k, start in enumerate(starts):
        u0 = _pack(start, fixed_lam)
        res = optimize.minimize(objective, u0, method="Nelder-Mead",
                                options=options)
        rounds = 1
        # A long monotone march (e.g. noise scale running to its floor) can
        # exhaust one simplex; re-seeding from the incumbent finishes it.
        while not res.success and rounds < 3:
            res = optimize.minimize(objective, res.x, method="Nelder-Mead",
                                    options=options)
            rounds += 1
        trace.append(f"restart {k}: fun={res.fun:.6g} rounds={rounds} "
                     f"success={res.success} {res.message}")
        if res.success and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise ConvergenceError(
            "no optimizer restart converged", trace=trace)
    model = objective.model_at(best.x)
    p = objective.unpack(best.x)
    loglik = total_loglik(model, obs, path)
    fit = FitResult(model=model, loglik=loglik, fisher_se=None,
                    converged=True, n_restarts_used=len(starts),
                    lambda_raw=p["lam_raw"])
    if with_fisher:
        fit = FitResult(model=model, loglik=loglik,
                        fisher_se=fisher_se(fit, obs, path), converged=True,
                        n_restarts_used=len(starts),
                        lambda_raw=p["lam_raw"])
    return fit


def fisher_se(fit: FitResult, obs: ObservationSet,
              path: InputPath) -> dict[str, float] | None:
    """Inverse-Hessian standard errors at the optimum, or None if not PD.

    The Hessian of the negative log-likelihood is taken by central finite
    differences in the natural parameter space.
    """
    pd = _PairData(obs, path)
    cls = class_of(fit.model)
    center = np.asarray([fit.params[name] for name in PARAM_NAMES])

    def neg_loglik(vec: np.ndarray) -> float:
        theta, beta, lam, noise = vec
        if theta <= 0.0 or noise <= 0.0 or lam < 0.0:
            return math.nan
        if cls.structure == "feller" and (
                beta <= 0.0 or not theta > 0.5 * noise ** 2 * (1.0 - beta)):
            return math.nan
        model = cls.build(theta, beta, lam, noise)
        with np.errstate(all="ignore"):
            total = float(_loglik_terms(model, pd, path).sum())
        return -total if math.isfinite(total) else math.nan

    steps = np.maximum(1e-4 * np.abs(center), 1e-6)
    d = center.size
    hess = np.empty((d, d))
    f0 = neg_loglik(center)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = steps[i]
        hess[i, i] = (neg_loglik(center + ei) - 2.0 * f0
                      + neg_loglik(center - ei)) / steps[i] ** 2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = steps[j]
            hess[i, j] = hess[j, i] = (
                neg_loglik(center + ei + ej) - neg_loglik(center + ei - ej)
                - neg_loglik(center - ei + ej) + neg_loglik(center - ei - ej)
            ) / (4.0 * steps[i] * steps[j])
    if not np.all(np.isfinite(hess)):
        return None
    try:
        np.linalg.cholesky(hess)
        cov = np.linalg.inv(hess)
    except np.linalg.LinAlgError:
        return None
    diag = np.diag(cov)
    if np.any(diag <= 0.0):
        return None
    return {name: float(math.sqrt(v))
            for name, v in zip(PARAM_NAMES, diag)}


def _simulate_obs(model: NoiseModel, obs: ObservationSet, path: InputPath,
                  rng: np.random.Generator) -> ObservationSet:
    """Synthetic observations on the same grid; retries rare absorptions."""
    from .errors import SingularityError

    grid = obs.times
    a0 = float(obs.levels[0])
    for _ in range(100):
        try:
            sim = simulate_path(model, a0, path, grid, rng)
        except SingularityError:
            continue
        return ObservationSet(sim.times, sim.values)
    raise ConvergenceError(
        "simulation kept hitting the zero boundary; the fitted model "
        "absorbs almost surely on this grid")


def parametric_bootstrap(fit: FitResult, obs: ObservationSet,
                         path: InputPath, n: int = 100, seed: int = 0, *,
                         restarts: int = 2) -> BootstrapResult:
    """Simulate-from-fit bootstrap; deterministic in (seed, n).

    Draw columns are (lam_raw, beta, theta, noise, r).  Refits warm-start
    at the fitted parameters with a fixed optimizer seed, so identical
    replicate data yield identical draws (deterministic data collapse the
    bootstrap distribution to a point).
    """
    cls = class_of(fit.model)
    rows = np.empty((n, 5))
    for i in range(n):
        rng = np.random.default_rng([seed, i])
        sim = _simulate_obs(fit.model, obs, path, rng)
        refit = mle_fit(cls, sim, path, restarts=restarts, seed=seed,
                        init=fit.params, with_fisher=False)
        p = refit.params
        r = p["lam"] / p["beta"] if p["beta"] > 0.0 else math.nan
        rows[i] = (refit.lambda_raw, p["beta"], p["theta"], p["noise"], r)
    def spread(col: np.ndarray) -> float:
        # Identical draws have zero spread exactly; np.std leaves ulp-level
        # residue from the rounded mean.
        if col.size < 2 or np.ptp(col) == 0.0:
            return 0.0
        return float(np.std(col, ddof=1))

    se = {name: spread(rows[:, col])
          for col, name in enumerate(("lam", "beta", "theta", "noise"))}
    r_col = rows[:, 4]
    se["r"] = spread(r_col[np.isfinite(r_col)])
    keep = (rows[:, 0] > 0.0) & (rows[:, 1] > 0.0) & np.isfinite(r_col)
    subset = r_col[keep]
    if subset.size:
        med = float(np.median(subset))
        mad = float(np.median(np.abs(subset - med)))
        conditional = {"median": med, "se": 1.4826 * mad,
                       "n": int(subset.size)}
    else:
        conditional = {"median": math.nan, "se": math.nan, "n": 0}
    return BootstrapResult(draws=rows, se=se, conditional_r=conditional,
                           n_lambda_negative=int(np.sum(rows[:, 0] < 0.0)))


def lrt_lambda_zero(obs: ObservationSet, path: InputPath,
                    model_class: ModelClass, *, restarts: int = 6,
                    seed: int = 0) -> dict[str, float]:
    """Likelihood-ratio test of lam = 0 against lam free.

    The free fit runs from two starting points and keeps the better one:
    warm at the constrained optimum (nesting makes the statistic
    nonnegative; residual optimizer noise is clipped at 0) and the
    data-driven default (restart perturbations are multiplicative in lam,
    so a warm start at lam ~ 0 alone cannot reach a distant optimum).
    """
    constrained = mle_fit(model_class, obs, path, restarts=restarts,
                          seed=seed, fixed_lam=0.0, with_fisher=False)
    warm = dict(constrained.params)
    warm["lam"] = warm["lam"] if warm["lam"] > 0.0 else 1e-3
    sub = max(restarts // 2, 2)
    free = mle_fit(model_class, obs, path, restarts=sub, seed=seed,
                   init=warm, with_fisher=False)
    cold = mle_fit(model_class, obs, path, restarts=sub, seed=seed,
                   with_fisher=False)
    if cold.loglik > free.loglik:
        free = cold
    stat = max(2.0 * (free.loglik - constrained.loglik), 0.0)
    return {"stat": stat, "p_value": float(stats.chi2.sf(stat, df=1))}


def cross_validate(obs: ObservationSet, path: InputPath, split: float = 0.8,
                   model_classes: tuple[ModelClass, ...] = (
                       ModelClass("independent-levy"), ModelClass("feller")),
                   *, restarts: int = 6, seed: int = 0
                   ) -> dict[ModelClass, float]:
    """Chronological train/test split; held-out log-likelihood per class.

    The test set starts at the last training observation, so the held-out
    score is a sum of out-of-sample transition densities.
    """
    if not 0.0 < split < 1.0:
        raise DomainError(f"split must be in (0, 1), got {split!r}")
    k = int(math.floor(split * len(obs)))
    if k < 5 or k >= len(obs):
        raise IdentificationError(
            f"split {split} leaves {k} training observations of "
            f"{len(obs)}; need >= 5 and at least one held-out point")
    train = ObservationSet(obs.times[:k], obs.levels[:k])
    test = ObservationSet(obs.times[k - 1:], obs.levels[k - 1:])
    out = {}
    for cls in model_classes:
        fit = mle_fit(cls, train, path, restarts=restarts, seed=seed,
                      with_fisher=False)
        out[cls] = total_loglik(fit.model, test, path)
    return out
