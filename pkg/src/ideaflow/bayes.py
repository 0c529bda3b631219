"""Bayesian inference for data-scarce settings: one growth observation.

The prior puts independent unit half-Cauchy laws on four dimensionless
quantities: the input elasticity, the curvature exponent, a noise scale
and the drift's excess over the zero-absorption boundary.  A per-draw
time-scale anchor converts them to physical drift and diffusion so that
every draw is an admissible square-root diffusion by construction.
Sampling is differential-evolution Metropolis over the log-parameters,
and results are reported as posterior percentile tables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, ClassVar, Sequence

import numpy as np
from scipy import integrate, optimize

from .errors import ConstraintError, ConvergenceError, DomainError
from .series import InputPath, TimeSeries
from .stochastic import DriftDiffusionParams, NoiseModel
from .stochastic.feller import feller_transition_logpdf
from .law import JonesParams

__all__ = [
    "BayesResult",
    "HalfCauchyPrior",
    "PosteriorDraws",
    "PriorDraw",
    "ScaleAnchors",
    "bayes_fit",
    "build_prior",
    "de_metropolis_sample",
    "halfcauchy_quantile",
    "prior_r_density",
    "prior_r_quantiles",
]

PRIOR_PARAM_NAMES = ("lam", "beta", "sigma_s", "theta_s_excess")


def halfcauchy_quantile(q: float) -> float:
    """Quantile of the unit half-Cauchy law: tan(q pi / 2)."""
    if not 0.0 <= q < 1.0:
        raise DomainError(f"quantile level must be in [0, 1), got {q!r}")
    return math.tan(0.5 * math.pi * q)


def prior_r_density(x: float) -> float:
    """Density of the ratio of two independent unit half-Cauchy draws.

    The value is (4/pi^2) log(x)/(x^2 - 1), extended continuously through
    the removable point x = 1 where it equals 2/pi^2.
    """
    if not x > 0.0:
        raise DomainError(f"the ratio is positive; got {x!r}")
    e = x - 1.0
    if abs(e) < 1e-7:
        # log(1+e)/(e(2+e)) = 1/2 - e/2 + O(e^2)
        core = 0.5 - 0.5 * e
    else:
        core = math.log(x) / (x * x - 1.0)
    return 4.0 / math.pi ** 2 * core


def _ratio_cdf_below_one(x: float) -> float:
    val, _ = integrate.quad(prior_r_density, 0.0, x, epsabs=1e-12,
                            epsrel=1e-10)
    return val


def prior_r_quantiles(qs: Sequence[float]) -> list[float]:
    """Quantiles of the half-Cauchy ratio by numerical CDF inversion.

    The x <-> 1/x symmetry pins the median at 1 and maps upper quantiles
    to reciprocals of lower ones, so inversion only runs on (0, 1).
    """

    def invert(q: float) -> float:
        if not 0.0 < q < 1.0:
            raise DomainError(f"quantile level must be in (0, 1), got {q!r}")
        if q == 0.5:
            return 1.0
        if q > 0.5:
            return 1.0 / invert(1.0 - q)
        return float(optimize.brentq(
            lambda x: _ratio_cdf_below_one(x) - q, 1e-14, 1.0,
            xtol=1e-13, rtol=8.9e-16))

    return [invert(float(q)) for q in qs]


@dataclass(frozen=True)
class ScaleAnchors:
    """Dimensional anchors: initial output and input levels, input growth."""

    a_scale: float
    i_scale: float
    g_input: float

    def __post_init__(self) -> None:
        for name in ("a_scale", "i_scale", "g_input"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"{name} must be positive, "
                                  f"got {getattr(self, name)!r}")


@dataclass(frozen=True)
class PriorDraw:
    """One dimensionless parameter draw with its physical conversion.

    The drift constant is carried as its excess above the zero-absorption
    boundary sigma_s^2 max(1-beta, 0)/2, so every draw maps to an
    admissible square-root diffusion for any beta.
    """

    lam: float
    beta: float
    sigma_s: float
    theta_s_excess: float

    def __post_init__(self) -> None:
        for name in ("lam", "beta", "sigma_s", "theta_s_excess"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"{name} must be positive, "
                                  f"got {getattr(self, name)!r}")

    @property
    def theta_s(self) -> float:
        return (0.5 * self.sigma_s ** 2 * max(1.0 - self.beta, 0.0)
                + self.theta_s_excess)

    def time_scale(self, anchors: ScaleAnchors) -> float:
        """The characteristic time 1/(lam g_input / beta)."""
        return self.beta / (self.lam * anchors.g_input)

    def physical(self, anchors: ScaleAnchors) -> tuple[float, float]:
        """(theta, sigma) in physical units implied by the anchors."""
        dts = self.time_scale(anchors)
        theta = (self.theta_s * anchors.a_scale ** self.beta
                 * anchors.i_scale ** (-self.lam) / dts)
        sigma = (self.sigma_s * anchors.a_scale ** (0.5 * self.beta)
                 * anchors.i_scale ** (-0.5 * self.lam) / math.sqrt(dts))
        return theta, sigma

    def model(self, anchors: ScaleAnchors,
              lam: float | None = None) -> NoiseModel:
        """The square-root-diffusion model this draw parametrizes.

        ``lam`` overrides the elasticity used by the likelihood while the
        physical conversion keeps the drawn value.
        """
        theta, sigma = self.physical(anchors)
        use_lam = self.lam if lam is None else lam
        return NoiseModel("feller", JonesParams(theta, self.beta, use_lam),
                          DriftDiffusionParams(theta, sigma))


@dataclass(frozen=True)
class HalfCauchyPrior:
    """Four independent unit half-Cauchy components over the draw fields."""

    anchors: ScaleAnchors
    dim: ClassVar[int] = 4
    param_names: ClassVar[tuple[str, ...]] = PRIOR_PARAM_NAMES

    def sample(self, rng: np.random.Generator,
               n: int | None = None) -> np.ndarray:
        size = (1 if n is None else n, self.dim)
        u = np.abs(rng.standard_cauchy(size=size))
        return u[0] if n is None else u

    def log_density(self, u: np.ndarray) -> float:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.dim,) or not np.all(u > 0.0):
            return -math.inf
        return (self.dim * math.log(2.0 / math.pi)
                - float(np.log1p(u * u).sum()))

    def draw(self, u: np.ndarray) -> PriorDraw:
        return PriorDraw(*(float(v) for v in u))


def build_prior(anchors: ScaleAnchors) -> HalfCauchyPrior:
    """Prior over (lam, beta, sigma_s, theta_s_excess) given the anchors."""
    return HalfCauchyPrior(anchors)


@dataclass(frozen=True)
class PosteriorDraws:
    """Flattened post-burn-in draws with sampler diagnostics.

    ``draws`` rows are natural-space parameter vectors in ``param_names``
    order, generation-major (all chains of one generation, then the
    next).  ``split_rhat`` is computed on the log-scale sampling
    coordinates; values above 1.05 are echoed in ``warnings``.
    """

    draws: np.ndarray
    chains: int
    acceptance: np.ndarray
    split_rhat: dict[str, float]
    warnings: tuple[str, ...]
    param_names: tuple[str, ...]


def _split_rhat(series: np.ndarray) -> float:
    """Potential scale reduction over split half-chains for one parameter.

    ``series`` has shape (kept generations, chains).
    """
    n, m = series.shape
    half = n // 2
    if half < 2:
        return math.inf
    seqs = np.concatenate([series[:half], series[n - half:]], axis=1)
    w = float(seqs.var(axis=0, ddof=1).mean())
    if w == 0.0:
        return 1.0
    b = half * float(seqs.mean(axis=0).var(ddof=1))
    var_plus = (half - 1.0) / half * w + b / half
    return math.sqrt(var_plus / w)


def de_metropolis_sample(log_posterior: Callable[[np.ndarray], float],
                         prior, chains: int = 12, iterations: int = 20000,
                         burn_in: int | None = None,
                         seed: int = 0) -> PosteriorDraws:
    """Differential-evolution Metropolis over the log-parameter space.

    Each proposal adds a scaled difference of two other chains' previous
    states plus a small jitter; chains advance in lockstep generations.
    The target is ``log_posterior`` on natural parameters; the log-space
    change of variables is handled internally.  Bit-deterministic for a
    fixed (seed, chains, iterations).
    """
    d = int(prior.dim)
    names = tuple(prior.param_names)
    if chains < max(2 * d, 4):
        raise DomainError(f"need at least {max(2 * d, 4)} chains for "
                          f"{d} parameters, got {chains}")
    if iterations < 4:
        raise DomainError(f"iterations must be >= 4, got {iterations}")
    if burn_in is None:
        burn_in = iterations // 2
    if not 0 <= burn_in < iterations:
        raise DomainError(f"burn_in must be in [0, {iterations}), "
                          f"got {burn_in}")
    rng = np.random.default_rng(seed)
    y = np.empty((chains, d))
    g = np.empty(chains)
    filled = 0
    for _ in range(200 * chains):
        if filled == chains:
            break
        u = prior.sample(rng)
        lp = float(log_posterior(np.asarray(u, dtype=float)))
        if math.isfinite(lp):
            y[filled] = np.log(u)
            g[filled] = lp + float(y[filled].sum())
            filled += 1
    if filled < chains:
        raise ConvergenceError(
            f"could only initialize {filled} of {chains} chains from the "
            f"prior; the finite-density region is too small")
    gamma = 2.38 / math.sqrt(2.0 * d)
    idx = np.arange(chains)
    accepts = np.zeros(chains, dtype=np.int64)
    kept = np.empty((iterations - burn_in, chains, d))
    for gen in range(iterations):
        ra = rng.integers(0, chains - 1, size=chains)
        rb = rng.integers(0, chains - 2, size=chains)
        jitter = rng.normal(0.0, 1e-4, size=(chains, d))
        logu = np.log(rng.random(size=chains))
        # distinct partners a != b, both != the chain itself
        a = ra + (ra >= idx)
        lo = np.minimum(idx, a)
        hi = np.maximum(idx, a)
        b = rb + (rb >= lo)
        b = b + (b >= hi)
        prop = y + gamma * (y[a] - y[b]) + jitter
        gp = np.empty(chains)
        for i in range(chains):
            yi = prop[i]
            if np.any(np.abs(yi) > 500.0):
                gp[i] = -math.inf
                continue
            lp = float(log_posterior(np.exp(yi)))
            gp[i] = lp + float(yi.sum()) if math.isfinite(lp) else -math.inf
        take = logu < gp - g
        y = np.where(take[:, None], prop, y)
        g = np.where(take, gp, g)
        accepts += take
        if gen >= burn_in:
            kept[gen - burn_in] = np.exp(y)
    log_kept = np.log(kept)
    rhat = {name: _split_rhat(log_kept[:, :, k])
            for k, name in enumerate(names)}
    warnings = tuple(
        f"split-Rhat for {name} is {value:.3f} (> 1.05): chains have not "
        f"mixed" for name, value in rhat.items()
        if not value <= 1.05)
    return PosteriorDraws(draws=kept.reshape(-1, d), chains=chains,
                          acceptance=accepts / iterations, split_rhat=rhat,
                          warnings=warnings, param_names=names)


@dataclass(frozen=True)
class BayesResult:
    """Posterior draws plus the 5/25/50/75/95 percentile table."""

    posterior: PosteriorDraws
    percentiles: dict[str, dict[int, float]]
    anchors: ScaleAnchors

    @property
    def warnings(self) -> tuple[str, ...]:
        return self.posterior.warnings


PERCENTILE_GRID = (5, 25, 50, 75, 95)


def bayes_fit(doubling_time: float, period: tuple[float, float],
              path: InputPath, *, chains: int = 12, iterations: int = 20000,
              burn_in: int | None = None, seed: int = 0,
              fixed_lam: float | None = None) -> BayesResult:
    """Posterior over (lam, beta, r) from one observed doubling time.

    The output level is normalized to 1 at the period start and grows by
    2^(span/doubling_time) over the period; the input path is normalized
    to 1 at the period start.  ``fixed_lam`` pins the elasticity inside
    the likelihood only (the prior and the physical conversion keep the
    drawn value), which severs the likelihood's dependence on the input
    path's shape.
    """
    t_start, t_end = float(period[0]), float(period[1])
    if not t_start < t_end:
        raise DomainError(f"period must satisfy start < end, got {period!r}")
    if not doubling_time > 0.0:
        raise DomainError(f"doubling_time must be positive, "
                          f"got {doubling_time!r}")
    i_start = path.value(t_start)
    i_end = path.value(t_end)
    g_input = math.log(i_end / i_start) / (t_end - t_start)
    if g_input <= 0.0:
        raise DomainError(
            "the input must grow over the period: the time-scale anchor "
            "beta/(lam g_input) needs g_input > 0")
    anchors = ScaleAnchors(1.0, 1.0, g_input)
    norm = InputPath(TimeSeries(path.series.times,
                                path.series.values / i_start),
                     path.interpolation, path.subdivisions)
    a_end = 2.0 ** ((t_end - t_start) / doubling_time)
    prior = build_prior(anchors)

    def log_posterior(u: np.ndarray) -> float:
        lp = prior.log_density(u)
        if not math.isfinite(lp):
            return -math.inf
        lam, beta, sigma_s, theta_s_excess = (float(v) for v in u)
        draw = PriorDraw(lam, beta, sigma_s, theta_s_excess)
        theta, sigma = draw.physical(anchors)
        use_lam = lam if fixed_lam is None else fixed_lam
        try:
            tau = norm.integral_power(use_lam, t_start, t_end)
            ll = feller_transition_logpdf(1.0, a_end, theta, sigma, beta,
                                          tau)
        except (ConstraintError, DomainError, OverflowError, ValueError,
                ZeroDivisionError):
            # Prior-tail draws overflow the window integral or the density
            # constants, or land on the admissibility boundary by float
            # absorption; those regions carry effectively zero density.
            return -math.inf
        if not math.isfinite(ll):
            return -math.inf
        return lp + ll

    with np.errstate(over="ignore", invalid="ignore"):
        post = de_metropolis_sample(log_posterior, prior, chains=chains,
                                    iterations=iterations, burn_in=burn_in,
                                    seed=seed)
    lam = post.draws[:, 0]
    beta = post.draws[:, 1]
    series = {"lam": lam, "beta": beta, "r": lam / beta}
    table = {name: {p: float(np.percentile(vals, p))
                    for p in PERCENTILE_GRID}
             for name, vals in series.items()}
    return BayesResult(posterior=post, percentiles=table, anchors=anchors)
