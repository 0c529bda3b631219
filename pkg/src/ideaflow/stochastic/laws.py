"""Noise structures on the production law and their window transition laws.

Three structures place stable Levy noise on the latent power coordinate
H = A^beta / beta: shocks entering independently over time
("independent-levy"), shocks amplified in lockstep with research input
("synchronized"), and shocks proportional to the current stock's power
("scale-invariant", treated with the stock frozen at the window start).
The fourth ("feller") is the square-root diffusion with an exact
transition density of its own.  Either way the window transition depends
on the input path only through integrals of I^p, so every law here is
built from the cached window quadrature rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConstraintError, DomainError
from ..law import JonesParams, q_beta
from ..series import InputPath, TimeSeries
from .feller import (DriftDiffusionParams, feller_admissible,
                     feller_transition_logpdf, feller_transition_sample)
from .stable import StableParams, stable_cdf, stable_logpdf, stable_sample

__all__ = [
    "STRUCTURES",
    "NoiseModel",
    "StableIncrementLaw",
    "increment_law",
    "latent_clip",
    "simulate_path",
    "transition_logpdf",
]

STRUCTURES = ("independent-levy", "synchronized", "scale-invariant", "feller")
# Below this the alpha = 1 limit replaces the generic location formula.
_ALPHA_ONE = 1e-8


@dataclass(frozen=True)
class NoiseModel:
    """A noise structure, the production parameters, and the noise law.

    ``levy`` holds the per-unit-subordinated-time noise parameters: a
    StableParams for the stable structures (a DriftDiffusionParams is
    accepted and converted to its Gaussian stable equivalent), and a
    DriftDiffusionParams for the Feller structure.  Its drift must equal
    ``jones.theta``: both name the same physical rate, and letting them
    disagree would make the deterministic limit ambiguous.
    """

    structure: str
    jones: JonesParams
    levy: StableParams | DriftDiffusionParams

    def __post_init__(self) -> None:
        if self.structure not in STRUCTURES:
            raise DomainError(
                f"unknown structure {self.structure!r}; choose one of "
                f"{', '.join(STRUCTURES)}")
        if self.structure == "feller":
            if not isinstance(self.levy, DriftDiffusionParams):
                raise DomainError(
                    "the feller structure needs DriftDiffusionParams noise")
            if not feller_admissible(self.levy.mu, self.levy.sigma,
                                     self.jones.beta):
                raise ConstraintError(
                    "inadmissible feller parameters: requires beta > 0 and "
                    "theta > sigma^2*(1-beta)/2, got "
                    f"theta={self.levy.mu!r}, sigma={self.levy.sigma!r}, "
                    f"beta={self.jones.beta!r}")
            drift = self.levy.mu
        else:
            if isinstance(self.levy, DriftDiffusionParams):
                # alpha = 2 stable with variance sigma^2 per unit time
                object.__setattr__(
                    self, "levy",
                    StableParams(2.0, 0.0, self.levy.mu,
                                 self.levy.sigma / math.sqrt(2.0)))
            drift = self.levy.rate
        if not math.isclose(self.jones.theta, drift, rel_tol=1e-9):
            raise DomainError(
                f"noise drift {drift!r} must equal jones.theta "
                f"{self.jones.theta!r}; both are the production rate per "
                "unit subordinated time")


@dataclass(frozen=True)
class StableIncrementLaw:
    """Stable law of the latent increment (A2^beta - A1^beta)/beta."""

    alpha: float
    skew: float
    location: float
    scale: float

    @property
    def params(self) -> StableParams:
        return StableParams(self.alpha, self.skew, self.location, self.scale)

    def logpdf(self, h: float) -> float:
        return stable_logpdf(h, self.params)

    def cdf(self, h: float) -> float:
        return stable_cdf(h, self.params)

    def sample(self, rng: np.random.Generator, size=None):
        return stable_sample(self.params, rng, size)


def increment_law(model: NoiseModel, a1: float, path: InputPath, t1: float,
                  t2: float) -> StableIncrementLaw:
    """Window law of the latent increment for the stable structures.

    The location is the exact 0-parametrization aggregate of the continuous
    noise over the window, so laws compose exactly under convolution across
    adjacent windows.  For "scale-invariant" the stock is frozen at its
    window-start level ``a1``, good when the stock moves little within one
    window.
    """
    if model.structure == "feller":
        raise DomainError(
            "the feller structure has no stable increment law; use "
            "feller_transition_logpdf / feller_transition_sample")
    if not (math.isfinite(a1) and a1 > 0.0):
        raise DomainError(f"a1 must be a positive finite level, got {a1!r}")
    if not t1 < t2:
        raise DomainError(f"window needs t1 < t2, got [{t1!r}, {t2!r}]")
    alpha, skew = model.levy.alpha, model.levy.skew
    mu, c = model.levy.rate, model.levy.scale
    lam, beta = model.jones.lam, model.jones.beta

    log_tau = path.log_integral_power(lam, t1, t2)
    tau = math.exp(log_tau)
    if model.structure == "independent-levy":
        log_g = log_tau / alpha
    elif model.structure == "synchronized":
        log_g = path.log_integral_power(alpha * lam, t1, t2) / alpha
    else:
        log_g = beta * (1.0 - 1.0 / alpha) * math.log(a1) + log_tau / alpha
    scale = c * math.exp(log_g)

    if skew == 0.0:
        location = mu * tau
    elif abs(alpha - 1.0) < _ALPHA_ONE:
        # limit of the generic formula as alpha -> 1, per structure
        if model.structure == "synchronized":
            _, weights, logs = path.window_rule(t1, t2)
            int_log = float(weights @ (np.exp(lam * logs) * logs))
            extra = tau * log_tau - lam * int_log
        elif model.structure == "scale-invariant":
            extra = tau * (log_tau - beta * math.log(a1))
        else:
            extra = tau * log_tau
        location = mu * tau + (2.0 / math.pi) * skew * c * extra
    else:
        # aggregate location keeping the 0-parametrization continuous in
        # alpha; the tan factor is the S0/S1 offset per unit scale
        d = log_g - log_tau
        location = mu * tau - (skew * c * tau * math.expm1(d)
                               / math.tan(0.5 * math.pi * (alpha - 1.0)))
    return StableIncrementLaw(alpha, skew, location, scale)


def latent_clip(h: float, beta: float) -> float:
    """Level recovered from the latent power coordinate: max(h, 0)^(1/beta)."""
    if not beta > 0.0:
        raise DomainError(f"latent clipping needs beta > 0, got {beta!r}")
    if h <= 0.0:
        return 0.0
    return float(h) ** (1.0 / beta)


def transition_logpdf(model: NoiseModel, a1: float, a2: float,
                      path: InputPath, t1: float, t2: float) -> float:
    """Log transition density of the level, any structure.

    For the stable structures this is the increment law pushed through the
    power transform; zero endpoints carry an atom (clipped latent mass or
    Feller absorption), not a density, and are rejected with a pointer to
    the mass that accounts for them.
    """
    lam = model.jones.lam
    if model.structure == "feller":
        tau = path.integral_power(lam, t1, t2)
        return feller_transition_logpdf(a1, a2, model.levy.mu,
                                        model.levy.sigma, model.jones.beta,
                                        tau)
    if not (math.isfinite(a2) and a2 >= 0.0):
        raise DomainError(f"a2 must be finite and >= 0, got {a2!r}")
    law = increment_law(model, a1, path, t1, t2)
    beta = model.jones.beta
    if a2 == 0.0:
        raise DomainError(
            "a2 = 0 carries the clipped-latent atom, not a density; its "
            "mass is the increment law's CDF at -a1^beta/beta")
    # The law is over (a2^beta - a1^beta)/beta = a1^beta * q_beta; the
    # q_beta form keeps the difference accurate for a2 near a1.
    increment = a1 ** beta * q_beta(a1, a2, beta)
    return law.logpdf(increment) + (beta - 1.0) * math.log(a2)


def simulate_path(model: NoiseModel, a0: float, path: InputPath, grid,
                  rng: np.random.Generator) -> TimeSeries:
    """Sample the level along ``grid`` by sequential window transitions.

    Deterministic for a fixed generator state.  A trajectory whose level
    reaches zero (Feller absorption, or the latent coordinate clipping)
    cannot be represented as a positive series and raises SingularityError
    carrying the window end where it died.
    """
    from ..errors import SingularityError

    times = np.asarray(grid, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise DomainError("grid must be one-dimensional with >= 2 times")
    if not np.all(np.isfinite(times)) or not np.all(np.diff(times) > 0):
        raise DomainError("grid times must be finite and strictly increasing")
    if not (math.isfinite(a0) and a0 > 0.0):
        raise DomainError(f"a0 must be a positive finite level, got {a0!r}")
    beta, lam = model.jones.beta, model.jones.lam
    levels = np.empty(times.size)
    levels[0] = a0
    if model.structure == "feller":
        s = a0
        for k in range(times.size - 1):
            tau = path.integral_power(lam, float(times[k]), float(times[k + 1]))
            s = feller_transition_sample(s, model.levy.mu, model.levy.sigma,
                                         beta, tau, rng)
            if s == 0.0:
                raise SingularityError(
                    f"trajectory absorbed at zero by t = {times[k + 1]}",
                    critical_time=float(times[k + 1]))
            levels[k + 1] = s
        return TimeSeries(times, levels)
    if beta < 0.0:
        raise DomainError("latent clipping needs beta >= 0; negative beta "
                          "trajectories are deterministic-only")
    x = math.log(a0) if beta == 0.0 else a0 ** beta
    for k in range(times.size - 1):
        law = increment_law(model, float(levels[k]), path, float(times[k]),
                            float(times[k + 1]))
        h = law.sample(rng)
        if beta == 0.0:
            x += h
            levels[k + 1] = math.exp(x)
            continue
        x += beta * h
        level = latent_clip(x, beta)
        if level == 0.0:
            raise SingularityError(
                f"latent coordinate clipped to zero by t = {times[k + 1]}",
                critical_time=float(times[k + 1]))
        levels[k + 1] = level
    return TimeSeries(times, levels)
