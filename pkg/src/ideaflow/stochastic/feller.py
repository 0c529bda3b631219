"""Square-root diffusion for the knowledge level, exact in the power coordinate.

The level S follows dS = theta*S^(1-beta) dt + sigma*S^(1-beta/2) dW.  Its
power transform X = S^beta is then a constant-drift square-root process
dX = a dt + b*sqrt(X) dW with a = beta*(theta + (beta-1)*sigma^2/2) and
b = beta*sigma, whose transition law over any horizon is known exactly: a
Bessel-type density on (0, inf) plus, when a < b^2/2, an atom at zero for
paths absorbed at the boundary.  Everything here evaluates or samples that
law; no time stepping is involved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ..errors import ConstraintError, DomainError

__all__ = [
    "DriftDiffusionParams",
    "feller_admissible",
    "feller_absorbed_mass",
    "feller_transition_logpdf",
    "feller_transition_sample",
]


@dataclass(frozen=True)
class DriftDiffusionParams:
    """Drift rate and diffusion scale of a unit-time Gaussian increment."""

    mu: float
    sigma: float

    def __post_init__(self) -> None:
        for name in ("mu", "sigma"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise DomainError(f"{name} must be a finite number, got {value!r}")
        if self.sigma < 0.0:
            raise DomainError(f"sigma must be >= 0, got {self.sigma!r}")


def feller_admissible(theta: float, sigma: float, beta: float) -> bool:
    """True when the level drift keeps X = S^beta away from negative drift.

    The transition law exists (with at most an atom at zero) whenever the
    X-drift a = beta*(theta + (beta-1)*sigma^2/2) is positive, i.e.
    theta > sigma^2*(1-beta)/2, and beta > 0 so the transform is monotone.
    """
    return beta > 0.0 and theta > 0.5 * sigma * sigma * (1.0 - beta)


def _check_transition_args(s1: float, theta: float, sigma: float, beta: float,
                           tau: float) -> None:
    for name, value in (("s1", s1), ("theta", theta), ("sigma", sigma),
                        ("beta", beta), ("tau", tau)):
        if not math.isfinite(value):
            raise DomainError(f"{name} must be finite, got {value!r}")
    if s1 <= 0.0:
        raise DomainError(f"s1 must be > 0, got {s1!r}")
    if tau <= 0.0:
        raise DomainError(f"tau must be > 0, got {tau!r}")
    if sigma < 0.0:
        raise DomainError(f"sigma must be >= 0, got {sigma!r}")
    if not feller_admissible(theta, sigma, beta):
        raise ConstraintError(
            "inadmissible square-root diffusion: requires beta > 0 and "
            f"theta > sigma^2*(1-beta)/2, got theta={theta!r}, "
            f"sigma={sigma!r}, beta={beta!r}")


def _cir_constants(theta: float, sigma: float, beta: float,
                   tau: float) -> tuple[float, float]:
    """Return (c0, q) for the X-transition over horizon tau.

    c0 = 2/(b^2 tau) sets the scale, q = 2a/b^2 - 1 the Bessel order; the
    boundary at zero is reached with positive probability iff q < 0.
    """
    a = beta * (theta + 0.5 * (beta - 1.0) * sigma * sigma)
    b2 = (beta * sigma) ** 2
    return 2.0 / (b2 * tau), 2.0 * a / b2 - 1.0


def _log_bessel_i(nu: float, z: float) -> float:
    """log I_nu(z) for nu >= 0, z >= 0, stable across extreme orders.

    The scaled routine covers the easy range; outside it the value is
    rebuilt from the small-argument series or Olver's uniform large-order
    expansion, whichever regime applies (the scaled routine only fails for
    large nu, where the expansion is already past machine precision).
    """
    if z == 0.0:
        return 0.0 if nu == 0.0 else -math.inf
    scaled = float(special.ive(nu, z))
    if scaled > 0.0 and math.isfinite(scaled):
        return math.log(scaled) + z
    if z * z <= 0.01 * (nu + 1.0):
        head = nu * math.log(0.5 * z) - math.lgamma(nu + 1.0)
        r = 0.25 * z * z
        tail = r / (nu + 1.0) * (1.0 + r / (2.0 * (nu + 2.0)))
        return head + math.log1p(tail)
    zr = z / nu
    root = math.sqrt(1.0 + zr * zr)
    eta = root + math.log(zr / (1.0 + root))
    t = 1.0 / root
    t2 = t * t
    u1 = (3.0 * t - 5.0 * t * t2) / 24.0
    u2 = (81.0 - 462.0 * t2 + 385.0 * t2 * t2) * t2 / 1152.0
    u3 = (30375.0 - 369603.0 * t2 + 765765.0 * t2 * t2
          - 425425.0 * t2 * t2 * t2) * t * t2 / 414720.0
    correction = 1.0 + u1 / nu + u2 / (nu * nu) + u3 / nu ** 3
    return (nu * eta - 0.5 * math.log(2.0 * math.pi * nu)
            - 0.25 * math.log(1.0 + zr * zr) + math.log(correction))


def feller_transition_logpdf(s1: float, s2: float, theta: float, sigma: float,
                             beta: float, tau: float) -> float:
    """Log density at s2 > 0 of the level after time tau, started at s1.

    The density refers to the part of the law that survives the zero
    boundary; the complementary atom is `feller_absorbed_mass`.  sigma = 0
    has no density at all (the transition is a point mass on the
    deterministic flow), so it is rejected rather than approximated.
    """
    _check_transition_args(s1, theta, sigma, beta, tau)
    if sigma == 0.0:
        raise DomainError(
            "sigma = 0 gives a degenerate deterministic transition with no "
            "density; evaluate the flow itself, or sample it with "
            "feller_transition_sample")
    if not math.isfinite(s2) or s2 < 0.0:
        raise DomainError(f"s2 must be finite and >= 0, got {s2!r}")
    if s2 == 0.0:
        raise DomainError(
            "s2 = 0 is the absorbed endpoint and carries an atom, not a "
            "density; its mass is feller_absorbed_mass")
    c0, q = _cir_constants(theta, sigma, beta, tau)
    x1, x2 = s1 ** beta, s2 ** beta
    z = 2.0 * c0 * math.sqrt(x1 * x2)
    log_fx = (math.log(c0) + 0.5 * q * (math.log(x2) - math.log(x1))
              - c0 * (x1 + x2) + _log_bessel_i(abs(q), z))
    # Jacobian of x2 = s2^beta turns the X-density into the level density.
    return log_fx + math.log(beta) + (beta - 1.0) * math.log(s2)


def feller_absorbed_mass(s1: float, theta: float, sigma: float, beta: float,
                         tau: float) -> float:
    """Probability that the level hits zero by time tau, started at s1 > 0."""
    _check_transition_args(s1, theta, sigma, beta, tau)
    if sigma == 0.0:
        return 0.0
    c0, q = _cir_constants(theta, sigma, beta, tau)
    if q >= 0.0:
        return 0.0
    return float(special.gammaincc(-q, c0 * s1 ** beta))


def _sample_survivor_counts(c0x1: np.ndarray, q: float, v: np.ndarray) -> np.ndarray:
    """Invert the mixture index K of the surviving transition by CDF walk.

    Conditional on survival, X2 is Gamma(K+1, rate c0) with
    P(K = k) proportional to (c0 x1)^(k-q) e^(-c0 x1) / Gamma(k-q+1).  The
    walk runs in log space so huge c0*x1 (weights peaking far from k = 0)
    cannot underflow.
    """
    target = np.log(v) + np.log(special.gammainc(-q, c0x1))
    log_c = np.log(c0x1)
    log_w = -q * log_c - c0x1 - math.lgamma(1.0 - q)
    cum = log_w.copy()
    k = np.zeros(c0x1.shape, dtype=np.int64)
    active = cum < target
    limit = int(np.max(c0x1) + 12.0 * math.sqrt(np.max(c0x1)) + 60.0)
    for step in range(limit):
        if not active.any():
            break
        log_w = np.where(active, log_w + log_c - np.log(step + 1.0 - q), log_w)
        cum = np.where(active, np.logaddexp(cum, log_w), cum)
        k = np.where(active, k + 1, k)
        active = cum < target
    if active.any():
        raise RuntimeError("survivor index walk failed to terminate")
    return k


def feller_transition_sample(s1, theta: float, sigma: float, beta: float,
                             tau: float, rng: np.random.Generator, size=None):
    """Exact draw of the level after time tau; absorbed paths return 0.0.

    `s1` may be an array of starting levels (then `size` must be omitted and
    the output matches its shape), or a scalar with `size` giving the number
    of independent draws.
    """
    start = np.asarray(s1, dtype=float)
    scalar = start.ndim == 0 and size is None
    if start.ndim > 0 and size is not None:
        raise DomainError("size is only meaningful for a scalar s1")
    if start.size == 0:
        return np.empty(start.shape)
    if not np.all(np.isfinite(start)):
        raise DomainError("s1 must be finite")
    _check_transition_args(float(start.min()), theta, sigma, beta, tau)
    if size is None:
        x1 = np.atleast_1d(start ** beta)
        out_shape = start.shape
    else:
        x1 = np.broadcast_to(start ** beta, size).astype(float)
        out_shape = x1.shape
    if sigma == 0.0:
        a = beta * (theta + 0.5 * (beta - 1.0) * sigma * sigma)
        x2 = x1 + a * tau
    else:
        c0, q = _cir_constants(theta, sigma, beta, tau)
        if q >= 0.0:
            y = rng.noncentral_chisquare(2.0 * (q + 1.0), 2.0 * c0 * x1,
                                         size=x1.shape)
            x2 = y / (2.0 * c0)
        else:
            absorbed = special.gammaincc(-q, c0 * x1)
            u = rng.uniform(size=x1.shape)
            survived = u >= absorbed
            x2 = np.zeros_like(x1)
            if survived.any():
                v = (u[survived] - absorbed[survived]) / (1.0 - absorbed[survived])
                k = _sample_survivor_counts(c0 * x1[survived], q,
                                            np.clip(v, 1e-300, 1.0 - 1e-12))
                x2[survived] = rng.gamma(k + 1.0) / c0
    out = np.where(x2 > 0.0, x2 ** (1.0 / beta), 0.0)
    if scalar:
        return float(out[0])
    return out.reshape(out_shape)
