"""Deterministic law of motion for the idea stock.

The growth law (1/A) dA/dt = theta * A^(-beta) * I(t)^lam has the closed-form
solution A(t2) = (A(t1)^beta + beta*theta*J)^(1/beta) with J the integral of
I^lam over the window; propagation, the finite-increment statistic Q_beta,
trajectory simulation and an independent fixed-step RK4 oracle live here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, SingularityError
from .series import InputPath, TimeSeries

# Below this |beta * log-increment| the closed form switches to its
# removable-singularity limit.
_BETA_LIMIT = 1e-6


@dataclass(frozen=True)
class JonesParams:
    """Parameters (theta, beta, lam) of the law of motion.

    theta > 0 is the productivity constant (units A^beta * I^(-lam) / year),
    beta the diminishing-returns exponent, lam >= 0 the input returns-to-scale
    exponent. The returns ratio r = lam/beta needs beta != 0.
    """

    theta: float
    beta: float
    lam: float

    def __post_init__(self):
        if not self.theta > 0:
            raise DomainError(f"theta must be positive, got {self.theta}")
        if self.lam < 0:
            raise DomainError(f"lam must be nonnegative, got {self.lam}")

    @property
    def r(self) -> float:
        """Returns to research effort, lam/beta."""
        if self.beta == 0:
            raise DomainError("returns ratio undefined for beta = 0")
        return self.lam / self.beta


def _propagate_effective(params: JonesParams, a1: float, effective: float,
                         ) -> float:
    """Closed-form step given the subordinated time integral ``effective``."""
    beta, theta = params.beta, params.theta
    log_a1 = np.log(a1)
    if beta == 0.0:
        return float(a1 * np.exp(theta * effective))
    u = beta * theta * effective * np.exp(-beta * log_a1)
    if u <= -1.0:
        raise SingularityError("blow-down: propagation base went nonpositive")
    g = np.log1p(u)
    if abs(g) < _BETA_LIMIT:
        # Removable singularity: A2 -> a1 * exp(theta * J * a1^(-beta)).
        return float(a1 * np.exp(theta * effective * np.exp(-beta * log_a1)))
    return float(np.exp(log_a1 + g / beta))


def propagate(params: JonesParams, a1: float, path: InputPath,
              t1: float, t2: float) -> float:
    """Exact propagation of the level from t1 to t2 along the input path."""
    if a1 <= 0:
        raise DomainError(f"starting level must be positive, got {a1}")
    if not t1 < t2:
        raise DomainError(f"propagate needs t1 < t2, got {t1} >= {t2}")
    effective = path.integral_power(params.lam, t1, t2)
    try:
        return _propagate_effective(params, a1, effective)
    except SingularityError:
        critical = _critical_time(params, a1, path, t1, t2)
        raise SingularityError(
            f"blow-down on [{t1:g}, {t2:g}]: level reaches zero at "
            f"t = {critical:.6g}", critical_time=critical) from None


def _critical_time(params: JonesParams, a1: float, path: InputPath,
                   t1: float, t2: float) -> float:
    """Time at which the blow-down base hits zero (beta < 0 only)."""
    beta, theta = params.beta, params.theta
    target = -np.exp(beta * np.log(a1)) / (beta * theta)

    def shortfall(t: float) -> float:
        if t <= t1:
            return -target
        return path.integral_power(params.lam, t1, t) - target

    return float(brentq(shortfall, t1, t2, xtol=1e-10))


def q_beta(a1: float, a2: float, beta: float) -> float:
    """Finite-increment statistic ((a2/a1)^beta - 1)/beta with its beta->0 limit."""
    if a1 <= 0 or a2 <= 0:
        raise DomainError("q_beta needs positive levels")
    g = np.log(a2 / a1)
    if abs(beta * g) < 1e-8:
        return float(g)
    return float(np.expm1(beta * g) / beta)


def simulate_deterministic(params: JonesParams, a0: float, path: InputPath,
                           grid) -> TimeSeries:
    """Trajectory on a strictly increasing grid by repeated propagation."""
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2 or not np.all(np.diff(grid) > 0):
        raise DomainError("grid must be strictly increasing with >= 2 points")
    levels = np.empty(grid.size)
    levels[0] = a0
    for k in range(grid.size - 1):
        levels[k + 1] = propagate(params, levels[k], path, grid[k], grid[k + 1])
    return TimeSeries(grid, levels)


def ode_oracle(params: JonesParams, a0: float, path: InputPath,
               t1: float, t2: float, step: float = 1e-3) -> float:
    """Independent fixed-step RK4 integration of dA/dt = theta*A^(1-beta)*I^lam.

    Test oracle only; ``propagate`` is the production route.
    """
    if not t1 < t2:
        raise DomainError("ode_oracle needs t1 < t2")
    n = max(1, int(np.ceil((t2 - t1) / step)))
    h = (t2 - t1) / n
    # Input-path factor precomputed at step and half-step points.
    ts = t1 + 0.5 * h * np.arange(2 * n + 1)
    forcing = np.exp(params.lam * np.log(path.values(ts)))
    theta, beta = params.theta, params.beta
    expo = 1.0 - beta
    a = float(a0)
    for k in range(n):
        f0, fm, f1 = forcing[2 * k], forcing[2 * k + 1], forcing[2 * k + 2]
        k1 = theta * a ** expo * f0
        k2 = theta * (a + 0.5 * h * k1) ** expo * fm
        k3 = theta * (a + 0.5 * h * k2) ** expo * fm
        k4 = theta * (a + h * k3) ** expo * f1
        a += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
    return a
