"""Exact square-root-diffusion transitions against independent oracles.

The closed-form law is cross-checked three ways: Euler--Maruyama time
stepping of the level SDE (no power coordinate involved), calculus
identities (normalization, exact mean, Chapman--Kolmogorov composition),
and its own exact sampler, which reaches the law through a different
code path (noncentral chi-square / gamma mixtures instead of Bessel
evaluation).
"""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from conftest import feller_chi2_pvalue, feller_em_sample
from ideaflow.errors import ConstraintError, DomainError
from ideaflow.stochastic import (DriftDiffusionParams, feller_absorbed_mass,
                                 feller_admissible, feller_transition_logpdf,
                                 feller_transition_sample)
from ideaflow.stochastic.feller import _log_bessel_i

# Diverse admissible sets (s1, theta, sigma, beta, tau); the first five keep
# paths away from the zero boundary, where the Euler oracle is unbiased at
# the step sizes used. The last one absorbs ~14% of paths.
SMOOTH_SETS = [
    (1.0, 0.05, 0.2, 0.5, 1.0),
    (1.0, 0.02, 0.1, 1.0, 1.0),
    (2.0, 0.2, 0.6, 0.3, 0.5),
    (1.0, 0.05, 0.4, 0.5, 1.0),
    (0.5, 0.15, 0.35, 0.8, 2.0),
]
ABSORBING_SET = (0.1, 0.1, 0.6, 0.5, 4.0)


def drift_in_x(theta: float, sigma: float, beta: float) -> float:
    return beta * (theta + 0.5 * (beta - 1.0) * sigma * sigma)


def mass_quadrature(s1, theta, sigma, beta, tau, weight=lambda x: 1.0):
    """Integrate weight(x2) * density over x2 = s2^beta; no singularities."""

    def f_x(x: float) -> float:
        s2 = x ** (1.0 / beta)
        return (weight(x) * math.exp(
            feller_transition_logpdf(s1, s2, theta, sigma, beta, tau))
            / (beta * s2 ** (beta - 1.0)))

    x_mode = s1 ** beta + drift_in_x(theta, sigma, beta) * tau
    hi = max(60.0, 12.0 * x_mode)
    return integrate.quad(f_x, 0.0, hi, limit=400,
                          epsabs=1e-13, epsrel=1e-11)[0]


class TestParams:
    def test_rejects_bad_values(self):
        with pytest.raises(DomainError):
            DriftDiffusionParams(mu=0.1, sigma=-0.2)
        with pytest.raises(DomainError):
            DriftDiffusionParams(mu=math.nan, sigma=0.2)
        with pytest.raises(DomainError):
            DriftDiffusionParams(mu=math.inf, sigma=0.2)

    def test_zero_sigma_allowed(self):
        assert DriftDiffusionParams(mu=0.1, sigma=0.0).sigma == 0.0


class TestAdmissible:
    def test_threshold_is_strict(self):
        # boundary: theta == sigma^2 (1 - beta) / 2 exactly
        assert not feller_admissible(0.0025, 0.1, 0.5)
        assert feller_admissible(0.0026, 0.1, 0.5)

    def test_beta_must_be_positive(self):
        assert not feller_admissible(1.0, 0.1, 0.0)
        assert not feller_admissible(1.0, 0.1, -0.5)

    def test_beta_above_one_relaxes_drift(self):
        # (1 - beta) < 0 admits slightly negative drift rates
        assert feller_admissible(-0.001, 0.2, 1.5)
        assert not feller_admissible(-0.02, 0.2, 1.5)

    def test_zero_noise_needs_positive_drift(self):
        assert feller_admissible(1e-9, 0.0, 0.5)
        assert not feller_admissible(0.0, 0.0, 0.5)


class TestLogBessel:
    @pytest.mark.parametrize("nu", [30.0, 100.0, 300.0, 1000.0])
    @pytest.mark.parametrize("zr", [0.1, 1.0, 30.0])
    def test_matches_scaled_routine(self, nu, zr):
        z = nu * zr
        scaled = special.ive(nu, z)
        if scaled <= 0.0:
            pytest.skip("scaled routine underflows at this order")
        expected = math.log(scaled) + z
        assert _log_bessel_i(nu, z) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("nu,z,tol", [
        (1e5, 1.2e5, 1e-8),   # scaled routine underflows; uniform expansion
        (8e6, 1.0e9, 2e-4),   # tol limited by float cancellation in the logs
        (150.0, 0.05, 1e-8),  # scaled routine underflows; power series
    ])
    def test_recurrence_in_fallback_regimes(self, nu, z, tol):
        # I_(nu-1)(z) - I_(nu+1)(z) = (2 nu / z) I_nu(z), checked via ratios
        mid = _log_bessel_i(nu, z)
        lo = _log_bessel_i(nu - 1.0, z)
        hi = _log_bessel_i(nu + 1.0, z)
        lhs = math.exp(lo - mid) - math.exp(hi - mid)
        assert lhs == pytest.approx(2.0 * nu / z, rel=tol)

    def test_zero_argument(self):
        assert _log_bessel_i(0.0, 0.0) == 0.0
        assert _log_bessel_i(2.5, 0.0) == -math.inf


class TestTransitionDensity:
    @pytest.mark.parametrize("params", SMOOTH_SETS + [ABSORBING_SET])
    def test_total_mass_is_one(self, params):
        s1, theta, sigma, beta, tau = params
        total = (mass_quadrature(s1, theta, sigma, beta, tau)
                 + feller_absorbed_mass(s1, theta, sigma, beta, tau))
        assert total == pytest.approx(1.0, abs=1e-4)

    @pytest.mark.parametrize("params", SMOOTH_SETS[:3])
    def test_mean_of_power_coordinate_is_exact(self, params):
        # constant drift in X = S^beta makes E[X2] = x1 + a tau exact
        # whenever no mass is absorbed
        s1, theta, sigma, beta, tau = params
        assert feller_absorbed_mass(s1, theta, sigma, beta, tau) < 1e-12
        mean = mass_quadrature(s1, theta, sigma, beta, tau,
                               weight=lambda x: x)
        expected = s1 ** beta + drift_in_x(theta, sigma, beta) * tau
        assert mean == pytest.approx(expected, rel=1e-8)

    @pytest.mark.parametrize("params,s2", [
        ((1.0, 0.05, 0.4, 0.5, 1.0), 0.8),
        ((1.0, 0.05, 0.4, 0.5, 1.0), 1.6),
        ((1.0, 0.05, 0.2, 0.5, 1.0), 1.05),
    ])
    def test_composes_over_subintervals(self, params, s2):
        # Chapman-Kolmogorov: two half-horizon transitions compose to one
        s1, theta, sigma, beta, tau = params
        direct = math.exp(
            feller_transition_logpdf(s1, s2, theta, sigma, beta, tau))

        def integrand(x: float) -> float:
            sm = x ** (1.0 / beta)
            return (math.exp(
                feller_transition_logpdf(s1, sm, theta, sigma, beta, 0.5 * tau)
                + feller_transition_logpdf(sm, s2, theta, sigma, beta,
                                           0.5 * tau))
                / (beta * sm ** (beta - 1.0)))

        composed = integrate.quad(integrand, 0.0, 60.0, limit=400,
                                  epsabs=1e-13, epsrel=1e-11)[0]
        assert composed == pytest.approx(direct, rel=1e-9)

    def test_near_zero_noise_concentrates_on_flow(self):
        s1, theta, sigma, beta, tau = 1.0, 0.02, 1e-4, 0.5, 1.0
        x_end = s1 ** beta + drift_in_x(theta, sigma, beta) * tau
        flow_end = x_end ** (1.0 / beta)
        sd_x = sigma * beta * math.sqrt(s1 ** beta * tau)
        sd_s = sd_x * (1.0 / beta) * x_end ** (1.0 / beta - 1.0)
        grid = np.linspace(flow_end - 4.0 * sd_s, flow_end + 4.0 * sd_s, 4001)
        logs = [feller_transition_logpdf(s1, s, theta, sigma, beta, tau)
                for s in grid]
        mode = grid[int(np.argmax(logs))]
        assert mode == pytest.approx(flow_end, abs=2.0 * (grid[1] - grid[0]))
        spike = integrate.quad(
            lambda s: math.exp(
                feller_transition_logpdf(s1, s, theta, sigma, beta, tau)),
            flow_end - 10.0 * sd_s, flow_end + 10.0 * sd_s, limit=200)[0]
        assert spike == pytest.approx(1.0, abs=1e-6)

    def test_zero_sigma_has_no_density(self):
        with pytest.raises(DomainError, match="deterministic"):
            feller_transition_logpdf(1.0, 1.1, 0.02, 0.0, 0.5, 1.0)

    def test_zero_endpoint_directs_to_atom(self):
        with pytest.raises(DomainError, match="feller_absorbed_mass"):
            feller_transition_logpdf(1.0, 0.0, 0.1, 0.6, 0.5, 4.0)

    def test_inadmissible_parameters_rejected(self):
        with pytest.raises(ConstraintError):
            feller_transition_logpdf(1.0, 1.0, 0.001, 0.5, 0.5, 1.0)
        with pytest.raises(ConstraintError):
            feller_transition_logpdf(1.0, 1.0, 0.1, 0.5, -0.5, 1.0)

    def test_bad_arguments_rejected(self):
        with pytest.raises(DomainError):
            feller_transition_logpdf(0.0, 1.0, 0.1, 0.1, 0.5, 1.0)
        with pytest.raises(DomainError):
            feller_transition_logpdf(1.0, 1.0, 0.1, 0.1, 0.5, 0.0)
        with pytest.raises(DomainError):
            feller_transition_logpdf(1.0, math.nan, 0.1, 0.1, 0.5, 1.0)

    @settings(max_examples=60, deadline=None)
    @given(theta=st.floats(0.01, 0.3), sigma=st.floats(0.05, 0.7),
           beta=st.floats(0.2, 1.2), tau=st.floats(0.2, 4.0),
           s1=st.floats(0.1, 3.0), s2=st.floats(0.05, 5.0))
    def test_density_finite_and_mass_bounded(self, theta, sigma, beta, tau,
                                             s1, s2):
        if not feller_admissible(theta, sigma, beta):
            theta = 0.5 * sigma * sigma * (1.0 - beta) + 0.05
        logpdf = feller_transition_logpdf(s1, s2, theta, sigma, beta, tau)
        assert math.isfinite(logpdf)
        mass = feller_absorbed_mass(s1, theta, sigma, beta, tau)
        assert 0.0 <= mass < 1.0


class TestAbsorbedMass:
    def test_zero_when_boundary_unreachable(self):
        assert feller_absorbed_mass(*_args(SMOOTH_SETS[0])) == 0.0
        assert feller_absorbed_mass(1.0, 0.02, 0.0, 0.5, 1.0) == 0.0

    def test_decreases_with_starting_level(self):
        _, theta, sigma, beta, tau = ABSORBING_SET
        levels = [0.05, 0.1, 0.3, 1.0]
        masses = [feller_absorbed_mass(s, theta, sigma, beta, tau)
                  for s in levels]
        assert all(a > b for a, b in zip(masses, masses[1:]))
        assert all(0.0 < m < 1.0 for m in masses)

    def test_matches_euler_zero_fraction(self):
        # the Euler boundary treatment is O(sqrt(h))-biased toward
        # absorption, so the tolerance is loose; the tight check is the
        # exact sampler's zero fraction in TestSampler
        s1, theta, sigma, beta, tau = ABSORBING_SET
        draws = feller_em_sample(s1, theta, sigma, beta, tau,
                                 n_steps=2000, n_paths=40_000, seed=4)
        frac = float(np.mean(draws == 0.0))
        exact = feller_absorbed_mass(s1, theta, sigma, beta, tau)
        assert frac == pytest.approx(exact, abs=0.02)


def _args(params):
    return params


class TestSampler:
    def test_deterministic_under_seed(self):
        s1, theta, sigma, beta, tau = SMOOTH_SETS[0]
        a = feller_transition_sample(s1, theta, sigma, beta, tau,
                                     np.random.default_rng(7), size=64)
        b = feller_transition_sample(s1, theta, sigma, beta, tau,
                                     np.random.default_rng(7), size=64)
        np.testing.assert_array_equal(a, b)

    def test_shapes_and_scalars(self):
        s1, theta, sigma, beta, tau = SMOOTH_SETS[0]
        gen = np.random.default_rng(1)
        assert isinstance(
            feller_transition_sample(s1, theta, sigma, beta, tau, gen), float)
        assert feller_transition_sample(
            s1, theta, sigma, beta, tau, gen, size=(3, 5)).shape == (3, 5)
        starts = np.array([[0.5, 1.0], [2.0, 0.7]])
        out = feller_transition_sample(starts, theta, sigma, beta, tau, gen)
        assert out.shape == starts.shape
        with pytest.raises(DomainError):
            feller_transition_sample(starts, theta, sigma, beta, tau, gen,
                                     size=4)

    def test_zero_sigma_returns_flow(self):
        s2 = feller_transition_sample(1.0, 0.02, 0.0, 0.5, 1.0,
                                      np.random.default_rng(0))
        assert s2 == pytest.approx((1.0 + 0.5 * 0.02) ** 2.0, rel=1e-12)

    def test_matches_density_no_absorption(self):
        s1, theta, sigma, beta, tau = SMOOTH_SETS[0]
        draws = feller_transition_sample(s1, theta, sigma, beta, tau,
                                         np.random.default_rng(11),
                                         size=100_000)
        assert feller_chi2_pvalue(draws, s1, theta, sigma, beta, tau) > 1e-3
        mean_x = float(np.mean(draws ** beta))
        expected = s1 ** beta + drift_in_x(theta, sigma, beta) * tau
        sd = float(np.std(draws ** beta)) / math.sqrt(draws.size)
        assert abs(mean_x - expected) < 5.0 * sd

    def test_matches_density_with_absorption(self):
        s1, theta, sigma, beta, tau = ABSORBING_SET
        draws = feller_transition_sample(s1, theta, sigma, beta, tau,
                                         np.random.default_rng(11),
                                         size=100_000)
        atom = feller_absorbed_mass(s1, theta, sigma, beta, tau)
        frac = float(np.mean(draws == 0.0))
        se = math.sqrt(atom * (1.0 - atom) / draws.size)
        assert abs(frac - atom) < 4.0 * se
        assert feller_chi2_pvalue(draws, s1, theta, sigma, beta, tau) > 1e-3

    def test_inadmissible_rejected(self):
        with pytest.raises(ConstraintError):
            feller_transition_sample(1.0, 0.0, 0.4, 0.5, 1.0,
                                     np.random.default_rng(0), size=3)


class TestEulerOracle:
    """Time-stepped level SDE endpoints against the closed-form law."""

    @pytest.mark.parametrize("params", SMOOTH_SETS)
    def test_histogram_matches_density(self, params):
        s1, theta, sigma, beta, tau = params
        draws = feller_em_sample(s1, theta, sigma, beta, tau,
                                 n_steps=2000, n_paths=100_000, seed=99)
        assert feller_chi2_pvalue(draws, s1, theta, sigma, beta, tau) > 0.01
