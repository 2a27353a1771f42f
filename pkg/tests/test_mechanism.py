import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from dpcontract.exceptions import ScheduleError
from dpcontract.mechanism import (
    EpsilonSchedule,
    LaplaceSampler,
    NoiseSchedule,
    consensus_noise,
    design_noise,
    design_noise_exponential,
    design_noise_theorem3,
    finite_budget_rate,
    laplace_cdf,
    laplace_inverse_cdf,
    sample_laplace,
)


def test_epsilon_schedule_basics():
    eps = EpsilonSchedule.from_values([1, 3, 6], k0=2)
    assert eps.eps(1) == 0.0
    assert eps.eps(4) == 6.0 and eps.increment(3) == 2.0
    np.testing.assert_array_equal(eps.steps, [2, 3, 4])
    with pytest.raises(ScheduleError, match="k=3"):
        EpsilonSchedule.from_values([1, 0.5, 2], k0=2)
    with pytest.raises(ScheduleError):
        eps.eps(5)


def test_geometric_schedule_keeps_late_increments_exact():
    eps = EpsilonSchedule.geometric(100.0, 1.1, 300)
    assert eps.increment(300) == pytest.approx(100 * 1.1**300, rel=1e-12)


def test_design_noise_halving():
    eps = EpsilonSchedule(np.ones(6))
    noise = design_noise(lambda k: 0.5**k, 2.0, eps)
    np.testing.assert_allclose(noise.diversities, 2 * 0.5 ** np.arange(6), rtol=1e-15)


def test_design_noise_names_flat_step():
    eps = EpsilonSchedule.from_values([1, 2, 2, 3])
    with pytest.raises(ScheduleError, match="k=2"):
        design_noise(lambda k: 1.0, 1.0, eps)


def test_safety_multiplier():
    eps = EpsilonSchedule(np.ones(3))
    assert design_noise(lambda k: 1.0, 1.0, eps, safety=2.0).b(1) == 2.0
    with pytest.raises(ValueError):
        design_noise(lambda k: 1.0, 1.0, eps, safety=0.5)


def test_theorem3_design_matches_printed_value():
    eps = EpsilonSchedule.geometric(100.0, 1.1, 60)
    noise = design_noise_theorem3(2, 1.0, 1.1, 300.0, 1.0, 1.0, eps)
    assert np.ptp(noise.diversities) < 1e-9
    assert noise.b(0) == pytest.approx(22.22, abs=0.005)
    tilde = design_noise_theorem3(2, 1.0, 1.1, 300.0, 1.0, 1.0, EpsilonSchedule.geometric(500.0, 1.1, 60))
    # b~ = sqrt(2) beta / 500 with beta = 330 / 0.21
    assert tilde.b(7) == pytest.approx(math.sqrt(2) * (330 / 0.21) / 500, rel=1e-12)
    assert tilde.b(7) == pytest.approx(4.4447, abs=1e-4)


def test_theorem3_max_branch_and_zero_zeta():
    eps = EpsilonSchedule(np.ones(3))
    # theta_bar beta = 0.1 * 5 < 1, so the max picks 1: b = sqrt(1) zeta / 1
    lam, lam_bar, mu = 0.0 + 1e-12, 1.0, 5.0  # beta = 5
    noise = design_noise_theorem3(1, lam, lam_bar, mu, 0.1, 1.0, eps)
    assert noise.b(0) == pytest.approx(1.0)
    with pytest.raises(ScheduleError):
        design_noise_theorem3(1, 0.9, 1.0, 1.0, 0.9, 0.0, eps)


def test_exponential_examples():
    noise, eps = design_noise_exponential(1.0, 0.5, 1.0, 0.5, 0.5, 0, 60)
    np.testing.assert_allclose(noise.diversities, 2.0)
    assert eps.eps(60) == pytest.approx(1.0, abs=1e-12)
    noise, _ = design_noise_exponential(1.0, 0.5, 1.0, 1.0, 0.9, 0, 10)
    np.testing.assert_allclose(noise.diversities, (5 / 9) ** np.arange(11), rtol=1e-12)
    with pytest.raises(ValueError):
        design_noise_exponential(1.0, 0.5, 1.0, 1.0, 0.4)
    with pytest.raises(ValueError):
        design_noise_exponential(1.0, 0.5, 1.0, 1.0, 1.0)


@given(st.floats(0.01, 10), st.floats(0.05, 0.95))
def test_finite_budget(eps_total, q):
    _, eps = design_noise_exponential(1.0, q, 1.0, finite_budget_rate(eps_total, q), q, 0, 200)
    # increments stay strictly positive even where the running sum has
    # saturated in floating point
    assert np.all(eps.increments > 0)
    values = eps.window(0, 200)
    assert np.all(np.diff(values) >= 0)
    assert np.all(values < eps_total * (1 + 1e-12))


def test_consensus_noise_examples():
    assert consensus_noise(1, 1, 0.5) == pytest.approx(2 * math.sqrt(2))
    assert consensus_noise(2, 1, 0.5) == pytest.approx(4 * math.sqrt(2))
    with pytest.raises(ValueError):
        consensus_noise(1, 1, 1.0)


@settings(max_examples=50)
@given(
    st.lists(st.floats(0.01, 10), min_size=1, max_size=20),
    st.floats(0.1, 10),
    st.floats(0.5, 1.5),
    st.floats(0.01, 5),
)
def test_design_is_tight_and_linear_in_zeta(increments, alpha, base, zeta):
    eps = EpsilonSchedule(increments)
    noise = design_noise(lambda k: base**k, alpha * zeta, eps)
    expected = base ** np.arange(len(increments)) * alpha * zeta / np.asarray(increments)
    np.testing.assert_allclose(noise.diversities, expected, rtol=1e-12)
    doubled = design_noise(lambda k: base**k, alpha * 2 * zeta, eps)
    np.testing.assert_allclose(doubled.diversities, 2 * noise.diversities, rtol=1e-14)


def test_noise_schedule_validation():
    with pytest.raises(ScheduleError, match="k=1"):
        NoiseSchedule([1.0, 0.0])
    with pytest.raises(ScheduleError):
        NoiseSchedule([1.0, np.inf])


def test_inverse_cdf_median_and_roundtrip():
    assert laplace_inverse_cdf(0.5) == 0.0
    u = np.linspace(0.001, 0.999, 101)
    np.testing.assert_allclose(laplace_cdf(laplace_inverse_cdf(u, 2.0, 1.0), 1.0, 2.0), u, rtol=1e-12)


def test_sampler_moments():
    sampler = LaplaceSampler(2024, NoiseSchedule.constant(1.0, 0))
    v = sample_laplace(sampler, 0, 1_000_000)
    assert v.var() == pytest.approx(2.0, abs=0.02)
    assert abs(v.mean()) < 0.01


def test_sampler_ks():
    sampler = LaplaceSampler(7, NoiseSchedule.constant(3.0, 5))
    v = sampler.sample(4, 100_000)
    assert stats.kstest(v, stats.laplace(scale=3.0).cdf).pvalue > 0.001


def test_sampler_reproducible_and_horizon_free():
    short = LaplaceSampler(11, NoiseSchedule.constant(1.0, 3))
    long = LaplaceSampler(11, NoiseSchedule.constant(1.0, 300))
    np.testing.assert_array_equal(short.sample(2, 50), long.sample(2, 50))
    assert not np.array_equal(short.sample(1, 50), short.sample(2, 50))
    assert not np.array_equal(short.sample(1, 50), short.clone(1).sample(1, 50))
    assert not np.array_equal(short.sample(1, 50), LaplaceSampler(12, short.noise).sample(1, 50))


def test_sampler_location_and_negative_steps():
    sampler = LaplaceSampler(0, NoiseSchedule.constant(1.0, 4, k0=-2), location=5.0)
    assert np.median(sampler.sample(-2, 20_001)) == pytest.approx(5.0, abs=0.05)
    assert not np.array_equal(sampler.sample(-1, 5), sampler.sample(1, 5))
