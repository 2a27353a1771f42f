import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpcontract.audit import (
    BoxSet,
    box_probability,
    composition_loss,
    log_box_probability,
    monte_carlo_box_probability,
    privacy_loss,
    verify_dp_on_boxes,
    worst_pair_search,
)
from dpcontract.casestudies import exo_parameter_model, section5_noise
from dpcontract.dynamics import linear_model, scalar_model
from dpcontract.exceptions import DimensionError, ScheduleError
from dpcontract.geometry import identity_metric
from dpcontract.mechanism import EpsilonSchedule, NoiseSchedule


def identity_model():
    # y_k = x_0 for every k: the per-step gap is constant
    return linear_model([[1.0]])


def test_composition_example():
    per_step, cumulative = composition_loss([1.0, 0.5], [2.0, 1.0])
    np.testing.assert_allclose(per_step, [0.5, 0.5])
    np.testing.assert_allclose(cumulative, [0.5, 1.0])
    with pytest.raises(ScheduleError):
        composition_loss([1.0], [0.0])


def test_identical_states_have_zero_loss():
    eps = EpsilonSchedule(np.full(6, 0.1))
    report = privacy_loss(scalar_model(0.5), [2.0], [2.0], NoiseSchedule.constant(1.0, 5), 0, 5, eps)
    assert report.satisfied and np.all(report.cumulative_loss == 0)


def test_section5_pair_is_private():
    noise = section5_noise(100.0, 50)
    eps = EpsilonSchedule.geometric(100.0, 1.1, 50)
    omega = math.pi / 10
    xa = [100.0, 0.0, omega]
    xb = [100.0, 0.0, min(omega * math.e, 1.0)]
    report = privacy_loss(exo_parameter_model(), xa, xb, noise, 0, 50, eps)
    assert report.satisfied and report.margin > 0
    assert np.all(np.diff(report.cumulative_loss) >= 0)


def test_budget_violation_is_reported():
    eps = EpsilonSchedule(np.full(4, 0.1))
    report = privacy_loss(identity_model(), [0.0], [1.0], NoiseSchedule.constant(1.0, 3), 0, 3, eps)
    assert not report.satisfied and report.margin < 0


def test_box_probability_examples():
    half = BoxSet.upper_half_lines([[0.0]])
    noise = NoiseSchedule.constant(1.0, 1)
    assert box_probability([[0.0]], noise, half) == pytest.approx(0.5, abs=1e-15)
    assert box_probability([[1.0]], noise, half) == pytest.approx(1 - 0.5 * math.exp(-1), abs=1e-15)
    two = BoxSet.upper_half_lines([[0.0], [0.0]])
    assert box_probability([[0.0], [0.0]], noise, two) == pytest.approx(0.25, abs=1e-15)


def test_box_validation():
    with pytest.raises(ValueError):
        BoxSet([[1.0]], [[0.0]])
    with pytest.raises(DimensionError):
        log_box_probability([[0.0, 0.0]], [1.0], BoxSet.everything(1, 1))


def test_box_ratio_examples():
    noise = NoiseSchedule.constant(1.0, 0)
    eps = EpsilonSchedule([1.0])
    res = verify_dp_on_boxes(identity_model(), [1.0], [0.0], noise, eps, [BoxSet.upper_half_lines([[0.0]])], 0, 0)
    assert res.worst_log_ratio == pytest.approx(math.log((1 - 0.5 * math.exp(-1)) / 0.5), abs=1e-12)
    assert res.passed and res.dominated
    res = verify_dp_on_boxes(identity_model(), [1.0], [0.0], noise, eps, [BoxSet.everything(1, 1)], 0, 0)
    assert res.worst_log_ratio == 0.0


def test_adversarial_half_lines_approach_but_never_exceed():
    # for the set [t, inf) with t far above both centers the ratio tends to dy / b
    noise = NoiseSchedule.constant(1.0, 0)
    eps = EpsilonSchedule([1.0])
    boxes = [BoxSet.upper_half_lines([[t]]) for t in np.linspace(-5, 40, 200)]
    res = verify_dp_on_boxes(identity_model(), [1.0], [0.0], noise, eps, boxes, 0, 0)
    assert max(res.log_ratios) <= 1.0 + 1e-12
    assert max(res.log_ratios) == pytest.approx(1.0, abs=1e-12)


def test_far_tail_mass_keeps_precision():
    # P(Lap(0,1) >= 700) = 0.5 e^{-700}, which underflows if done as 1 - F
    lp = log_box_probability([[0.0]], [1.0], BoxSet.upper_half_lines([[700.0]]))
    assert lp == pytest.approx(math.log(0.5) - 700.0, rel=1e-14)


def test_empty_interval_gives_infinite_ratio_only_when_one_sided():
    lp = log_box_probability([[0.0]], [1.0], BoxSet([[1.0]], [[1.0]]))
    assert lp == -np.inf


@settings(max_examples=100)
@given(st.floats(-50, 50), st.floats(0.01, 20), st.floats(-50, 50))
def test_complementary_half_lines_sum_to_one(center, b, t):
    noise = NoiseSchedule.constant(b, 0)
    upper = box_probability([[center]], noise, BoxSet.upper_half_lines([[t]]))
    lower = box_probability([[center]], noise, BoxSet.lower_half_lines([[t]]))
    assert upper + lower == pytest.approx(1.0, abs=1e-12)


def test_loss_is_additive_over_windows():
    model = scalar_model(0.8)
    noise = NoiseSchedule(np.linspace(0.5, 2.0, 21))
    full = privacy_loss(model, [3.0], [1.0], noise, 0, 20).cumulative_loss
    head = privacy_loss(model, [3.0], [1.0], noise, 0, 9).cumulative_loss
    from dpcontract.dynamics import simulate

    xa, xb = simulate(model, [3.0], 0, 10).states[-1], simulate(model, [1.0], 0, 10).states[-1]
    tail = privacy_loss(model, xa, xb, noise, 10, 10).cumulative_loss
    assert full[-1] == pytest.approx(head[-1] + tail[-1], rel=1e-13)


@settings(max_examples=50)
@given(st.lists(st.floats(0.1, 10), min_size=5, max_size=5), st.integers(0, 4), st.floats(1.0, 10.0))
def test_larger_noise_never_increases_loss(b, j, factor):
    model = scalar_model(0.9)
    base = NoiseSchedule(b)
    bigger = np.array(b)
    bigger[j] *= factor
    L1 = privacy_loss(model, [1.0], [-1.0], base, 0, 4).cumulative_loss
    L2 = privacy_loss(model, [1.0], [-1.0], NoiseSchedule(bigger), 0, 4).cumulative_loss
    assert np.all(L2 <= L1 + 1e-15)


def test_monte_carlo_agrees_with_exact():
    noise = NoiseSchedule([1.0, 2.0])
    box = BoxSet([[-0.5], [0.0]], [[1.0], [np.inf]])
    centers = [[0.2], [-0.3]]
    exact = box_probability(centers, noise, box)
    estimate, se = monte_carlo_box_probability(centers, noise, box, 100_000, seed=3)
    assert abs(estimate - exact) < 3 * se


def test_worst_pair_on_boundary_and_zero_radius():
    noise = NoiseSchedule.constant(1.0, 10)
    eps = EpsilonSchedule(np.full(11, 1.0))
    model, metric = scalar_model(0.5), identity_metric(1)
    zero = worst_pair_search(model, metric, [0.3], 0.0, noise, eps, 0, 10)
    assert np.all(zero.cumulative_loss == 0)
    worst = worst_pair_search(model, metric, [0.3], 1.0, noise, None, 0, 10, n_samples=16, seed=1)
    assert abs(worst.worst_pair[1][0] - 0.3) == pytest.approx(1.0)
    # loss grows linearly with the radius for a linear system
    radii = np.linspace(0.1, 1.0, 10)
    finals = [privacy_loss(model, [0.3], [0.3 + r], noise, 0, 10).cumulative_loss[-1] for r in radii]
    assert np.all(np.diff(finals) > 0)
    assert finals[-1] == pytest.approx(worst.cumulative_loss[-1])


def test_worst_pair_is_order_independent():
    noise = NoiseSchedule.constant(1.0, 5)
    model, metric = linear_model(np.diag([0.5, 0.9])), identity_metric(2)
    a = worst_pair_search(model, metric, [0.0, 0.0], 1.0, noise, n_samples=32, seed=5)
    b = worst_pair_search(model, metric, [0.0, 0.0], 1.0, noise, n_samples=32, seed=5)
    assert a.to_dict() == b.to_dict() and a.pairs_evaluated == 32
