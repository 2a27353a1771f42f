import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpcontract.exceptions import DimensionError, UnsupportedChartError
from dpcontract.geometry import (
    ManifoldPoint,
    MetricField,
    PathCurve,
    affine_line_metric,
    augmented_metric,
    distance,
    fisher_rao_metric,
    geodesic,
    identity_metric,
    is_adjacent,
    path_length,
    sphere_points,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)
positive = st.floats(1e-3, 1e3, allow_nan=False)


def test_segment_length_euclidean():
    path = PathCurve.segment([0, 0], [3, 4], 1000)
    assert path_length(path, identity_metric(2)) == pytest.approx(5.0, abs=1e-9)


def test_segment_length_fisher_rao():
    path = PathCurve.segment([1.0], [math.e], 10_000, "positive-scalar")
    assert path_length(path, fisher_rao_metric()) == pytest.approx(1.0, abs=1e-6)


def test_segment_length_affine_line():
    path = PathCurve.segment([0.0], [1.0], 50, "affine-line")
    assert path_length(path, affine_line_metric()) == pytest.approx(math.sqrt(10), abs=1e-9)


def test_affine_line_is_pullback_of_plane():
    # the embedded segment has the same Euclidean length
    a, b = ManifoldPoint([0.2], "affine-line"), ManifoldPoint([1.7], "affine-line")
    assert distance(a, b, affine_line_metric()) == pytest.approx(np.linalg.norm(a.embed() - b.embed()), rel=1e-14)


@pytest.mark.parametrize(
    "a, b, metric, expected",
    [
        ([1, 2], [4, 6], identity_metric(2), 5.0),
        ([2.0], [8.0], fisher_rao_metric(), math.log(4)),
        ([2.0], [2.0], fisher_rao_metric(), 0.0),
        ([0.0], [1.0], affine_line_metric(), math.sqrt(10)),
        ([0.0, 1.0], [3.0, math.e], augmented_metric(1), math.sqrt(10)),
    ],
)
def test_distance_examples(a, b, metric, expected):
    assert distance(a, b, metric) == pytest.approx(expected, abs=1e-12)


def test_adjacency_examples():
    eu = identity_metric(2)
    assert is_adjacent([0, 0], [0.6, 0.8], eu, 1.0)
    assert not is_adjacent([0, 0], [0.6, 0.8], eu, 0.99)
    assert not is_adjacent([1.0], [math.e**2], fisher_rao_metric(), 1.0)


def test_chart_validation():
    with pytest.raises(ValueError):
        ManifoldPoint([-1.0], "positive-scalar")
    with pytest.raises(DimensionError):
        ManifoldPoint([1.0, 2.0], "affine-line")
    with pytest.raises(UnsupportedChartError):
        ManifoldPoint([1.0], "sphere")
    with pytest.raises(ValueError):
        ManifoldPoint([np.nan, 1.0])


def test_custom_metric_has_no_closed_form():
    custom = MetricField(lambda x: np.diag([1.0, 2.0]), 2)
    with pytest.raises(UnsupportedChartError):
        distance([0, 0], [1, 1], custom)
    # but a sampled path can still be measured
    assert path_length(PathCurve.segment([0, 0], [1, 0], 10), custom) == pytest.approx(1.0)


def test_metric_rejects_asymmetry_and_indefiniteness():
    bad = MetricField(lambda x: np.array([[1.0, 0.1], [0.0, 1.0]]), 2)
    with pytest.raises(ValueError, match="symmetric"):
        bad([0.0, 0.0])
    indefinite = MetricField(lambda x: np.diag([1.0, -1.0]), 2)
    with pytest.raises(ValueError, match="positive definite"):
        indefinite([0.0, 0.0])


def test_path_dimension_mismatch():
    with pytest.raises(DimensionError):
        path_length(PathCurve.segment([0, 0], [1, 1], 5), identity_metric(3))


def test_quadrature_converges_at_second_order():
    # chord length along a straight line in theta is not the geodesic, so
    # the midpoint rule has a genuine discretisation error to shrink
    exact = math.log(5.0)
    errors = []
    for count in (11, 21, 41, 81):
        path = PathCurve.segment([1.0], [5.0], count, "positive-scalar")
        errors.append(abs(path_length(path, fisher_rao_metric()) - exact))
    for coarse, fine in zip(errors, errors[1:]):
        assert fine <= coarse / 2


@given(st.lists(finite, min_size=2, max_size=2), st.lists(finite, min_size=2, max_size=2))
def test_euclidean_symmetry(a, b):
    m = identity_metric(2)
    assert distance(a, b, m) == distance(b, a, m)


@given(positive, positive)
def test_fisher_rao_symmetry(a, b):
    m = fisher_rao_metric()
    assert distance([a], [b], m) == distance([b], [a], m)


@given(positive, positive, positive)
def test_triangle_inequality_fisher_rao(a, b, c):
    m = fisher_rao_metric()
    assert distance([a], [c], m) <= distance([a], [b], m) + distance([b], [c], m) + 1e-9


@given(st.lists(finite, min_size=1, max_size=1), positive, st.lists(finite, min_size=1, max_size=1), positive)
def test_geodesic_no_longer_than_other_paths(z1, t1, z2, t2):
    m = augmented_metric(1)
    a, b = [z1[0], t1], [z2[0], t2]
    d = distance(a, b, m)
    assert path_length(geodesic(a, b, m, 2001), m) == pytest.approx(d, rel=1e-5, abs=1e-9)
    # straight chart segment is a competitor path; the midpoint rule may
    # undershoot it by its own quadrature error
    h = abs(t2 - t1) / 2000 / min(t1, t2)
    assert path_length(PathCurve.segment(a, b, 2001, "augmented"), m) >= d * (1 - h * h / 12) - 1e-9


@settings(max_examples=50)
@given(st.floats(0.0, 5.0), st.integers(0, 2**32 - 1))
def test_sphere_points_lie_on_the_sphere(zeta, seed):
    rng = np.random.default_rng(seed)
    for metric, center in (
        (identity_metric(3), [1.0, -2.0, 0.5]),
        (fisher_rao_metric(), [0.7]),
        (affine_line_metric(), [2.0]),
        (augmented_metric(2), [1.0, 0.0, 0.5]),
    ):
        for p in sphere_points(center, metric, zeta, 8, rng):
            assert distance(center, p, metric) == pytest.approx(zeta, abs=1e-9)
