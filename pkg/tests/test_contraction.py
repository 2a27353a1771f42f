import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpcontract.contraction import (
    ContractionCertificate,
    MetricCandidate,
    check_psd,
    estimate_oib_empirical,
    falsified,
    schur_psd_2block,
    theorem3_beta,
    theorem3_certificate,
    theorem3_grid,
    verify_oib_grid,
)
from dpcontract.dynamics import parameter_model, rotation, rotation_derivative, scalar_model
from dpcontract.exceptions import DimensionError
from dpcontract.geometry import identity_metric


def scalar_cert(lam_base):
    return ContractionCertificate(
        c1=1.0,
        c2=1.0,
        lambda_schedule=lambda k: lam_base**k,
        metric_candidate=MetricCandidate(lambda k, x: [[1.0]]),
        ambient_metric=identity_metric(1),
    )


def scalar_grid(n_x=21, n_k=6):
    return [(k, [x]) for k in range(n_k) for x in np.linspace(-1, 1, n_x)]


def test_check_psd_examples():
    assert check_psd(np.eye(2)) == (True, 1.0)
    ok, lam = check_psd([[1, 2], [2, 1]])
    assert not ok and lam == pytest.approx(-1.0)
    assert check_psd(np.zeros((3, 3))) == (True, 0.0)
    with pytest.raises(DimensionError):
        check_psd(np.zeros((2, 3)))


def test_schur_examples():
    assert schur_psd_2block(np.eye(2), np.zeros((2, 1)), [[1.0]])
    assert not schur_psd_2block([[1.0]], [[2.0]], [[1.0]])
    with pytest.raises(DimensionError):
        schur_psd_2block(np.eye(2), np.zeros((3, 1)), [[1.0]])


def test_schur_on_parameter_certificate_blocks():
    # lambda_{k+1}^2 P - lambda_k^2 J^T P+ J at k = k0 for A(theta) = theta
    z, theta, lam, lam_bar = 0.5, 0.8, 0.9, 1.0
    beta = theorem3_beta(lam, lam_bar, 1.0)
    A, dA = theta, 1.0
    A11 = [[lam_bar**2 - A * A]]
    A12 = [[-A * dA * z]]
    A22 = [[lam_bar**2 * beta**2 - (dA * dA * z * z + lam**2 * beta**2)]]
    assert schur_psd_2block(A11, A12, A22)
    # same blocks as the certificate assembles
    cert = theorem3_certificate(1, lam, lam_bar, 1.0, 0.9)
    model = parameter_model(lambda t: [[t]], lambda t: [[1.0]], 1)
    x = np.array([z, theta])
    J = model.df(0, x)
    M = cert.lam(1) ** 2 * cert.metric_candidate(0, x) - cert.lam(0) ** 2 * J.T @ cert.metric_candidate(1, model.f(0, x)) @ J
    np.testing.assert_allclose(M, np.block([[np.array(A11), np.array(A12)], [np.array(A12).T, np.array(A22)]]), rtol=1e-12)


@settings(max_examples=200)
@given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**32 - 1), st.booleans())
def test_schur_agrees_with_direct(n1, n2, seed, make_psd):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n1 + n2, n1 + n2))
    M = G @ G.T if make_psd else G + G.T
    lam_min = np.linalg.eigvalsh(M)[0]
    if abs(lam_min) < 1e-9:
        return
    A11, A12, A22 = M[:n1, :n1], M[:n1, n1:], M[n1:, n1:]
    assert schur_psd_2block(A11, A12, A22) == (lam_min >= -1e-9)


def test_scalar_certificate_passes():
    report = verify_oib_grid(scalar_model(0.5), scalar_cert(0.5), scalar_grid())
    assert report.passed and not report.violations
    assert report.points_checked == 126
    # equality case: the contraction inequality holds with zero slack
    assert report.min_eigenvalues["contraction"] == pytest.approx(0.0, abs=1e-15)


def test_expanding_map_fails():
    report = verify_oib_grid(scalar_model(2.0), scalar_cert(1.0), scalar_grid())
    assert not report.passed
    assert len(report.violations) == 126
    assert {v.inequality for v in report.violations} == {"contraction"}
    assert report.violations[0].min_eigenvalue == pytest.approx(-3.0)
    keys = [(v.k, v.index) for v in report.violations]
    assert keys == sorted(keys)


def test_parallel_matches_serial():
    grid = scalar_grid(41, 8)
    serial = verify_oib_grid(scalar_model(2.0), scalar_cert(1.0), grid, workers=1)
    parallel = verify_oib_grid(scalar_model(2.0), scalar_cert(1.0), grid, workers=4)
    assert serial.to_dict() == parallel.to_dict()


def test_shrinking_tolerance_never_helps():
    # 0.5001 x with lambda 0.5^k fails by a hair
    model, cert, grid = scalar_model(0.5001), scalar_cert(0.5), scalar_grid()
    counts = [len(verify_oib_grid(model, cert, grid, tol).violations) for tol in (1e-2, 1e-6, 1e-9, 0.0)]
    assert counts == sorted(counts)
    assert counts[0] == 0 and counts[-1] > 0


def test_empty_and_mismatched_grids():
    with pytest.raises(ValueError):
        verify_oib_grid(scalar_model(0.5), scalar_cert(0.5), [])
    with pytest.raises(DimensionError):
        verify_oib_grid(scalar_model(0.5), scalar_cert(0.5), [(0, [1.0, 2.0])])


def test_theorem3_beta_examples():
    assert theorem3_beta(1.0, 1.1, 300.0) == pytest.approx(330 / 0.21, rel=1e-12)
    assert theorem3_beta(1.0, 1.1, 300.0) == pytest.approx(1571.43, abs=0.005)
    assert theorem3_beta(0.9, 1.0, 1.0) == pytest.approx(5.26316, abs=1e-5)
    with pytest.raises(ValueError):
        theorem3_beta(0.9, 0.9, 1.0)


def test_theorem3_certificate_structure():
    cert = theorem3_certificate(2, 1.0, 1.1, 300.0, 1.0)
    beta = cert.params["beta"]
    assert cert.c1 == 1.0 and cert.c2 == pytest.approx(beta)
    assert cert.lam(3) == pytest.approx(1.1**3)
    P = cert.metric_candidate(2, np.array([1.0, 0.0, 0.5]))
    np.testing.assert_allclose(P, np.diag([1.0, 1.0, beta**2]))
    # theta_bar beta < 1 makes c2 = 1
    assert theorem3_certificate(1, 0.5, 10.0, 1.0, 0.1).c2 == 1.0


def test_theorem3_grid_passes_small():
    cert = theorem3_certificate(1, 0.9, 1.0, 1.0, 0.9)
    model = parameter_model(lambda t: [[t]], lambda t: [[1.0]], 1)
    report = verify_oib_grid(model, cert, theorem3_grid(cert, 15, 15, 6))
    assert report.passed and report.rejected == 0


def test_theorem3_rotation_family_passes():
    cert = theorem3_certificate(2, 1.0, 1.1, 300.0, 1.0)
    model = parameter_model(rotation, rotation_derivative, 2)
    report = verify_oib_grid(model, cert, theorem3_grid(cert, 8, 8, 5))
    assert report.passed


def test_points_outside_tube_are_rejected():
    cert = theorem3_certificate(1, 0.9, 1.0, 1.0, 0.9)
    model = parameter_model(lambda t: [[t]], lambda t: [[1.0]], 1)
    grid = [(0, [0.5, 0.5]), (0, [5.0, 0.5]), (3, [0.9, 0.5])]
    with pytest.warns(UserWarning, match="admissible"):
        report = verify_oib_grid(model, cert, grid)
    assert report.rejected == 2 and report.points_checked == 1


def test_alpha_readings():
    cert = theorem3_certificate(2, 1.0, 1.1, 300.0, 1.0, k0=0)
    assert cert.alpha(1.0, 2) == pytest.approx(math.sqrt(2) * cert.c2)
    assert cert.alpha_literal(1.0, 2) == 0.0


def test_empirical_ratios_scalar():
    ratios = estimate_oib_empirical(scalar_model(0.5), identity_metric(1), [([1.0], [0.0])], 0, 2)
    np.testing.assert_allclose(ratios, [1, 0.5, 0.25])
    with pytest.raises(ValueError):
        estimate_oib_empirical(scalar_model(0.5), identity_metric(1), [([1.0], [1.0])])


def test_expanding_map_is_falsified():
    ratios = estimate_oib_empirical(scalar_model(2.0), identity_metric(1), [([1.0], [0.0])], 0, 2)
    assert falsified(ratios, scalar_cert(1.0), 1)
    ratios = estimate_oib_empirical(scalar_model(0.5), identity_metric(1), [([1.0], [0.0])], 0, 5)
    assert not falsified(ratios, scalar_cert(0.5), 1)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.9), st.floats(0.05, 0.9), st.floats(-0.5, 0.5), st.integers(0, 2**32 - 1))
def test_verified_certificate_bounds_empirical_ratios(t1, t2, z0, seed):
    cert = theorem3_certificate(1, 0.9, 1.0, 1.0, 0.9)
    model = parameter_model(lambda t: [[t]], lambda t: [[1.0]], 1)
    from dpcontract.geometry import augmented_metric

    if t1 == t2:
        return
    ratios = estimate_oib_empirical(model, augmented_metric(1), [([z0, t1], [z0, t2])], 0, 10)
    bound = cert.oib_bound(1, 10)
    assert np.all(ratios <= bound + 10 * 1e-9)
