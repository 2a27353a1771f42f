"""Numerical checks of output-incremental-boundedness (OIB) certificates.

A certificate (c1, c2, P(x, k), lambda_k, ambient metric Pt) is verified by
checking on a sampled grid of (k, x) that

    (i)   P(x, k) - c1^2 dh^T dh                              >= 0
    (ii)  c2^2 Pt(x) - P(x, k)                                >= 0
    (iii) lambda_{k+1}^2 P(x, k) - lambda_k^2 df^T P(f(x), k+1) df >= 0

in the sense of symmetric matrices. Passing a grid is evidence, not proof:
the inequalities are only evaluated at the supplied points.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _accel
from .dynamics import simulate
from .exceptions import DimensionError, NumericalError
from .geometry import augmented_metric, distance

DEFAULT_TOL = 1e-9
DEFAULT_GRID_STEPS = 20

INEQUALITIES = ("output-bound", "metric-bound", "contraction")


def check_psd(M, tol=DEFAULT_TOL):
    """Return (is_psd, min_eigenvalue) for the symmetric part of ``M``."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"check_psd needs a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    if M.size == 0:
        return True, math.inf
    lam_min = float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])
    return lam_min >= -tol, lam_min


def schur_psd_2block(A11, A12, A22, tol=DEFAULT_TOL):
    """PSD test for [[A11, A12], [A12^T, A22]].

    The direct eigenvalue route is authoritative. When A22 is positive
    definite the Schur complement A11 - A12 A22^{-1} A12^T is checked as
    well and the two answers must agree.
    """
    A11 = np.atleast_2d(np.asarray(A11, dtype=np.float64))
    A22 = np.atleast_2d(np.asarray(A22, dtype=np.float64))
    A12 = np.asarray(A12, dtype=np.float64)
    if A12.size != A11.shape[0] * A22.shape[0]:
        raise DimensionError(f"off-diagonal block of size {A12.size} for blocks {A11.shape} and {A22.shape}")
    A12 = A12.reshape(A11.shape[0], A22.shape[0])
    if A11.shape[0] != A11.shape[1] or A22.shape[0] != A22.shape[1]:
        raise DimensionError("diagonal blocks must be square")
    full = np.block([[A11, A12], [A12.T, A22]])
    direct, lam_full = check_psd(full, tol)
    _, lam22 = check_psd(A22, tol)
    if lam22 > tol:
        schur = A11 - A12 @ np.linalg.solve(A22, A12.T)
        via_schur, lam_schur = check_psd(schur, tol)
        # outside the (-tol, tol) band the two routes provably coincide
        if via_schur != direct and abs(lam_full) > tol:
            raise NumericalError(
                f"Schur route ({lam_schur:.3e}) disagrees with direct route ({lam_full:.3e})"
            )
    return direct


@dataclass(frozen=True)
class MetricCandidate:
    """Time-varying PSD matrix field P(x, k)."""

    evaluate: Callable[[int, np.ndarray], np.ndarray]

    def __call__(self, k, x):
        return np.atleast_2d(np.asarray(self.evaluate(k, x), dtype=np.float64))


@dataclass(frozen=True)
class ContractionCertificate:
    """c1, c2, lambda_k, P(x, k) and the ambient metric they are stated against.

    ``admissible`` optionally restricts the region (k, x) on which the
    certificate is claimed; grid points outside it are skipped.
    """

    c1: float
    c2: float
    lambda_schedule: Callable[[int], float]
    metric_candidate: MetricCandidate
    ambient_metric: object
    k0: int = 0
    admissible: Optional[Callable[[int, np.ndarray], bool]] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.c1 > 0 and self.c2 > 0):
            raise ValueError("c1 and c2 must be positive")

    def lam(self, k):
        value = float(self.lambda_schedule(k))
        if not value > 0:
            raise ValueError(f"lambda_{k} = {value} is not positive")
        return value

    def alpha(self, zeta, m):
        """alpha(zeta) = sqrt(m) (c2/c1) zeta / lambda_{k0}."""
        return math.sqrt(m) * self.c2 / self.c1 * zeta / self.lam(self.k0)

    def alpha_literal(self, zeta, m):
        """The alternative reading sqrt(m) (c2/c1) k0 zeta, kept for reporting."""
        return math.sqrt(m) * self.c2 / self.c1 * self.k0 * zeta

    def oib_bound(self, m, horizon, k0=None):
        """Per-step bound sqrt(m) (c2/c1) lambda_k / lambda_{k0} on |dy|_1 / d."""
        k0 = self.k0 if k0 is None else k0
        base = self.lam(k0)
        return np.array(
            [math.sqrt(m) * self.c2 / self.c1 * self.lam(k) / base for k in range(k0, k0 + horizon + 1)]
        )


@dataclass(frozen=True)
class Violation:
    k: int
    index: int
    x: tuple
    inequality: str
    min_eigenvalue: float


@dataclass
class GridVerificationReport:
    points_checked: int
    violations: list
    passed: bool
    tolerance: float
    rejected: int = 0
    min_eigenvalues: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "points_checked": self.points_checked,
            "rejected": self.rejected,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "min_eigenvalues": dict(self.min_eigenvalues),
            "violations": [
                {
                    "k": v.k,
                    "index": v.index,
                    "x": list(v.x),
                    "inequality": v.inequality,
                    "min_eigenvalue": v.min_eigenvalue,
                }
                for v in self.violations
            ],
        }


def _assemble(model, cert, points):
    n = model.state_dim
    N = len(points)
    out = np.empty((3, N, n, n))
    c1sq, c2sq = cert.c1**2, cert.c2**2
    for j, (k, x) in enumerate(points):
        P = cert.metric_candidate(k, x)
        H = model.dh(k, x)
        J = model.df(k, x)
        Pn = cert.metric_candidate(k + 1, model.f(k, x))
        lk, lk1 = cert.lam(k), cert.lam(k + 1)
        out[0, j] = P - c1sq * (H.T @ H)
        out[1, j] = c2sq * cert.ambient_metric(x, check=False) - P
        out[2, j] = lk1**2 * P - lk**2 * (J.T @ Pn @ J)
    return out


def verify_oib_grid(model, cert, grid, tol=DEFAULT_TOL, workers=None):
    """Check the three certificate inequalities at every grid point.

    ``grid`` is an iterable of (k, x). Points outside ``cert.admissible``
    are rejected with a warning. Violations are reported sorted by
    (k, grid index) regardless of ``workers``.
    """
    grid = [(int(k), np.atleast_1d(np.asarray(x, dtype=np.float64))) for k, x in grid]
    if not grid:
        raise ValueError("empty grid")
    for _, x in grid:
        if x.shape != (model.state_dim,):
            raise DimensionError(f"grid point of shape {x.shape} for a {model.state_dim}-state model")

    kept = []
    for idx, (k, x) in enumerate(grid):
        if cert.admissible is None or cert.admissible(k, x):
            kept.append(idx)
    rejected = len(grid) - len(kept)
    if rejected:
        warnings.warn(f"{rejected} grid points lie outside the certificate's admissible region and were skipped")

    points = [grid[i] for i in kept]
    workers = workers or _accel.thread_cap() or 1
    if workers > 1 and len(points) > 1:
        chunks = np.array_split(np.arange(len(points)), workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _assemble(model, cert, [points[i] for i in c]), chunks))
        stacks = np.concatenate(parts, axis=1)
    else:
        stacks = _assemble(model, cert, points)

    violations = []
    mins = {}
    for which, stack in zip(INEQUALITIES, stacks):
        eigs = _accel.min_eigvalsh(stack) if len(points) else np.empty(0)
        mins[which] = float(eigs.min()) if eigs.size else math.inf
        for j in np.flatnonzero(eigs < -tol):
            k, x = points[j]
            violations.append(Violation(k, kept[j], tuple(float(v) for v in x), which, float(eigs[j])))
    order = {name: i for i, name in enumerate(INEQUALITIES)}
    violations.sort(key=lambda v: (v.k, v.index, order[v.inequality]))
    return GridVerificationReport(
        points_checked=len(points),
        violations=violations,
        passed=not violations,
        tolerance=tol,
        rejected=rejected,
        min_eigenvalues=mins,
    )


def theorem3_beta(lam, lam_bar, mu):
    """beta = lam_bar mu / (lam_bar^2 - lam^2)."""
    if not lam_bar > lam:
        raise ValueError(f"lambda_bar ({lam_bar}) must exceed lambda ({lam})")
    if mu <= 0:
        raise ValueError("mu must be positive")
    return lam_bar * mu / (lam_bar**2 - lam**2)


def theorem3_certificate(n, lam, lam_bar, mu, theta_bar, k0=0):
    """Certificate for z_{k+1} = A(theta) z_k, theta_{k+1} = theta_k, y = z.

    Valid when |A(theta)|_2 <= lam <= 1, |dA/dtheta|_2 <= 1, 0 < theta <= theta_bar
    and |z_k| <= mu lam^{k-k0} (the admissible tube). Uses
    P = diag(I_n, lam^{2(k-k0)} beta^2), lambda_k = lam_bar^{k-k0}, c1 = 1,
    c2 = max(theta_bar beta, 1) and the ambient metric diag(I_n, 1/theta^2).
    """
    if not 0 < lam <= 1:
        raise ValueError(f"lambda must lie in (0, 1], got {lam}")
    if theta_bar <= 0:
        raise ValueError("theta_bar must be positive")
    beta = theorem3_beta(lam, lam_bar, mu)

    def P(k, x):
        mat = np.eye(n + 1)
        mat[n, n] = lam ** (2 * (k - k0)) * beta**2
        return mat

    def admissible(k, x):
        radius = mu * lam ** (k - k0)
        theta = x[n]
        return (
            k >= k0
            and 0 < theta <= theta_bar * (1 + 1e-12)
            and np.linalg.norm(x[:n]) <= radius * (1 + 1e-12)
        )

    return ContractionCertificate(
        c1=1.0,
        c2=max(theta_bar * beta, 1.0),
        lambda_schedule=lambda k: lam_bar ** (k - k0),
        metric_candidate=MetricCandidate(P),
        ambient_metric=augmented_metric(n),
        k0=k0,
        admissible=admissible,
        params={"n": n, "lambda": lam, "lambda_bar": lam_bar, "mu": mu, "theta_bar": theta_bar, "beta": beta},
    )


def theorem3_grid(cert, n_z=50, n_theta=50, n_k=DEFAULT_GRID_STEPS, seed=0):
    """Grid over (z, theta, k) inside the admissible tube of a Theorem-3 certificate.

    For n = 1 the z values are evenly spaced over [-r_k, r_k] with
    r_k = mu lam^{k-k0}, so the tube boundary is included. For n > 1 they
    are fixed random directions scaled by evenly spaced radii in [0, r_k].
    """
    p = cert.params
    n, lam, mu, theta_bar = p["n"], p["lambda"], p["mu"], p["theta_bar"]
    thetas = np.linspace(theta_bar / n_theta, theta_bar, n_theta)
    if n == 1:
        unit = np.linspace(-1.0, 1.0, n_z)[:, None]
    else:
        rng = np.random.default_rng(seed)
        dirs = rng.standard_normal((n_z, n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        unit = dirs * np.linspace(0.0, 1.0, n_z)[:, None]
    grid = []
    for k in range(cert.k0, cert.k0 + n_k):
        radius = mu * lam ** (k - cert.k0)
        for z in unit * radius:
            for theta in thetas:
                grid.append((k, np.concatenate([z, [theta]])))
    return grid


def estimate_oib_empirical(model, metric, pairs, k0=0, horizon=1):
    """Per-step max over pairs of |dy_k|_1 / d(xa, xb).

    This is an empirical lower bound on the OIB gain sqrt(m) (c2/c1) lambda_k / lambda_{k0}
    and is used to falsify certificates.
    """
    ratios = np.zeros(horizon + 1)
    for xa, xb in pairs:
        a = getattr(xa, "coords", xa)
        b = getattr(xb, "coords", xb)
        d = distance(xa, xb, metric)
        if d <= 0:
            raise ValueError("pair at zero distance")
        ya = simulate(model, a, k0, horizon).outputs
        yb = simulate(model, b, k0, horizon).outputs
        ratios = np.maximum(ratios, np.abs(ya - yb).sum(axis=1) / d)
    return ratios


def falsified(ratios, cert, m, k0=None, rtol=1e-6):
    """True if any empirical ratio exceeds the certificate's OIB bound."""
    bound = cert.oib_bound(m, len(ratios) - 1, k0)
    return bool(np.any(np.asarray(ratios) > bound * (1 + rtol)))
