"""Riemannian metrics, path-length quadrature and closed-form geodesic distances.

Four charts are supported, each with a closed-form distance:

``euclidean``
    Coordinates in R^n with the identity metric.
``positive-scalar``
    A single coordinate theta > 0 with the Fisher-Rao metric 1/theta^2, so
    that d(theta, theta') = |log(theta'/theta)|.
``affine-line``
    A point on the line x1 = 3 x2 in R^2, parameterised by x2. The pulled
    back metric is the constant 10 and d = sqrt(10) |x2 - x2'|.
``augmented``
    (z, theta) with z in R^n and theta > 0, metric diag(I_n, 1/theta^2).
    In the coordinates (z, log theta) the metric is Euclidean, hence
    d = sqrt(|z - z'|^2 + log(theta'/theta)^2).

There is deliberately no general geodesic solver.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _accel
from .exceptions import DimensionError, UnsupportedChartError

CHARTS = ("euclidean", "positive-scalar", "affine-line", "augmented")

AFFINE_LINE_SLOPE = 3.0
AFFINE_LINE_METRIC = 1.0 + AFFINE_LINE_SLOPE**2

SYMMETRY_TOL = 1e-9


def _as_coords(values):
    coords = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if coords.ndim != 1:
        raise DimensionError(f"coordinates must be a vector, got shape {coords.shape}")
    return coords


def _check_chart_coords(coords, chart):
    if chart not in CHARTS:
        raise UnsupportedChartError(f"unknown chart {chart!r}")
    if not np.all(np.isfinite(coords)):
        raise ValueError(f"non-finite coordinates {coords}")
    if chart in ("positive-scalar", "affine-line") and coords.size != 1:
        raise DimensionError(f"{chart} chart is one-dimensional, got {coords.size} coordinates")
    if chart == "positive-scalar" and coords[0] <= 0:
        raise ValueError(f"positive-scalar chart requires theta > 0, got {coords[0]}")
    if chart == "augmented":
        if coords.size < 2:
            raise DimensionError("augmented chart needs (z..., theta) with at least 2 coordinates")
        if coords[-1] <= 0:
            raise ValueError(f"augmented chart requires theta > 0, got {coords[-1]}")


@dataclass(frozen=True)
class ManifoldPoint:
    """Chart coordinates of a point on the state manifold."""

    coords: np.ndarray
    chart: str = "euclidean"

    def __post_init__(self):
        coords = _as_coords(self.coords)
        _check_chart_coords(coords, self.chart)
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self):
        return self.coords.size

    def embed(self):
        """Ambient R^2 coordinates for the affine-line chart; coords otherwise."""
        if self.chart == "affine-line":
            x2 = self.coords[0]
            return np.array([AFFINE_LINE_SLOPE * x2, x2])
        return self.coords.copy()


@dataclass(frozen=True)
class MetricField:
    """A map from chart coordinates to a symmetric positive-definite matrix.

    ``kind`` names the built-in metric (``identity``, ``fisher-rao``,
    ``affine-line``, ``augmented``) so that :func:`distance` can pick the
    closed form; user-supplied metrics use ``custom`` and only support
    :func:`path_length`.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    dim: int
    kind: str = "custom"
    chart: Optional[str] = None
    batch: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)

    def __call__(self, x, check=True):
        x = _as_coords(x)
        if x.size != self.dim:
            raise DimensionError(f"metric of dim {self.dim} evaluated at a {x.size}-vector")
        mat = np.atleast_2d(np.asarray(self.evaluate(x), dtype=np.float64))
        if mat.shape != (self.dim, self.dim):
            raise DimensionError(f"metric returned shape {mat.shape}, expected {(self.dim, self.dim)}")
        if check:
            mat = _symmetrize_checked(mat)
            if np.linalg.eigvalsh(mat)[0] <= 0:
                raise ValueError(f"metric is not positive definite at {x}")
        return mat

    def evaluate_many(self, points):
        """Stack of metric matrices at each row of ``points`` (no PD check)."""
        points = np.asarray(points, dtype=np.float64)
        if self.batch is not None:
            return np.asarray(self.batch(points), dtype=np.float64)
        return np.stack([self(p, check=False) for p in points])


def _symmetrize_checked(mat):
    asym = np.max(np.abs(mat - mat.T)) if mat.size else 0.0
    if asym > SYMMETRY_TOL:
        raise ValueError(f"metric matrix is not symmetric (max asymmetry {asym:.3e})")
    return 0.5 * (mat + mat.T)


def identity_metric(n):
    """Euclidean metric I_n."""
    eye = np.eye(n)
    return MetricField(
        evaluate=lambda x: eye,
        dim=n,
        kind="identity",
        chart="euclidean",
        batch=lambda pts: np.broadcast_to(eye, (len(pts), n, n)),
    )


def fisher_rao_metric():
    """Fisher-Rao metric 1/theta^2 on the positive half line."""
    return MetricField(
        evaluate=lambda x: np.array([[1.0 / x[0] ** 2]]),
        dim=1,
        kind="fisher-rao",
        chart="positive-scalar",
        batch=lambda pts: (1.0 / pts[:, 0] ** 2)[:, None, None],
    )


def affine_line_metric():
    """Pullback of the Euclidean metric to the line x1 = 3 x2 (constant 10)."""
    return MetricField(
        evaluate=lambda x: np.array([[AFFINE_LINE_METRIC]]),
        dim=1,
        kind="affine-line",
        chart="affine-line",
        batch=lambda pts: np.full((len(pts), 1, 1), AFFINE_LINE_METRIC),
    )


def augmented_metric(n):
    """diag(I_n, 1/theta^2) on (z, theta)."""

    def evaluate(x):
        mat = np.eye(n + 1)
        mat[n, n] = 1.0 / x[n] ** 2
        return mat

    def batch(pts):
        mats = np.tile(np.eye(n + 1), (len(pts), 1, 1))
        mats[:, n, n] = 1.0 / pts[:, n] ** 2
        return mats

    return MetricField(evaluate=evaluate, dim=n + 1, kind="augmented", chart="augmented", batch=batch)


def metric_for_chart(chart, dim=None):
    """Built-in metric matching ``chart``; ``dim`` is the chart dimension."""
    if chart == "euclidean":
        if dim is None:
            raise DimensionError("euclidean chart needs an explicit dimension")
        return identity_metric(dim)
    if chart == "positive-scalar":
        return fisher_rao_metric()
    if chart == "affine-line":
        return affine_line_metric()
    if chart == "augmented":
        if dim is None or dim < 2:
            raise DimensionError("augmented chart needs dimension >= 2")
        return augmented_metric(dim - 1)
    raise UnsupportedChartError(f"unknown chart {chart!r}")


_KIND_TO_CHART = {
    "identity": "euclidean",
    "fisher-rao": "positive-scalar",
    "affine-line": "affine-line",
    "augmented": "augmented",
}


@dataclass(frozen=True)
class PathCurve:
    """Samples gamma(s_j) of a path at uniform s_j in [0, 1]."""

    samples: np.ndarray
    chart: str = "euclidean"

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim == 1:
            samples = samples[:, None]
        if samples.ndim != 2 or samples.shape[0] < 2:
            raise DimensionError("a path needs at least 2 samples")
        if not np.all(np.isfinite(samples)):
            raise ValueError("path samples contain non-finite coordinates")
        object.__setattr__(self, "samples", samples)

    @classmethod
    def segment(cls, a, b, count, chart="euclidean"):
        """Straight line in chart coordinates from ``a`` to ``b``."""
        a, b = _as_coords(a), _as_coords(b)
        if a.shape != b.shape:
            raise DimensionError("segment endpoints differ in dimension")
        s = np.linspace(0.0, 1.0, int(count))[:, None]
        return cls((1.0 - s) * a + s * b, chart)

    @classmethod
    def from_function(cls, gamma, count, chart="euclidean"):
        s = np.linspace(0.0, 1.0, int(count))
        return cls(np.stack([_as_coords(gamma(si)) for si in s]), chart)

    @property
    def count(self):
        return self.samples.shape[0]

    @property
    def start(self):
        return ManifoldPoint(self.samples[0], self.chart)

    @property
    def end(self):
        return ManifoldPoint(self.samples[-1], self.chart)


def path_length(path, metric):
    """Midpoint-rule length of a sampled path under ``metric``.

    Tangents are the forward differences between consecutive samples and the
    metric is evaluated at each chord midpoint, so every subinterval
    contributes sqrt(dg^T P(mid) dg).
    """
    samples = path.samples
    if samples.shape[1] != metric.dim:
        raise DimensionError(f"path of dim {samples.shape[1]} measured with a metric of dim {metric.dim}")
    deltas = np.diff(samples, axis=0)
    mids = 0.5 * (samples[1:] + samples[:-1])
    mats = metric.evaluate_many(mids)
    return _accel.quadform_length(deltas, mats)


def _coerce_pair(a, b, metric):
    chart = _KIND_TO_CHART.get(metric.kind)
    if chart is None:
        raise UnsupportedChartError(
            f"no closed-form distance for metric kind {metric.kind!r}; use path_length on explicit paths"
        )
    pa = a if isinstance(a, ManifoldPoint) else ManifoldPoint(a, chart)
    pb = b if isinstance(b, ManifoldPoint) else ManifoldPoint(b, chart)
    if pa.chart != pb.chart:
        raise DimensionError(f"points live in different charts ({pa.chart} vs {pb.chart})")
    if pa.chart != chart:
        raise UnsupportedChartError(f"metric {metric.kind!r} does not match chart {pa.chart!r}")
    if pa.dim != pb.dim or pa.dim != metric.dim:
        raise DimensionError(f"dimension mismatch: {pa.dim}, {pb.dim}, metric {metric.dim}")
    return pa, pb


def _log_ratio(s, t):
    # |log(t/s)| evaluated on the ordered pair so that swapping is bit-exact
    lo, hi = (s, t) if s <= t else (t, s)
    return float(np.log(hi / lo))


def distance(a, b, metric):
    """Closed-form geodesic distance between ``a`` and ``b``.

    ``a`` and ``b`` may be :class:`ManifoldPoint` instances or raw coordinate
    vectors, in which case the chart implied by ``metric`` is used.
    """
    pa, pb = _coerce_pair(a, b, metric)
    x, y = pa.coords, pb.coords
    if pa.chart == "euclidean":
        return float(np.linalg.norm(x - y))
    if pa.chart == "positive-scalar":
        return _log_ratio(x[0], y[0])
    if pa.chart == "affine-line":
        return float(np.sqrt(AFFINE_LINE_METRIC) * abs(x[0] - y[0]))
    dz = x[:-1] - y[:-1]
    dlog = _log_ratio(x[-1], y[-1])
    return float(np.sqrt(dz @ dz + dlog * dlog))


def is_adjacent(a, b, metric, zeta):
    """True iff the pair is zeta-adjacent, i.e. distance(a, b) <= zeta."""
    if zeta < 0:
        raise ValueError("zeta must be nonnegative")
    return distance(a, b, metric) <= zeta


def geodesic(a, b, metric, count):
    """Sampled minimizing geodesic between two points of a built-in chart."""
    pa, pb = _coerce_pair(a, b, metric)
    s = np.linspace(0.0, 1.0, int(count))[:, None]
    x, y = pa.coords, pb.coords
    if pa.chart == "positive-scalar":
        samples = x * (y / x) ** s
    elif pa.chart == "augmented":
        z = (1.0 - s) * x[:-1] + s * y[:-1]
        theta = x[-1] * (y[-1] / x[-1]) ** s
        samples = np.hstack([z, theta])
    else:
        samples = (1.0 - s) * x + s * y
    return PathCurve(samples, pa.chart)


def sphere_points(center, metric, zeta, n_samples, rng):
    """Points at geodesic distance exactly ``zeta`` from ``center``.

    Euclidean and augmented charts draw uniformly distributed directions
    (normalised Gaussians, in log-theta coordinates for the augmented chart);
    the one-dimensional charts return their two boundary points.
    """
    if zeta < 0:
        raise ValueError("zeta must be nonnegative")
    chart = _KIND_TO_CHART.get(metric.kind)
    if chart is None:
        raise UnsupportedChartError(f"no ball sampler for metric kind {metric.kind!r}")
    c = center if isinstance(center, ManifoldPoint) else ManifoldPoint(center, chart)
    x = c.coords
    if chart == "positive-scalar":
        return [ManifoldPoint([x[0] * np.exp(s * zeta)], chart) for s in (-1.0, 1.0)]
    if chart == "affine-line":
        step = zeta / np.sqrt(AFFINE_LINE_METRIC)
        return [ManifoldPoint([x[0] + s * step], chart) for s in (-1.0, 1.0)]
    dirs = rng.standard_normal((int(n_samples), x.size))
    norms = np.linalg.norm(dirs, axis=1, keepdims=True)
    dirs = dirs / np.where(norms == 0.0, 1.0, norms)
    if chart == "euclidean":
        return [ManifoldPoint(x + zeta * d, chart) for d in dirs]
    out = []
    for d in dirs:
        coords = np.concatenate([x[:-1] + zeta * d[:-1], [x[-1] * np.exp(zeta * d[-1])]])
        out.append(ManifoldPoint(coords, chart))
    return out
