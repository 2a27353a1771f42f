"""Exact privacy auditing of the additive Laplace output mechanism.

For y_k = h_k(phi_k(x)) + Lap(0, b_k) noise on every output coordinate, the
supremum over measurable sets of log P(y in S | x) / P(y in S | x') equals

    L_k = sum_{i=k0}^{k} |h_i(phi_i(x)) - h_i(phi_i(x'))|_1 / b_i,

so L_k is computed exactly by simulation and summation. Box-shaped sets are
additionally evaluated in closed form through the Laplace CDF.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _accel
from .dynamics import output_deviation, simulate
from .exceptions import DimensionError, ScheduleError
from .geometry import sphere_points

BUDGET_RTOL = 1e-9


def composition_loss(dy_l1, b):
    """Per-step losses |dy_i|_1 / b_i and their running sum L_k."""
    dy_l1 = np.asarray(dy_l1, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if dy_l1.shape != b.shape:
        raise DimensionError(f"{dy_l1.shape} output gaps for {b.shape} diversities")
    if np.any(b <= 0):
        raise ScheduleError("diversities must be positive")
    per_step = dy_l1 / b
    return per_step, np.cumsum(per_step)


@dataclass
class PrivacyAuditReport:
    """Per-step and cumulative privacy loss of one (or the worst) adjacent pair."""

    k0: int
    per_step_loss: np.ndarray
    cumulative_loss: np.ndarray
    budget: Optional[np.ndarray]
    satisfied: bool
    worst_pair: tuple
    pairs_evaluated: int = 1
    extras: dict = field(default_factory=dict)

    @property
    def steps(self):
        return np.arange(self.k0, self.k0 + len(self.cumulative_loss))

    @property
    def slack(self):
        """eps_k - L_k per step (None without a budget)."""
        if self.budget is None:
            return None
        return self.budget - self.cumulative_loss

    @property
    def margin(self):
        """Smallest slack over the horizon."""
        s = self.slack
        return None if s is None else float(s.min())

    def rows(self):
        slack = self.slack
        for j, k in enumerate(self.steps):
            yield {
                "k": int(k),
                "per_step_loss": float(self.per_step_loss[j]),
                "cumulative_loss": float(self.cumulative_loss[j]),
                "eps_k": None if self.budget is None else float(self.budget[j]),
                "slack": None if slack is None else float(slack[j]),
            }

    def to_dict(self):
        xa, xb, k, loss = self.worst_pair
        return {
            "k0": self.k0,
            "horizon": len(self.cumulative_loss) - 1,
            "satisfied": self.satisfied,
            "margin": self.margin,
            "pairs_evaluated": self.pairs_evaluated,
            "final_loss": float(self.cumulative_loss[-1]),
            "worst_pair": {"xa": [float(v) for v in xa], "xb": [float(v) for v in xb], "k": int(k), "loss": float(loss)},
            **self.extras,
        }


def _coords(x):
    return np.atleast_1d(np.asarray(getattr(x, "coords", x), dtype=np.float64))


def _report(xa, xb, k0, per_step, cumulative, budget):
    if budget is not None:
        ok = cumulative <= budget * (1 + BUDGET_RTOL)
        satisfied = bool(np.all(ok))
        j = int(np.argmin(budget - cumulative))
    else:
        satisfied = True
        j = len(cumulative) - 1
    return PrivacyAuditReport(
        k0=k0,
        per_step_loss=per_step,
        cumulative_loss=cumulative,
        budget=budget,
        satisfied=satisfied,
        worst_pair=(tuple(_coords(xa)), tuple(_coords(xb)), k0 + j, float(cumulative[j])),
    )


def privacy_loss(model, xa, xb, noise, k0=0, horizon=None, eps=None):
    """Exact cumulative privacy loss L_k of the pair (xa, xb) over [k0, k0 + horizon].

    With an epsilon schedule, ``satisfied`` reports whether L_k <= eps_k
    (relative tolerance 1e-9) at every step.
    """
    horizon = noise.horizon - (k0 - noise.k0) if horizon is None else horizon
    b = noise.window(k0, horizon)
    dy = output_deviation(model, _coords(xa), _coords(xb), k0, horizon)
    per_step, cumulative = composition_loss(dy, b)
    budget = None if eps is None else np.array(eps.window(k0, horizon))
    return _report(xa, xb, k0, per_step, cumulative, budget)


# ---------------------------------------------------------------------------
# box-shaped sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoxSet:
    """Product of per-step, per-coordinate intervals [lo, hi] (infinite ends allowed)."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_2d(np.asarray(self.lo, dtype=np.float64))
        hi = np.atleast_2d(np.asarray(self.hi, dtype=np.float64))
        if lo.shape != hi.shape:
            raise DimensionError(f"interval bounds differ in shape: {lo.shape} vs {hi.shape}")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
            raise ValueError("malformed interval: need lo <= hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def everything(cls, steps, m):
        return cls(np.full((steps, m), -np.inf), np.full((steps, m), np.inf))

    @classmethod
    def upper_half_lines(cls, thresholds):
        """Set {y : y_i >= thresholds_i} for each step/coordinate."""
        t = np.atleast_2d(np.asarray(thresholds, dtype=np.float64))
        return cls(t, np.full(t.shape, np.inf))

    @classmethod
    def lower_half_lines(cls, thresholds):
        t = np.atleast_2d(np.asarray(thresholds, dtype=np.float64))
        return cls(np.full(t.shape, -np.inf), t)

    @property
    def steps(self):
        return self.lo.shape[0]

    @property
    def dim(self):
        return self.lo.shape[1]


def log_box_probability(center_outputs, b, box):
    """log P(center + Lap noise in box) with per-step diversities ``b``."""
    centers = np.atleast_2d(np.asarray(center_outputs, dtype=np.float64))
    b = np.asarray(b, dtype=np.float64).ravel()
    if centers.shape != box.lo.shape:
        raise DimensionError(f"box of shape {box.lo.shape} for outputs of shape {centers.shape}")
    if b.size != centers.shape[0]:
        raise DimensionError(f"{b.size} diversities for {centers.shape[0]} steps")
    scale = np.broadcast_to(b[:, None], centers.shape)
    return float(_accel.laplace_log_interval_mass(box.lo, box.hi, centers, scale).sum())


def box_probability(center_outputs, noise, box, k0=None):
    """Exact probability that the noisy outputs fall in ``box``.

    ``center_outputs`` are the noiseless outputs for steps k0, k0+1, ...
    (k0 defaults to the first step of ``noise``).
    """
    k0 = noise.k0 if k0 is None else k0
    b = noise.window(k0, box.steps - 1)
    return float(np.exp(log_box_probability(center_outputs, b, box)))


@dataclass
class BoxAuditResult:
    passed: bool
    worst_log_ratio: float
    log_ratios: list
    budgets: list
    composition_bounds: list

    @property
    def dominated(self):
        """True when every box log-ratio is at most the composition bound L_k."""
        return all(r <= L + 1e-9 for r, L in zip(self.log_ratios, self.composition_bounds))


def verify_dp_on_boxes(model, xa, xb, noise, eps, sets, k0=0, horizon=None):
    """Check |log P(y in S | xa) - log P(y in S | xb)| <= eps_k on every box.

    A box spanning T steps is compared with eps_{k0+T-1}. Zero-probability
    denominators give an infinite ratio. Also records the composition bound
    L_{k0+T-1} for each box, which must dominate the box ratio.
    """
    horizon = noise.horizon - (k0 - noise.k0) if horizon is None else horizon
    ya = simulate(model, _coords(xa), k0, horizon).outputs
    yb = simulate(model, _coords(xb), k0, horizon).outputs
    b = noise.window(k0, horizon)
    _, L = composition_loss(np.abs(ya - yb).sum(axis=1), b)
    ratios, budgets, bounds = [], [], []
    for box in sets:
        T = box.steps
        if T > horizon + 1:
            raise DimensionError(f"box spans {T} steps, horizon covers {horizon + 1}")
        la = log_box_probability(ya[:T], b[:T], box)
        lb = log_box_probability(yb[:T], b[:T], box)
        if la == -np.inf and lb == -np.inf:
            r = 0.0
        elif la == -np.inf or lb == -np.inf:
            r = np.inf
        else:
            r = abs(la - lb)
        ratios.append(float(r))
        budgets.append(eps.eps(k0 + T - 1))
        bounds.append(float(L[T - 1]))
    passed = all(r <= e * (1 + 1e-9) for r, e in zip(ratios, budgets))
    worst = max(ratios) if ratios else 0.0
    return BoxAuditResult(passed, worst, ratios, budgets, bounds)


def monte_carlo_box_probability(center_outputs, noise, box, n_samples, seed, k0=None):
    """Monte Carlo estimate of :func:`box_probability` with its standard error."""
    from .mechanism import LaplaceSampler

    k0 = noise.k0 if k0 is None else k0
    centers = np.atleast_2d(np.asarray(center_outputs, dtype=np.float64))
    sampler = LaplaceSampler(seed, noise)
    inside = np.ones(n_samples, dtype=bool)
    for j in range(box.steps):
        k = k0 + j
        draws = sampler.sample(k, n_samples * box.dim).reshape(n_samples, box.dim) + centers[j]
        inside &= np.all((draws >= box.lo[j]) & (draws <= box.hi[j]), axis=1)
    p = inside.mean()
    return float(p), float(np.sqrt(max(p * (1 - p), 1e-300) / n_samples))


# ---------------------------------------------------------------------------
# worst-pair search
# ---------------------------------------------------------------------------

def _severity(report):
    if report.budget is not None:
        return float(np.max(report.cumulative_loss - report.budget))
    return float(report.cumulative_loss[-1])


def worst_pair_search(model, metric, center, zeta, noise, eps=None, k0=0, horizon=None, n_samples=64, seed=0):
    """Audit the center against points on the geodesic sphere of radius ``zeta``.

    Returns the report of the pair with the least budget slack (or the
    largest final loss when no budget is given). Ties are broken by the
    lexicographic order of the partner coordinates, so the result does not
    depend on evaluation order.
    """
    horizon = noise.horizon - (k0 - noise.k0) if horizon is None else horizon
    c = _coords(center)
    if zeta == 0:
        partners = [c]
    else:
        rng = np.random.default_rng(seed)
        partners = [p.coords for p in sphere_points(center, metric, zeta, n_samples, rng)]
    reports = [privacy_loss(model, c, p, noise, k0, horizon, eps) for p in partners]
    order = sorted(range(len(reports)), key=lambda i: (-_severity(reports[i]), tuple(partners[i])))
    worst = reports[order[0]]
    worst.pairs_evaluated = len(reports)
    worst.satisfied = all(r.satisfied for r in reports)
    return worst

