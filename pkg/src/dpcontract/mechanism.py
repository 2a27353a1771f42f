"""Laplace noise schedules: budgets, calibration and seeded sampling.

Calibration is tight by default: b_k = lambda_k alpha(zeta) / (eps_k - eps_{k-1}),
optionally multiplied by a safety factor >= 1.
"""

import math
from dataclasses import dataclass

import numpy as np

from .contraction import theorem3_beta
from .exceptions import ScheduleError


def _zigzag(k):
    # map a possibly negative step index onto the nonnegative integers
    return 2 * k if k >= 0 else -2 * k - 1


class EpsilonSchedule:
    """Cumulative privacy budget eps_k for k = k0 .. k0 + len - 1.

    Stored as increments eps_k - eps_{k-1} with eps_{k0-1} = 0, so the
    per-step budget of late steps does not suffer from cancellation.
    """

    def __init__(self, increments, k0=0):
        inc = np.asarray(increments, dtype=np.float64).ravel()
        if inc.size == 0:
            raise ScheduleError("empty epsilon schedule")
        if not np.all(np.isfinite(inc)):
            raise ScheduleError("epsilon schedule has non-finite entries")
        bad = np.flatnonzero(inc < 0)
        if bad.size:
            raise ScheduleError(f"epsilon schedule decreases at step k={k0 + int(bad[0])}")
        self.k0 = int(k0)
        self.increments = inc
        self.increments.setflags(write=False)
        self.values = np.cumsum(inc)
        self.values.setflags(write=False)

    @classmethod
    def from_values(cls, values, k0=0):
        values = np.asarray(values, dtype=np.float64).ravel()
        return cls(np.diff(values, prepend=0.0), k0)

    @classmethod
    def geometric(cls, c, q, horizon, k0=0):
        """eps_k = c * sum_{i=k0}^{k} q^{i-k0}."""
        if c <= 0 or q <= 0:
            raise ScheduleError("geometric schedule needs c > 0 and q > 0")
        return cls(c * q ** np.arange(horizon + 1, dtype=np.float64), k0)

    def __len__(self):
        return self.increments.size

    @property
    def horizon(self):
        return len(self) - 1

    @property
    def steps(self):
        return np.arange(self.k0, self.k0 + len(self))

    def _index(self, k):
        j = k - self.k0
        if j < 0 or j >= len(self):
            raise ScheduleError(f"epsilon schedule does not cover k={k}")
        return j

    def eps(self, k):
        if k == self.k0 - 1:
            return 0.0
        return float(self.values[self._index(k)])

    def increment(self, k):
        return float(self.increments[self._index(k)])

    def covers(self, k0, horizon):
        return k0 >= self.k0 and k0 + horizon < self.k0 + len(self)

    def window(self, k0, horizon):
        """Cumulative values eps_k for k in [k0, k0 + horizon]."""
        if not self.covers(k0, horizon):
            raise ScheduleError(f"epsilon schedule does not cover [{k0}, {k0 + horizon}]")
        return self.values[k0 - self.k0 : k0 - self.k0 + horizon + 1]


class NoiseSchedule:
    """Per-step Laplace diversities b_k for k = k0 .. k0 + len - 1."""

    def __init__(self, diversities, k0=0):
        b = np.asarray(diversities, dtype=np.float64).ravel()
        if b.size == 0:
            raise ScheduleError("empty noise schedule")
        bad = np.flatnonzero(~(np.isfinite(b) & (b > 0)))
        if bad.size:
            raise ScheduleError(f"diversity b_k must be positive and finite (k={k0 + int(bad[0])}, b={b[bad[0]]})")
        self.k0 = int(k0)
        self.diversities = b
        self.diversities.setflags(write=False)

    @classmethod
    def constant(cls, b, horizon, k0=0):
        return cls(np.full(horizon + 1, float(b)), k0)

    def __len__(self):
        return self.diversities.size

    @property
    def horizon(self):
        return len(self) - 1

    @property
    def steps(self):
        return np.arange(self.k0, self.k0 + len(self))

    def b(self, k):
        j = k - self.k0
        if j < 0 or j >= len(self):
            raise ScheduleError(f"noise schedule does not cover k={k}")
        return float(self.diversities[j])

    def window(self, k0, horizon):
        if k0 < self.k0 or k0 + horizon >= self.k0 + len(self):
            raise ScheduleError(f"noise schedule does not cover [{k0}, {k0 + horizon}]")
        return self.diversities[k0 - self.k0 : k0 - self.k0 + horizon + 1]

    def scaled(self, factor):
        return NoiseSchedule(self.diversities * factor, self.k0)


def _lambda_values(lambda_schedule, k0, horizon):
    if callable(lambda_schedule):
        return np.array([float(lambda_schedule(k)) for k in range(k0, k0 + horizon + 1)])
    lam = np.asarray(lambda_schedule, dtype=np.float64).ravel()
    if lam.size < horizon + 1:
        raise ScheduleError(f"lambda schedule has {lam.size} entries, need {horizon + 1}")
    return lam[: horizon + 1]


def design_noise(lambda_schedule, alpha_of_zeta, eps, horizon=None, safety=1.0):
    """b_k = safety * lambda_k * alpha(zeta) / (eps_k - eps_{k-1}).

    ``lambda_schedule`` is either a callable k -> lambda_k or an array indexed
    from ``eps.k0``.
    """
    if safety < 1:
        raise ValueError("safety multiplier must be >= 1")
    horizon = eps.horizon if horizon is None else horizon
    k0 = eps.k0
    if not eps.covers(k0, horizon):
        raise ScheduleError(f"epsilon schedule does not cover [{k0}, {k0 + horizon}]")
    inc = eps.increments[: horizon + 1]
    flat = np.flatnonzero(inc <= 0)
    if flat.size:
        raise ScheduleError(f"epsilon must increase strictly; it does not at step k={k0 + int(flat[0])}")
    lam = _lambda_values(lambda_schedule, k0, horizon)
    if np.any(lam <= 0):
        raise ScheduleError("lambda_k must be positive")
    if not alpha_of_zeta > 0:
        raise ScheduleError(f"alpha(zeta) must be positive, got {alpha_of_zeta}")
    return NoiseSchedule(safety * lam * alpha_of_zeta / inc, k0)


def design_noise_exponential(c_bar, lambda_bar, alpha_of_zeta, c, q, k0=0, horizon=50):
    """Noise for lambda_k = c_bar lambda_bar^{k-k0} and eps_k = c sum q^{i-k0}.

    Returns (noise, eps) with b_k = c_bar alpha lambda_bar^{k-k0} / (c q^{k-k0}).
    Choosing c = eps_total (1 - q) keeps eps_k below eps_total forever.
    """
    if not 0 < lambda_bar < 1:
        raise ValueError(f"lambda_bar must lie in (0, 1), got {lambda_bar}")
    if not lambda_bar <= q < 1:
        raise ValueError(f"q must lie in [lambda_bar, 1) = [{lambda_bar}, 1), got {q}")
    if c <= 0 or c_bar <= 0:
        raise ValueError("c and c_bar must be positive")
    eps = EpsilonSchedule.geometric(c, q, horizon, k0)
    lam = c_bar * lambda_bar ** np.arange(horizon + 1, dtype=np.float64)
    return design_noise(lam, alpha_of_zeta, eps, horizon), eps


def finite_budget_rate(eps_total, q):
    """The c giving sup_k eps_k = eps_total for a geometric schedule of ratio q."""
    return eps_total * (1.0 - q)


def theorem3_alpha(n, lam, lam_bar, mu, theta_bar, zeta):
    """alpha(zeta) = zeta sqrt(n) max(theta_bar beta, 1)."""
    beta = theorem3_beta(lam, lam_bar, mu)
    return zeta * math.sqrt(n) * max(theta_bar * beta, 1.0)


def design_noise_theorem3(n, lam, lam_bar, mu, theta_bar, zeta, eps, horizon=None, safety=1.0):
    """b_k = lam_bar^{k-k0} zeta sqrt(n) max(theta_bar beta, 1) / (eps_k - eps_{k-1})."""
    if zeta <= 0:
        raise ScheduleError("zeta must be positive (b_k = 0 is not a Laplace mechanism)")
    alpha = theorem3_alpha(n, lam, lam_bar, mu, theta_bar, zeta)
    k0 = eps.k0
    return design_noise(lambda k: lam_bar ** (k - k0), alpha, eps, horizon, safety)


def consensus_noise(zeta, eps_total, a_row_sum):
    """Constant diversity sqrt(2) zeta / (eps sum_j a_ij) of the consensus agent."""
    if not 0 < a_row_sum < 1:
        raise ValueError(f"row sum of consensus weights must lie in (0, 1), got {a_row_sum}")
    if zeta <= 0 or eps_total <= 0:
        raise ValueError("zeta and eps must be positive")
    return math.sqrt(2.0) * zeta / (eps_total * a_row_sum)


# ---------------------------------------------------------------------------
# Laplace distribution and sampling
# ---------------------------------------------------------------------------

def laplace_cdf(t, a=0.0, b=1.0):
    """CDF of Lap(a, b)."""
    z = (np.asarray(t, dtype=np.float64) - a) / b
    with np.errstate(over="ignore"):
        return np.where(z < 0, 0.5 * np.exp(np.minimum(z, 0.0)), 1.0 - 0.5 * np.exp(-np.maximum(z, 0.0)))


def laplace_inverse_cdf(u, b=1.0, a=0.0):
    """v = a - b sign(u - 1/2) log(1 - 2|u - 1/2|), for u in (0, 1)."""
    d = np.asarray(u, dtype=np.float64) - 0.5
    return a - b * np.sign(d) * np.log1p(-2.0 * np.abs(d))


@dataclass(frozen=True)
class LaplaceSampler:
    """Seeded Laplace noise source with one independent substream per step.

    The draws for step k depend only on (seed, stream, k), never on the
    horizon or on which other steps were sampled. Distinct ``stream``
    indices give independent samplers for parallel work.
    """

    seed: int
    noise: NoiseSchedule
    location: float = 0.0
    stream: int = 0

    def generator(self, k):
        seq = np.random.SeedSequence(self.seed & 0xFFFFFFFFFFFFFFFF, spawn_key=(self.stream, _zigzag(int(k))))
        return np.random.Generator(np.random.PCG64(seq))

    def uniforms(self, k, size):
        rng = self.generator(k)
        u = rng.random(size)
        # rng.random is on [0, 1); redraw the (rare) exact zeros
        while True:
            zero = u == 0.0
            if not zero.any():
                return u
            u[zero] = rng.random(int(zero.sum()))

    def sample(self, k, m):
        return laplace_inverse_cdf(self.uniforms(k, m), self.noise.b(k), self.location)

    def clone(self, stream):
        return LaplaceSampler(self.seed, self.noise, self.location, stream)


def sample_laplace(sampler, k, m):
    """m i.i.d. Lap(location, b_k) draws for step k."""
    return sampler.sample(k, m)
