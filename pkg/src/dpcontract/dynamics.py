"""Deterministic time-varying discrete-time systems x_{k+1} = f_k(x_k), y_k = h_k(x_k)."""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .exceptions import DimensionError, DivergenceError

DIVERGENCE_BOUND = 1e12
FD_STEP = 1e-6

Map = Callable[[int, np.ndarray], np.ndarray]


def central_difference(fun, k, x, out_dim):
    """Jacobian of ``fun(k, .)`` at ``x`` by central differences.

    The step for coordinate i is FD_STEP * max(1, |x_i|).
    """
    x = np.asarray(x, dtype=np.float64)
    jac = np.empty((out_dim, x.size))
    for i in range(x.size):
        h = FD_STEP * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        jac[:, i] = (np.asarray(fun(k, xp), dtype=np.float64) - np.asarray(fun(k, xm), dtype=np.float64)) / (2 * h)
    return jac


@dataclass(frozen=True)
class SystemModel:
    """Maps f_k and h_k of a discrete-time system, optionally with Jacobians.

    Missing Jacobians are replaced by central finite differences.
    """

    state_dim: int
    output_dim: int
    step: Map
    observe: Map
    jac_f: Optional[Map] = None
    jac_h: Optional[Map] = None
    name: str = "model"

    @property
    def jacobian_mode(self):
        if self.jac_f is not None and self.jac_h is not None:
            return "analytic"
        return "finite-difference"

    def f(self, k, x):
        out = np.atleast_1d(np.asarray(self.step(k, x), dtype=np.float64))
        if out.shape != (self.state_dim,):
            raise DimensionError(f"{self.name}: step returned shape {out.shape}, expected ({self.state_dim},)")
        return out

    def h(self, k, x):
        out = np.atleast_1d(np.asarray(self.observe(k, x), dtype=np.float64))
        if out.shape != (self.output_dim,):
            raise DimensionError(f"{self.name}: observe returned shape {out.shape}, expected ({self.output_dim},)")
        return out

    def df(self, k, x):
        if self.jac_f is not None:
            return np.atleast_2d(np.asarray(self.jac_f(k, x), dtype=np.float64))
        return central_difference(self.f, k, x, self.state_dim)

    def dh(self, k, x):
        if self.jac_h is not None:
            return np.atleast_2d(np.asarray(self.jac_h(k, x), dtype=np.float64))
        return central_difference(self.h, k, x, self.output_dim)

    def finite_difference(self):
        """Copy of this model with analytic Jacobians dropped."""
        return SystemModel(self.state_dim, self.output_dim, self.step, self.observe, name=self.name + "[fd]")


@dataclass(frozen=True)
class Trajectory:
    """States x_{k0..k0+H} and noiseless outputs h_k(x_k) of one run."""

    k0: int
    states: np.ndarray
    outputs: np.ndarray

    @property
    def steps(self):
        return np.arange(self.k0, self.k0 + len(self.states))

    def __len__(self):
        return len(self.states)


def _check_state(model, x, k):
    if x.shape != (model.state_dim,):
        raise DimensionError(f"{model.name}: state has shape {x.shape}, expected ({model.state_dim},)")
    if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > DIVERGENCE_BOUND:
        raise DivergenceError(k)


def simulate(model, x0, k0=0, horizon=1):
    """Run the recursion for ``horizon`` steps starting from ``x0`` at time ``k0``."""
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    x = np.atleast_1d(np.asarray(x0, dtype=np.float64)).copy()
    _check_state(model, x, k0)
    states = np.empty((horizon + 1, model.state_dim))
    outputs = np.empty((horizon + 1, model.output_dim))
    for j in range(horizon + 1):
        k = k0 + j
        states[j] = x
        outputs[j] = model.h(k, x)
        if j < horizon:
            x = model.f(k, x)
            _check_state(model, x, k + 1)
    return Trajectory(k0, states, outputs)


def output_deviation(model, xa, xb, k0=0, horizon=1):
    """l1 output gap |h_k(phi_k(xa)) - h_k(phi_k(xb))|_1 for each step."""
    ta = simulate(model, xa, k0, horizon)
    tb = simulate(model, xb, k0, horizon)
    return np.abs(ta.outputs - tb.outputs).sum(axis=1)


# ---------------------------------------------------------------------------
# built-in models
# ---------------------------------------------------------------------------

def linear_model(A, C=None, name="linear"):
    """x_{k+1} = A x_k, y_k = C x_k (C defaults to the identity)."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    n = A.shape[0]
    C = np.eye(n) if C is None else np.atleast_2d(np.asarray(C, dtype=np.float64))
    if A.shape != (n, n) or C.shape[1] != n:
        raise DimensionError(f"incompatible shapes A{A.shape}, C{C.shape}")
    return SystemModel(
        state_dim=n,
        output_dim=C.shape[0],
        step=lambda k, x: A @ x,
        observe=lambda k, x: C @ x,
        jac_f=lambda k, x: A,
        jac_h=lambda k, x: C,
        name=name,
    )


def scalar_model(gain, name=None):
    """x_{k+1} = gain * x_k, y_k = x_k."""
    return linear_model([[gain]], name=name or f"scalar({gain:g})")


def parameter_model(A_of_theta, dA_dtheta, n, C=None, name="parameter"):
    """Augmented system z_{k+1} = A(theta_k) z_k, theta_{k+1} = theta_k, y_k = C z_k.

    The private parameter theta is carried as the last state coordinate.
    ``dA_dtheta`` may be None, in which case the Jacobian of f is taken by
    finite differences.
    """
    C = np.eye(n) if C is None else np.atleast_2d(np.asarray(C, dtype=np.float64))
    H = np.hstack([C, np.zeros((C.shape[0], 1))])

    def A(theta):
        return np.atleast_2d(np.asarray(A_of_theta(theta), dtype=np.float64))

    def step(k, x):
        z, theta = x[:n], x[n]
        return np.concatenate([A(theta) @ z, [theta]])

    def analytic_jac(k, x):
        z, theta = x[:n], x[n]
        jac = np.zeros((n + 1, n + 1))
        jac[:n, :n] = A(theta)
        jac[:n, n] = np.atleast_2d(np.asarray(dA_dtheta(theta), dtype=np.float64)) @ z
        jac[n, n] = 1.0
        return jac

    jac_f = analytic_jac if dA_dtheta is not None else None

    return SystemModel(
        state_dim=n + 1,
        output_dim=C.shape[0],
        step=step,
        observe=lambda k, x: H @ x,
        jac_f=jac_f,
        jac_h=lambda k, x: H,
        name=name,
    )


def rotation(omega):
    """Planar rotation A_r(omega) = [[cos, sin], [-sin, cos]]."""
    c, s = np.cos(omega), np.sin(omega)
    return np.array([[c, s], [-s, c]])


def rotation_derivative(omega):
    """d A_r / d omega."""
    c, s = np.cos(omega), np.sin(omega)
    return np.array([[-s, c], [-c, -s]])
