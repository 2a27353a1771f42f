"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time. Set ``DPCONTRACT_DISABLE_NUMBA=1``
(or numba's own ``NUMBA_DISABLE_JIT=1``) to force the numpy path. Both
implementations are always importable as ``numpy_<name>`` / ``numba_<name>``
so the benchmark and the tests can compare them directly.

``DP_CONTRACT_THREADS`` caps the number of threads used by parallel kernels.
"""

import os

import numpy as np
_LN2 = float(np.log(2.0))

_FALSY = ("", "0", "false", "no", "off")


def _flag(name):
    return os.environ.get(name, "0").strip().lower() not in _FALSY


def thread_cap():
    """Return the thread cap from ``DP_CONTRACT_THREADS`` (None when unset)."""
    raw = os.environ.get("DP_CONTRACT_THREADS", "").strip()
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        return None
    return max(1, value)


try:
    import numba

    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the bundled TBB is usually too old; skip it without a warning
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional extra
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not (_flag("DPCONTRACT_DISABLE_NUMBA") or _flag("NUMBA_DISABLE_JIT"))
BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def numpy_min_eigvalsh(stack):
    """Smallest eigenvalue of each symmetric matrix in an (N, d, d) stack."""
    stack = np.asarray(stack, dtype=np.float64)
    if stack.shape[0] == 0:
        return np.empty(0)
    return np.linalg.eigvalsh(stack)[:, 0]


def numpy_quadform_length(deltas, mats):
    """Sum over j of sqrt(deltas[j]^T mats[j] deltas[j])."""
    q = np.einsum("ij,ijk,ik->i", deltas, mats, deltas)
    return float(np.sqrt(np.maximum(q, 0.0)).sum())


def _log1mexp(d):
    """log(1 - e^d) for d <= 0, switching branches at -log 2 to avoid cancellation."""
    d = np.asarray(d, dtype=np.float64)
    near = d > -_LN2
    return np.where(near, np.log(-np.expm1(np.where(near, d, -1.0))), np.log1p(-np.exp(np.where(near, -1.0, d))))


def numpy_laplace_log_interval_mass(lo, hi, center, b):
    """Elementwise log P(lo <= center + Lap(0, b) <= hi).

    Each branch is evaluated on the side of the median where it does not
    cancel, so far-tail masses keep full relative precision.
    """
    lo, hi, center, b = np.broadcast_arrays(
        np.asarray(lo, dtype=np.float64),
        np.asarray(hi, dtype=np.float64),
        np.asarray(center, dtype=np.float64),
        np.asarray(b, dtype=np.float64),
    )
    s = (lo - center) / b
    t = (hi - center) / b
    # negative width taken directly so narrow intervals keep precision
    w = (lo - hi) / b
    out = np.empty(s.shape)
    left = t <= 0.0
    right = s >= 0.0
    mid = ~(left | right)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        # both ends below the median: 0.5 * (e^t - e^s)
        tl = t[left]
        out[left] = np.log(0.5) + tl + _log1mexp(w[left])
        # both ends above: 0.5 * (e^-s - e^-t)
        sr = s[right]
        out[right] = np.log(0.5) - sr + _log1mexp(w[right])
        # straddling the median: 1 - 0.5 e^s - 0.5 e^-t
        tm, sm = t[mid], s[mid]
        out[mid] = np.log1p(-0.5 * np.exp(sm) - 0.5 * np.exp(-tm))
    # empty intervals have zero mass
    out[s == t] = -np.inf
    return out


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAVE_NUMBA:
    _LOG_HALF = float(np.log(0.5))

    @numba.njit(cache=False)
    def _nb_min_eig_2x2(a, b, d):
        m = 0.5 * (a + d)
        r = np.hypot(0.5 * (a - d), b)
        if m <= 0.0:
            return m - r
        # the small root via det / large root avoids cancellation in m - r
        return (a * d - b * b) / (m + r)

    @numba.njit(parallel=True, cache=False)
    def _nb_min_eigvalsh(stack):
        n, d = stack.shape[0], stack.shape[1]
        out = np.empty(n)
        if d == 2:
            for i in numba.prange(n):
                off = 0.5 * (stack[i, 0, 1] + stack[i, 1, 0])
                out[i] = _nb_min_eig_2x2(stack[i, 0, 0], off, stack[i, 1, 1])
            return out
        for i in numba.prange(n):
            w = np.linalg.eigvalsh(stack[i])
            out[i] = w[0]
        return out

    @numba.njit(cache=False)
    def _nb_quadform_length(deltas, mats):
        total = 0.0
        n, d = deltas.shape
        for j in range(n):
            q = 0.0
            for a in range(d):
                row = 0.0
                for c in range(d):
                    row += mats[j, a, c] * deltas[j, c]
                q += deltas[j, a] * row
            if q > 0.0:
                total += np.sqrt(q)
        return total

    @numba.njit(cache=False)
    def _nb_log1mexp(d):
        if d > -_LN2:
            return np.log(-np.expm1(d))
        return np.log1p(-np.exp(d))

    @numba.njit(cache=False)
    def _nb_log_interval_mass(lo, hi, center, b):
        n = lo.shape[0]
        out = np.empty(n)
        for i in range(n):
            s = (lo[i] - center[i]) / b[i]
            t = (hi[i] - center[i]) / b[i]
            if s == t:
                out[i] = -np.inf
            elif t <= 0.0:
                out[i] = _LOG_HALF + t + _nb_log1mexp((lo[i] - hi[i]) / b[i])
            elif s >= 0.0:
                out[i] = _LOG_HALF - s + _nb_log1mexp((lo[i] - hi[i]) / b[i])
            else:
                out[i] = np.log1p(-0.5 * np.exp(s) - 0.5 * np.exp(-t))
        return out

    def numba_min_eigvalsh(stack):
        stack = np.ascontiguousarray(stack, dtype=np.float64)
        if stack.shape[0] == 0:
            return np.empty(0)
        cap = thread_cap()
        if cap is not None:
            numba.set_num_threads(min(cap, numba.config.NUMBA_NUM_THREADS))
        return _nb_min_eigvalsh(stack)

    def numba_quadform_length(deltas, mats):
        return float(
            _nb_quadform_length(
                np.ascontiguousarray(deltas, dtype=np.float64),
                np.ascontiguousarray(mats, dtype=np.float64),
            )
        )

    def numba_laplace_log_interval_mass(lo, hi, center, b):
        arrays = np.broadcast_arrays(
            np.asarray(lo, dtype=np.float64),
            np.asarray(hi, dtype=np.float64),
            np.asarray(center, dtype=np.float64),
            np.asarray(b, dtype=np.float64),
        )
        shape = arrays[0].shape
        flat = [np.ascontiguousarray(a).ravel() for a in arrays]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return _nb_log_interval_mass(*flat).reshape(shape)


if USE_NUMBA:
    min_eigvalsh = numba_min_eigvalsh
    quadform_length = numba_quadform_length
    laplace_log_interval_mass = numba_laplace_log_interval_mass
else:
    min_eigvalsh = numpy_min_eigvalsh
    quadform_length = numpy_quadform_length
    laplace_log_interval_mass = numpy_laplace_log_interval_mass
