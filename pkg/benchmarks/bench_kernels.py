"""Compare the numba and numpy implementations of the hot kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--size 50000]

Reports the best wall time of each backend and checks that both agree.
"""

import argparse
import time

import numpy as np

from dpcontract import _accel


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(size, rng):
    G = rng.standard_normal((size, 2, 2))
    stack = G @ G.transpose(0, 2, 1) - np.eye(2)
    deltas = rng.standard_normal((size, 3))
    H = rng.standard_normal((size, 3, 3))
    mats = H @ H.transpose(0, 2, 1)
    center = rng.normal(scale=5.0, size=size)
    lo = rng.normal(scale=5.0, size=size)
    hi = lo + rng.exponential(2.0, size=size)
    b = rng.uniform(0.1, 3.0, size=size)
    return {
        "min_eigvalsh": (stack,),
        "quadform_length": (deltas, mats),
        "laplace_log_interval_mass": (lo, hi, center, b),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=50_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if not _accel.HAVE_NUMBA:
        print("numba is not installed; only the numpy backend is available")
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<28}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}  agree")
    for name, inputs in cases(args.size, rng).items():
        np_fn = getattr(_accel, f"numpy_{name}")
        nb_fn = getattr(_accel, f"numba_{name}")
        nb_fn(*(x[:4] for x in inputs))  # jit warm-up
        t_np, out_np = best_of(lambda: np_fn(*inputs), args.repeat)
        t_nb, out_nb = best_of(lambda: nb_fn(*inputs), args.repeat)
        agree = np.allclose(out_np, out_nb, rtol=1e-10, atol=1e-12)
        print(f"{name:<28}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>9.1f}x  {agree}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
