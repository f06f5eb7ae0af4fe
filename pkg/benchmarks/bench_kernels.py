"""Time the compiled kernels against the pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

Workloads follow the default experiment shape: a 3000-sample trace, a
q=1 training set (1501 points) and 50 hidden neurons.
"""

import argparse
import time

import numpy as np

from chanpred import kernels
from chanpred._backend import HAVE_NUMBA


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads():
    rng = np.random.default_rng(0)
    x = np.sort(rng.uniform(0.1, 0.9, 1501))
    t = rng.uniform(0.1, 0.9, 1501)
    w, v = rng.uniform(-0.5, 0.5, 50), rng.uniform(-0.5, 0.5, 50)
    pl = 100 + 6 * rng.standard_normal(3000)
    centers = rng.choice(x, 50, replace=False)
    return {
        "bpn_train (100 epochs)": ("_bpn_train", (x, t, w, v, 1e-6, 1e-5, 100)),
        "window_mean (W=19)": ("_window_mean", (pl, 9)),
        "kmeans_lloyd (k=50)": ("_kmeans_lloyd", (x, centers, 100)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba is not installed; only the numpy path is timed")

    print(f"{'kernel':<26}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name, (stem, call_args) in workloads().items():
        t_np = best_of(getattr(kernels, stem + "_numpy"), call_args, args.repeat)
        if HAVE_NUMBA:
            jitted = getattr(kernels, stem + "_jit")
            jitted(*call_args)  # compile outside the timing
            t_nb = best_of(jitted, call_args, args.repeat)
            print(f"{name:<26}{t_nb:12.5f}{t_np:12.5f}{t_np / t_nb:10.1f}x")
        else:
            print(f"{name:<26}{'-':>12}{t_np:12.5f}{'-':>10}")


if __name__ == "__main__":
    main()
