"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends run on identical inputs; the script also checks that their
outputs agree before reporting timings. JIT compilation happens in a warm-up
call and is not counted.
"""

import argparse
import time

import numpy as np

from fracpg import _kernels
from fracpg.problem import builtin, random_problem
from fracpg.solver import _sweep_inputs


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    rng = np.random.default_rng(0)
    a = rng.standard_normal(2000)
    b = rng.standard_normal(2000)
    s = np.cos(np.linspace(0, np.pi, 400))
    u = rng.uniform(0, 1, 1000)
    ex1 = _sweep_inputs(builtin("example1", order=130), 124, mp=False)
    rnd = _sweep_inputs(random_problem(3), 400, mp=False)
    return {
        "convolve_trunc n=2000": ("convolve_trunc", (a, b, 2000)),
        "horner deg=1999, 1000 pts": ("horner", (a, u)),
        "jacobi_table n=300, 400 pts": ("jacobi_table", (300, 0.0, 6.0, s)),
        "recurrence_sweep example1 N=130": ("recurrence_sweep", tuple(ex1.values())),
        "recurrence_sweep random N_hat=400": ("recurrence_sweep", tuple(rnd.values())),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _kernels.numba_kernels is None:
        raise SystemExit("numba is not installed; nothing to compare")

    print(f"{'kernel':<36} {'numpy [s]':>11} {'numba [s]':>11} {'speedup':>8}  max|diff|")
    for label, (name, inputs) in cases().items():
        f_np = getattr(_kernels.numpy_kernels, name)
        f_nb = getattr(_kernels.numba_kernels, name)
        ref = f_np(*inputs)
        got = f_nb(*inputs)
        diff = float(np.max(np.abs(np.asarray(ref) - np.asarray(got))))
        t_np = best_of(lambda: f_np(*inputs), args.repeat)
        t_nb = best_of(lambda: f_nb(*inputs), args.repeat)
        print(f"{label:<36} {t_np:11.5f} {t_nb:11.5f} {t_np / t_nb:8.1f}  {diff:.1e}")


if __name__ == "__main__":
    main()
