"""Compare the numba kernels with their pure-numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--repeat R]

Each kernel is timed with numba dispatch on and off (the first numba call,
which includes compilation, is excluded) and the two results are checked
for agreement.
"""
import argparse
import timeit

import numpy as np

from sidonlab import kernels
from sidonlab._accel import HAVE_NUMBA


def cases(rng):
    A = rng.standard_normal((20, 40))
    Ac = rng.standard_normal((6, 30)) + 1j * rng.standard_normal((6, 30))
    return {
        "sign_enumeration 20x40": (lambda: kernels.sign_enumeration(A)[0]),
        "phase_enumeration 6x30 Q=16": (lambda: kernels.phase_enumeration(Ac, 16)[0]),
    }


def run(repeat):
    rng = np.random.default_rng(0)
    rows = []
    real_use = kernels.use_numba
    for name, fn in cases(rng).items():
        timings, results = {}, {}
        for label, flag in (("numba", True), ("numpy", False)):
            if flag and not HAVE_NUMBA:
                continue
            kernels.use_numba = (lambda f=flag: f)
            results[label] = fn()  # warm-up / compile
            timings[label] = min(timeit.repeat(fn, number=1, repeat=repeat))
        kernels.use_numba = real_use
        agree = len(results) < 2 or np.allclose(results["numba"], results["numpy"], rtol=1e-10, atol=1e-10)
        rows.append((name, timings.get("numba"), timings["numpy"], agree))
    return rows


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    print(f"{'kernel':32s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}  agree")
    for name, tn, tp, ok in run(args.repeat):
        sp = f"{tp / tn:8.1f}" if tn else "     n/a"
        tn_s = f"{tn:10.4f}" if tn else "       n/a"
        print(f"{name:32s} {tn_s} {tp:10.4f} {sp}  {ok}")


if __name__ == "__main__":
    main()
