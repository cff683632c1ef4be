"""Timing comparison of the jitted kernels against the fallback builds.

Runs each kernel pair on representative inputs and prints per-call times
and the speedup of the active (numba) build over the pure numpy/python
build.  Invoke from the repository root:

    python3 benchmarks/bench_kernels.py [--n 400] [--repeat 5]

The numbers motivate the dual-build layout: quadratic DP kernels gain an
order of magnitude or more under numba, while simple counting loops are
close to the numpy build and stay for the backend flag only.
"""

import argparse
import timeit

import numpy as np
from numpy.random import default_rng

from cadlag_rough import kernels
from cadlag_rough._backend import backend


def _time(fn, *args, repeat=5):
    fn(*args)  # warm the jit cache before timing
    t = timeit.repeat(lambda: fn(*args), number=1, repeat=repeat)
    return min(t)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=400,
                    help="path length for the DP kernels")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if backend() != "numba":
        print("active backend is numpy; run without CADLAG_ROUGH_NUMBA=0 "
              "to compare builds")
    rng = default_rng(0)
    n, d, e = args.n, 2, 3
    x = np.cumsum(rng.normal(size=(n, d)), axis=0)
    y = np.cumsum(rng.normal(size=(n, d)), axis=0)
    raw = rng.normal(size=(n, d, d))
    mx = np.cumsum(raw, axis=0)
    my = np.cumsum(rng.normal(size=(n, d, d)), axis=0)
    tx = np.linspace(0.0, 1.0, n)
    u = 0.3 * rng.normal(size=(n, d))
    a = 0.1 * (raw - np.transpose(raw, (0, 2, 1)))
    A = 0.3 * rng.normal(size=(d, e, e))
    bias = np.zeros((d, e))
    a0 = 0.3 * rng.normal(size=(d, e))
    B = 0.7 * rng.normal(size=(d, e, e))
    y0 = np.ones(e)
    p = 2.5

    cases = [
        ("pvar_dp_vec", kernels.pvar_dp_vec, kernels._pvar_dp_vec_np,
         (x, p)),
        ("pvar_dp_g2", kernels.pvar_dp_g2, kernels._pvar_dp_g2_np,
         (x, mx, p)),
        ("rho_dp", kernels.rho_dp, kernels._rho_dp_np, (x, mx, y, my, p)),
        ("homog_dp_vec", kernels.homog_dp_vec, kernels._homog_dp_vec_np,
         (x, y, p)),
        ("homog_dp_g2", kernels.homog_dp_g2, kernels._homog_dp_g2_np,
         (x, mx, y, my, p)),
        ("sigma_dp_vec", kernels._sigma_dp_vec, kernels._sigma_dp_vec_np,
         (tx, x, tx, y)),
        ("sigma_dp_g2", kernels._sigma_dp_g2, kernels._sigma_dp_g2_np,
         (tx, x, mx, tx, y, my)),
        ("nu_count_vec", kernels.nu_count_vec, kernels._nu_count_vec_loop,
         (x, 0.5)),
        ("rk4_linear_drive", kernels.rk4_linear_drive,
         kernels._rk4_linear_drive_loop, (u, a, A, bias, y0, 4, 0.25)),
        ("rk4_sine_drive", kernels.rk4_sine_drive,
         kernels._rk4_sine_drive_loop, (u, a, a0, B, y0, 4, 0.25)),
    ]

    print(f"backend={backend()}  n={n}  (best of {args.repeat}, seconds)")
    print(f"{'kernel':<18} {'active':>12} {'fallback':>12} {'speedup':>9}")
    for name, fast, slow, fargs in cases:
        tf = _time(fast, *fargs, repeat=args.repeat)
        ts = _time(slow, *fargs, repeat=args.repeat)
        print(f"{name:<18} {tf:>12.2e} {ts:>12.2e} {ts / tf:>8.1f}x")


if __name__ == "__main__":
    main()
