#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the per-step force evaluation pipeline and the individual kernels on
a supercritical state. The two backends compute the same thing; this is the
speed comparison behind the GLFLOW_DISABLE_NUMBA switch.

Usage: python benchmarks/bench_kernels.py [--sizes 64,128,256] [--reps 200]
"""

import argparse
import time

import numpy as np

import glflow
from glflow import calculus, kernels_numpy
from glflow.state import FlowState

try:
    from glflow import kernels_numba
    HAVE_NUMBA = True
except ImportError:
    kernels_numba = None
    HAVE_NUMBA = False


def make_state(n):
    L = 2 * np.pi * np.sqrt(2)
    g = glflow.make_geometry(L, L, n, n)
    b = glflow.make_bundle(1, g)
    phi = glflow.random_section(b, g, 1, smoothing_steps=10)
    a = glflow.random_divfree_oneform(g, 2, 0.3)
    return g, b, FlowState(0.0, a[0], a[1], phi)


def bench(fn, reps):
    fn()  # warm (includes jit compilation)
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps * 1e3


def pipeline(kern, state, g, b):
    def step():
        v1, v2 = kern.link_phases(state.a1, state.a2, b.u1, b.u2, g.h1, g.h2)
        inv_hw = g.em2rho / (g.h1 * g.h2)
        bf, _ = kern.plaquette_field(v1, v2, inv_hw)
        ga1, ga2, gphi, rhs = kern.gradient_forces(
            state.phi, v1, v2, bf, g.em2rho, g.h1, g.h2)
        a0 = calculus.fd_poisson_flat(rhs, g)
        kern.euler_update(state.a1, state.a2, state.phi, ga1, ga2, gphi,
                          a0, 1e-5, g.h1, g.h2)
    return step


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="64,128,256")
    ap.add_argument("--reps", type=int, default=200)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    print(f"backend available: numba={'yes' if HAVE_NUMBA else 'no'}")
    print(f"{'n':>5} {'numpy ms/step':>14} {'numba ms/step':>14} {'speedup':>8}")
    for n in sizes:
        g, b, st = make_state(n)
        t_np = bench(pipeline(kernels_numpy, st, g, b), args.reps)
        if HAVE_NUMBA:
            t_nb = bench(pipeline(kernels_numba, st, g, b), args.reps)
            print(f"{n:>5} {t_np:>14.3f} {t_nb:>14.3f} {t_np / t_nb:>8.2f}")
        else:
            print(f"{n:>5} {t_np:>14.3f} {'-':>14} {'-':>8}")


if __name__ == "__main__":
    main()
