"""Benchmark: compiled stepper kernels against the numpy fallback.

Usage: python3 benchmarks/bench_stepper.py [--grid N] [--reps R]

Times the three hot kernels in isolation and a full IMEX step workload
with each lane patched into the stepper.
"""

import argparse
import time

import numpy as np

import shockstab._core as core
from shockstab._core import fallback

try:
    from shockstab._core import _stepper
except ImportError:
    _stepper = None


def bench_kernels(N, n, reps):
    rng = np.random.default_rng(1)
    flux = rng.standard_normal((N + 4, n))
    w = rng.standard_normal((N + 4, n))
    alpha = np.abs(rng.standard_normal(N + 4)) + 0.1
    b = np.abs(rng.standard_normal((N + 1, n))) + 0.1
    out = np.empty((N, n))
    dl = 0.1 * rng.standard_normal((n, N))
    du = 0.1 * rng.standard_normal((n, N))
    d = 2.0 + np.abs(rng.standard_normal((n, N)))
    rhs = rng.standard_normal((n, N))

    lanes = {"python": fallback}
    if _stepper is not None:
        lanes["compiled"] = _stepper

    rows = []
    for name, mod in lanes.items():
        t0 = time.perf_counter()
        for _ in range(reps):
            mod.hyperbolic_rhs(flux, w, alpha, 0.05, 1 / 16, out)
        t_h = (time.perf_counter() - t0) / reps
        t0 = time.perf_counter()
        for _ in range(reps):
            mod.diffusion_rhs(w, b, 0.05, out)
        t_d = (time.perf_counter() - t0) / reps
        t0 = time.perf_counter()
        for _ in range(reps):
            mod.thomas_batch(dl.copy(), d.copy(), du.copy(), rhs.copy())
        t_t = (time.perf_counter() - t0) / reps
        rows.append((name, t_h, t_d, t_t))
    return rows


def bench_full_step(reps):
    from shockstab import get_model, solve_profile
    from shockstab.profile import ShockType
    from shockstab.sim import SimulationConfig, _Discretization

    m = get_model("ucquad")
    p = solve_profile(m, [1.0, 0.0], [-1.0, 0.0], halfwidth=20.0, h=0.01)
    cfg = SimulationConfig(halfwidth=150.0, h=0.05, T=1.0)
    disc = _Discretization(m, p, cfg, ShockType.UNDERCOMPRESSIVE)
    W = p(disc.x)
    dt = 0.4 * cfg.h / 2.5

    lanes = {"python": fallback}
    if _stepper is not None:
        lanes["compiled"] = _stepper

    saved = (core.hyperbolic_rhs, core.diffusion_rhs, core.thomas_batch)
    out = []
    try:
        for name, mod in lanes.items():
            core.hyperbolic_rhs = mod.hyperbolic_rhs
            core.diffusion_rhs = mod.diffusion_rhs
            core.thomas_batch = mod.thomas_batch
            t0 = time.perf_counter()
            for _ in range(reps):
                E0 = disc.explicit_rhs(W)
                bf0 = disc.b_iface(W)
                D0 = disc.diffusion_rhs(W, b_if=bf0)
                W1 = disc.implicit_solve(bf0, 0.5 * dt, W + dt * E0
                                         + 0.5 * dt * D0, W)
                E1 = disc.explicit_rhs(W1)
                bf1 = disc.b_iface(W1)
                disc.implicit_solve(bf1, 0.5 * dt,
                                    W + 0.5 * dt * (E0 + E1) + 0.5 * dt * D0,
                                    W1)
            out.append((name, (time.perf_counter() - t0) / reps))
    finally:
        (core.hyperbolic_rhs, core.diffusion_rhs, core.thomas_batch) = saved
    return out, disc.N


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid", type=int, default=8001)
    ap.add_argument("--reps", type=int, default=200)
    args = ap.parse_args()

    print(f"active backend: {core.BACKEND}")
    print(f"\nkernel timings, N={args.grid}, n=2 (seconds per call)")
    print(f"{'lane':10s} {'hyperbolic':>12s} {'diffusion':>12s} {'thomas':>12s}")
    for name, th, td, tt in bench_kernels(args.grid, 2, args.reps):
        print(f"{name:10s} {th:12.3e} {td:12.3e} {tt:12.3e}")

    rows, N = bench_full_step(max(10, args.reps // 4))
    print(f"\nfull IMEX step, N={N}, n=2 (seconds per step)")
    base = None
    for name, t in rows:
        note = ""
        if base is None:
            base = t
        else:
            note = f"  ({base / t:.2f}x vs python)"
        print(f"{name:10s} {t:12.3e}{note}")


if __name__ == "__main__":
    main()
