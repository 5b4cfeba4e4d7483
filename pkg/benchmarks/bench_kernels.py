"""Timing comparison of the compiled extensions against the NumPy fallback.

Run from the repo root after an editable install:

    python benchmarks/bench_kernels.py

Covers the two lineshape kernels on a realistic thermal grid and the RK4
two-level integrator. The fallback is forced per call by importing the
pure-Python modules directly, so one process measures both backends.
"""

from __future__ import annotations

import time

import numpy as np

from sbo_clock import _kernels_py, _evolve_py
from sbo_clock import kernels, evolve


def _time(fn, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_lineshape(ns=501, nq=1000):
    rng = np.random.default_rng(7)
    weights = np.ascontiguousarray(rng.random((ns, nq)) / (ns * nq))
    u = np.ascontiguousarray(rng.uniform(-np.pi, np.pi, nq))
    sin_u = np.ascontiguousarray(np.sin(u))
    cos_u = np.ascontiguousarray(np.cos(u))
    amp = np.ascontiguousarray(150.0 + rng.random(ns))
    args = (weights, sin_u, cos_u, amp, 12.5, 30.0, 1.0 / 60.0, True)

    t_np = _time(lambda: _kernels_py.weighted_lineshape_sums(*args))
    t_sel = _time(lambda: kernels.weighted_lineshape_sums(*args))
    print(f"weighted_lineshape_sums  {ns}x{nq}")
    print(f"  numpy fallback : {t_np * 1e3:8.2f} ms")
    print(f"  {kernels.backend_name():15s}: {t_sel * 1e3:8.2f} ms"
          f"  ({t_np / t_sel:4.1f}x)")

    args_g = (sin_u, amp, 12.5, 30.0, 1.0 / 60.0)
    t_np = _time(lambda: _kernels_py.excitation_grid(*args_g))
    t_sel = _time(lambda: kernels.excitation_grid(*args_g))
    print(f"excitation_grid          {ns}x{nq}")
    print(f"  numpy fallback : {t_np * 1e3:8.2f} ms")
    print(f"  {kernels.backend_name():15s}: {t_sel * 1e3:8.2f} ms"
          f"  ({t_np / t_sel:4.1f}x)")


def bench_rk4(n_steps=200_000):
    args = (5.0, 30.0, 1.4, 2.0 * np.pi * 2000.0, 1e-7, n_steps, n_steps)
    t_py = _time(lambda: _evolve_py.rk4_harmonic(*args), repeat=3)
    t_sel = _time(lambda: evolve.rk4_harmonic(*args), repeat=3)
    print(f"rk4_harmonic             {n_steps} steps")
    print(f"  python fallback: {t_py * 1e3:8.2f} ms")
    print(f"  {evolve.backend_name():15s}: {t_sel * 1e3:8.2f} ms"
          f"  ({t_py / t_sel:4.1f}x)")


if __name__ == "__main__":
    print(f"selected kernel backend: {kernels.backend_name()}")
    print(f"selected evolve backend: {evolve.backend_name()}")
    bench_lineshape()
    bench_rk4()
