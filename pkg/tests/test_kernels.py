"""Compiled reductions against the NumPy reference."""

import numpy as np
import pytest

from sbo_clock import _kernels_py, kernels
from sbo_clock.evolve import rk4_harmonic
from sbo_clock import _evolve_py


def test_compiled_backend_active():
    # the build must not silently fall back; SBO_PURE_PYTHON opts out
    import os
    flag = os.environ.get("SBO_PURE_PYTHON", "")
    expected = "numpy" if flag not in ("", "0") else "compiled"
    assert kernels.backend_name() == expected


def random_inputs(rng, ns=9, nq=41):
    sin_u = np.sin(rng.uniform(-4, 4, nq))
    cos_u = np.cos(rng.uniform(-4, 4, nq))
    amp = rng.uniform(0.0, 200.0, ns)
    w = rng.uniform(0.0, 1.0, (ns, nq))
    w /= w.sum()
    return w, sin_u, cos_u, amp


def test_excitation_grid_parity():
    rng = np.random.default_rng(3)
    for _ in range(20):
        _, sin_u, _, amp = random_inputs(rng)
        d0 = rng.uniform(-3000, 3000)
        g = rng.uniform(0.5, 150.0)
        tp = rng.uniform(1e-4, 0.5)
        a = kernels.excitation_grid(sin_u, amp, d0, g, tp)
        b = _kernels_py.excitation_grid(sin_u, amp, d0, g, tp)
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)
        assert np.all((a >= 0) & (a <= 1 + 1e-12))


def test_weighted_sums_parity():
    rng = np.random.default_rng(4)
    for _ in range(20):
        w, sin_u, cos_u, amp = random_inputs(rng)
        d0 = rng.uniform(-3000, 3000)
        g = rng.uniform(0.5, 150.0)
        tp = rng.uniform(1e-4, 0.5)
        for deriv in (False, True):
            a = kernels.weighted_lineshape_sums(w, sin_u, cos_u, amp, d0, g,
                                                tp, deriv)
            b = _kernels_py.weighted_lineshape_sums(w, sin_u, cos_u, amp, d0,
                                                    g, tp, deriv)
            assert a[0] == pytest.approx(b[0], rel=1e-13, abs=1e-15)
            assert a[1] == pytest.approx(b[1], rel=1e-12, abs=1e-15)


def test_zero_coupling():
    rng = np.random.default_rng(5)
    w, sin_u, cos_u, amp = random_inputs(rng)
    for mod in (kernels, _kernels_py):
        out = mod.excitation_grid(sin_u, amp, 100.0, 0.0, 0.01)
        assert np.all(out == 0.0)
        assert mod.weighted_lineshape_sums(w, sin_u, cos_u, amp, 100.0, 0.0,
                                           0.01, True) == (0.0, 0.0)


def test_shape_mismatch_raises():
    rng = np.random.default_rng(6)
    w, sin_u, cos_u, amp = random_inputs(rng)
    for mod in (kernels, _kernels_py):
        with pytest.raises(ValueError):
            mod.weighted_lineshape_sums(w[:, :-1], sin_u, cos_u, amp, 0.0,
                                        10.0, 0.01, False)


def test_derivative_against_finite_difference():
    # single shell, single q point: the derivative sum reduces to
    # dP/d(delta~) * amp * cos_u, checkable against a detuning difference
    rng = np.random.default_rng(7)
    for _ in range(10):
        w = np.array([[1.0]])
        sin_u = np.array([rng.uniform(-1, 1)])
        cos_u = np.array([rng.uniform(-1, 1)])
        amp = np.array([rng.uniform(10.0, 200.0)])
        d0 = rng.uniform(-500, 500)
        g = rng.uniform(5.0, 80.0)
        tp = 0.5 / g
        _, sd = kernels.weighted_lineshape_sums(w, sin_u, cos_u, amp, d0, g,
                                                tp, True)
        h = 1e-4
        hi, _ = kernels.weighted_lineshape_sums(w, sin_u, cos_u, amp, d0 + h,
                                                g, tp, False)
        lo, _ = kernels.weighted_lineshape_sums(w, sin_u, cos_u, amp, d0 - h,
                                                g, tp, False)
        dpdd = (hi - lo) / (2 * h)
        assert sd == pytest.approx(dpdd * amp[0] * cos_u[0], rel=1e-6, abs=1e-9)


def test_excitation_matches_weighted_sum():
    rng = np.random.default_rng(8)
    w, sin_u, cos_u, amp = random_inputs(rng)
    d0, g, tp = -150.0, 40.0, 0.0125
    grid = kernels.excitation_grid(sin_u, amp, d0, g, tp)
    sp, _ = kernels.weighted_lineshape_sums(w, sin_u, cos_u, amp, d0, g, tp,
                                            False)
    assert sp == pytest.approx(float((w * grid).sum()), rel=1e-12)


def test_rk4_backends_agree():
    times_c, pops_c, norm_c = rk4_harmonic(40.0, 25.0, 1.2, 2e4, 1e-6, 4000, 200)
    times_p, pops_p, norm_p = _evolve_py.rk4_harmonic(40.0, 25.0, 1.2, 2e4,
                                                      1e-6, 4000, 200)
    np.testing.assert_array_equal(times_c, times_p)
    np.testing.assert_allclose(pops_c, pops_p, rtol=1e-12, atol=1e-14)
    assert norm_c == pytest.approx(norm_p, rel=1e-12)
    assert norm_c == pytest.approx(1.0, abs=1e-9)


def test_rk4_argument_validation():
    for mod in (_evolve_py,):
        with pytest.raises(ValueError):
            mod.rk4_harmonic(0.0, 1.0, 0.0, 0.0, 1e-3, 10, 3)  # 3 !| 10
        with pytest.raises(ValueError):
            mod.rk4_harmonic(0.0, 1.0, 0.0, 0.0, -1e-3, 10, 1)
