"""The reference machinery itself has to be trustworthy."""

import math

import numpy as np
import pytest
from scipy import special

import sbo_clock as sc
from sbo_clock import oracles

SR = sc.strontium_87()


def test_hopping_quad_equals_bessel():
    wave = sc.CosineWave(5000.0)
    z = math.pi * 5000.0 / (4.0 * SR.recoil_freq)
    val = oracles.hopping_coefficient_quad(wave, 2000.0, 1, SR.recoil_freq)
    assert val.real == pytest.approx(float(special.jv(1, z)), abs=1e-11)
    assert abs(val.imag) < 1e-11
    val2 = oracles.hopping_coefficient_quad(wave, 2000.0, 2, SR.recoil_freq,
                                            hop=2)
    assert val2.real == pytest.approx(float(special.jv(4, 2 * z)), abs=1e-11)


def test_rabi_quad_equals_bessel():
    wave = sc.CosineWave(5000.0)
    nu_s = 2000.0
    y = SR.soc_phase * 5000.0 / (2 * math.pi * nu_s)
    for m in (-1, 0, 1):
        val = oracles.rabi_coefficient_quad(wave, nu_s, m, SR.soc_phase,
                                            tol=1e-11)
        assert val.real == pytest.approx(float(special.jv(m, -y)), abs=1e-9)
        assert abs(val.imag) < 1e-9


def test_finite_difference_on_polynomial():
    # Richardson removes the h^2 term, so a quartic is nailed at modest h
    fn = lambda x: 0.3 * x**4 - 2.0 * x**2 + x
    dfn = lambda x: 1.2 * x**3 - 4.0 * x + 1.0
    d, err = oracles.finite_difference(fn, 1.3, 1e-2)
    assert d == pytest.approx(dfn(1.3), abs=1e-9)
    assert err < 1e-4


def test_finite_difference_error_estimate_honest():
    d, err = oracles.finite_difference(math.sin, 0.7, 1e-3)
    assert abs(d - math.cos(0.7)) <= max(10 * err, 1e-13)
    with pytest.raises(ValueError):
        oracles.finite_difference(math.sin, 0.0, 0.0)


def test_two_level_matches_lineshape():
    rng = np.random.default_rng(21)
    for _ in range(5):
        g = rng.uniform(10.0, 60.0)
        d = rng.uniform(-120.0, 120.0)
        tp = rng.uniform(0.2, 1.4) / g
        sim = oracles.TwoLevelSim(coupling=g, detuning=d, duration=tp)
        trace = oracles.evolve_two_level(sim)
        assert trace.final == pytest.approx(
            sc.rabi_excitation(d, g, tp), abs=1e-7)


def test_two_level_trace_shape():
    sim = oracles.TwoLevelSim(coupling=20.0, detuning=0.0, duration=0.025,
                              record_points=50)
    trace = oracles.evolve_two_level(sim)
    assert trace.times.shape == (51,)
    assert trace.times[0] == 0.0
    assert trace.times[-1] == pytest.approx(0.025, rel=1e-12)
    assert trace.populations[0] == 0.0
    assert trace.final == trace.populations[-1]
    assert abs(trace.norm - 1.0) < 1e-10


def test_two_level_norm_guard():
    # absurdly coarse stepping must be rejected, not silently returned
    sim = oracles.TwoLevelSim(coupling=30.0, detuning=5000.0, duration=0.1,
                              steps_per_cycle=1, record_points=10)
    with pytest.raises(sc.NumericsError):
        oracles.evolve_two_level(sim)


def test_phase_fn_route_matches_harmonic():
    amp, freq = 1.5, 3000.0
    # drive_freq in both routes so the step-size heuristic matches
    base = dict(coupling=25.0, detuning=-40.0, duration=0.01,
                drive_freq=freq, record_points=100)
    a = oracles.evolve_two_level(oracles.TwoLevelSim(
        phase_amplitude=amp, **base))
    b = oracles.evolve_two_level(oracles.TwoLevelSim(
        phase_fn=lambda t: amp * math.sin(2 * math.pi * freq * t), **base))
    np.testing.assert_allclose(a.populations, b.populations, rtol=1e-10,
                               atol=1e-12)


def test_boltzmann_reference_normalized():
    energies = np.array([[0.0, 50.0, 10.0], [100.0, 160.0, 120.0]])
    w = oracles.boltzmann_weights_reference(energies, np.array([0, 1]),
                                            2.0e4)
    assert w.sum() == pytest.approx(1.0, abs=1e-15)
    # degeneracy factor: shell 1 outranks shell 0 at equal energy scales
    assert w[1, 0] > 0.5 * w[0, 0]
    with pytest.raises(ValueError):
        oracles.boltzmann_weights_reference(energies[0], np.array([0]), 1e4)
