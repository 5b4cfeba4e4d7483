"""Thermal (s, q) grid construction."""

import numpy as np
import pytest

import sbo_clock as sc
from sbo_clock.oracles import boltzmann_weights_reference

SR = sc.strontium_87()
DRIVE = sc.DriveConfig(waveform=sc.CosineWave(5000.0), nu_s=1500.0)


def small_lattice(**kw):
    base = dict(j_nz=80.0, c_coeff=0.1, nu_r=100.0, n_sites=32, s_max=12,
                temperature=1e-6)
    base.update(kw)
    return sc.LatticeEnsembleConfig(**base)


def test_weights_normalized():
    ens = sc.build_ensemble(small_lattice(), DRIVE, SR)
    assert ens.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(ens.weights >= 0)
    assert ens.weights.shape == (13, 32)


def test_q_grid_contract():
    ens = sc.build_ensemble(small_lattice(n_sites=10), DRIVE, SR)
    n = 10
    expect = -np.pi + 2 * np.pi * np.arange(1, n + 1) / n
    np.testing.assert_allclose(ens.q_grid, expect, rtol=0, atol=1e-12)
    assert ens.q_grid[-1] == np.pi  # right edge owned, left edge excluded
    assert ens.q_grid[0] > -np.pi


def test_iter_points_order():
    ens = sc.build_ensemble(small_lattice(n_sites=4, s_max=2), DRIVE, SR)
    pts = list(ens.iter_points())
    assert len(pts) == 12
    assert [p.s for p in pts] == [0] * 4 + [1] * 4 + [2] * 4
    assert [p.degeneracy for p in pts] == [1] * 4 + [2] * 4 + [3] * 4
    np.testing.assert_array_equal([p.q for p in pts[:4]], ens.q_grid)
    flat = ens.weights.reshape(-1)
    np.testing.assert_array_equal([p.weight for p in pts], flat)


def test_weights_match_extended_precision_reference():
    lat = small_lattice(n_sites=16, s_max=8)
    ens = sc.build_ensemble(lat, DRIVE, SR)
    ref = boltzmann_weights_reference(ens.energies, ens.s_levels, lat.kbt_freq)
    np.testing.assert_allclose(ens.weights, ref, rtol=1e-12, atol=0)


def test_shift_reference_leaves_weights():
    ens = sc.build_ensemble(small_lattice(), DRIVE, SR)
    shifted = sc.shift_ensemble_energy_reference(ens)
    assert shifted.energies.min() == 0.0
    np.testing.assert_allclose(shifted.weights, ens.weights, rtol=0, atol=1e-12)


def test_dressed_versus_bare_weights():
    lat_d = small_lattice()
    lat_b = small_lattice(dressed_weights=False)
    w_d = sc.build_ensemble(lat_d, DRIVE, SR).weights
    ens_b = sc.build_ensemble(lat_b, DRIVE, SR)
    # the drive narrows the band, so the distributions genuinely differ
    assert np.max(np.abs(w_d - ens_b.weights)) > 1e-6
    assert ens_b.f1 != 1.0  # returned f1 still reflects the drive


def test_marginals():
    ens = sc.build_ensemble(small_lattice(), DRIVE, SR)
    assert ens.q_marginal().shape == (32,)
    assert ens.s_marginal().shape == (13,)
    assert ens.q_marginal().sum() == pytest.approx(1.0, abs=1e-12)
    assert ens.s_marginal().sum() == pytest.approx(1.0, abs=1e-12)
    # shells above the thermal scale are barely occupied
    marg = ens.s_marginal()
    assert marg[-1] < marg[np.argmax(marg)]


def test_f1_argument_shifts_population():
    # complex f1 moves the band minimum, so the q marginal peak follows arg f1
    lat = small_lattice(n_sites=64, temperature=2e-7)
    arg = 0.8
    ens = sc.build_ensemble(lat, DRIVE, SR, f1=0.5 * np.exp(1j * arg))
    peak_q = ens.q_grid[np.argmax(ens.q_marginal())]
    assert abs(peak_q - arg) < 2 * np.pi / 64 + 1e-9


def test_explicit_f1_override_in_drive():
    drv = sc.DriveConfig(waveform=sc.CosineWave(5000.0), nu_s=1500.0,
                         f1_override=0.5)
    ens = sc.build_ensemble(small_lattice(), drv, SR)
    assert ens.f1 == 0.5 + 0.0j
