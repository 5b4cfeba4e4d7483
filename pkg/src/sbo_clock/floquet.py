"""Drive-averaged model coefficients and the dressed band structure.

The fast periodic drive renormalizes both the site-to-site tunneling and
the probe coupling. Each renormalization is the average of a unit phasor
exp(i theta(t)) over one drive period:

  hopping:  theta(t) = hop * [pi * dnu(t) / (4 recoil_freq) + 2 pi n nu_s t]
  probe:    theta(t) = -(soc_phase * Int_0^t dnu + 2 pi m nu_s t)

For a cosine drive both averages reduce to integer-order Bessel functions.
The uniform part of the hopping phase is referenced to the drive's even
symmetry point (drive-origin convention), which makes the cosine hopping
factor real and equal to the standard Bessel renormalization; for a general
waveform the factor is complex and its argument shifts the dispersion in q.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special

from .errors import ConfigError, DomainError, QuadratureError
from .params import AtomSpecies, CosineWave, DriveConfig, LatticeEnsembleConfig, TabulatedWave

__all__ = [
    "bessel_j",
    "hopping_factor",
    "hopping_factor_quadrature",
    "rabi_factor",
    "rabi_factor_quadrature",
    "effective_f1",
    "effective_hopping",
    "detuning_amplitude",
    "dispersion",
    "generalized_detuning",
    "wrap_angle",
]

_TWO_PI = 2.0 * math.pi

MAX_BESSEL_ORDER = 64
MAX_BESSEL_ARG = 50.0


def bessel_j(order: int, x: float) -> float:
    """Integer-order Bessel function of the first kind J_order(x).

    Supported domain: |order| <= 64 and |x| <= 50.
    """
    if not isinstance(order, (int, np.integer)):
        raise DomainError("bessel_j order must be an integer")
    if abs(order) > MAX_BESSEL_ORDER:
        raise DomainError(f"bessel_j order {order} outside |order| <= {MAX_BESSEL_ORDER}")
    x = float(x)
    if not math.isfinite(x) or abs(x) > MAX_BESSEL_ARG:
        raise DomainError(f"bessel_j argument {x} outside |x| <= {MAX_BESSEL_ARG}")
    if order < 0:
        sign = -1.0 if (order % 2) else 1.0
        return sign * float(special.jv(-order, x))
    return float(special.jv(order, x))


def _phase_quarter_turns(k: int) -> complex:
    """i**k computed exactly for integer k."""
    return (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)[k % 4]


def _gl_period_average(phase_fn, nu_s: float, tol: float = 1e-11,
                       order: int = 32, max_panels: int = 4096) -> complex:
    """Average of exp(i phase_fn(t)) over one period by composite Gauss-Legendre.

    Panels double until successive estimates differ by less than tol.
    phase_fn must accept an ndarray of times.
    """
    period = 1.0 / nu_s
    nodes, wts = leggauss(order)

    def estimate(panels: int) -> complex:
        edges = np.linspace(0.0, period, panels + 1)
        lo = edges[:-1, None]
        hi = edges[1:, None]
        t = 0.5 * (hi - lo) * nodes[None, :] + 0.5 * (hi + lo)
        vals = np.exp(1j * phase_fn(t.ravel())).reshape(t.shape)
        panel_ints = 0.5 * (hi[:, 0] - lo[:, 0]) * (vals @ wts)
        return complex(panel_ints.sum() / period)

    panels = 4
    prev = estimate(panels)
    while panels <= max_panels:
        panels *= 2
        cur = estimate(panels)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    raise QuadratureError(
        f"period-average quadrature did not converge below {tol:g} "
        f"by {max_panels} panels (last change {abs(cur - prev):.3e})"
    )


def _hopping_phase_scale(species: AtomSpecies) -> float:
    """Phase per Hz of instantaneous frequency difference: pi / (4 recoil_freq)."""
    return math.pi / (4.0 * species.recoil_freq)


def hopping_factor(drive: DriveConfig, species: AtomSpecies,
                   hop_distance: int = 1) -> complex:
    """Drive-averaged tunneling renormalization for a hop of `hop_distance` sites.

    Cosine drives use the closed form J_{hop*n}(hop * pi nu_a / (4 recoil_freq)),
    which is real; tabulated drives are integrated numerically under the same
    drive-origin convention. The two hop directions are complex conjugates.
    """
    if not isinstance(hop_distance, (int, np.integer)) or hop_distance == 0:
        raise ConfigError("hop_distance must be a nonzero integer")
    if drive.nu_s <= 0:
        raise ConfigError("drive.nu_s must be positive")
    hop = int(hop_distance)
    n = int(drive.n_res)
    if isinstance(drive.waveform, CosineWave):
        z = math.pi * drive.waveform.amplitude / (4.0 * species.recoil_freq)
        return complex(bessel_j(hop * n, hop * z))
    return hopping_factor_quadrature(drive, species, hop)


def hopping_factor_quadrature(drive: DriveConfig, species: AtomSpecies,
                              hop_distance: int = 1, tol: float = 1e-11) -> complex:
    """Period-average evaluation of the tunneling renormalization.

    Works for any waveform, including cosine (used as a cross-check against
    the closed form). The literal average carries a drive-origin phase
    i^{n*hop} for even waveforms; it is removed here so the convention
    matches the closed form.
    """
    hop = int(hop_distance)
    n = int(drive.n_res)
    scale = _hopping_phase_scale(species)
    w = drive.waveform

    def phase(t):
        return hop * (scale * w.value(t, drive.nu_s) + _TWO_PI * n * drive.nu_s * t)

    literal = _gl_period_average(phase, drive.nu_s, tol=tol)
    return _phase_quarter_turns(-n * hop) * literal


def rabi_factor(drive: DriveConfig, species: AtomSpecies, sideband: int) -> complex:
    """Drive-averaged probe renormalization for Floquet sideband `sideband`.

    Cosine drives use J_m(-soc_phase * nu_a / (2 pi nu_s)); tabulated drives
    fall back to quadrature of the imprinted probe phase.
    """
    m = int(sideband)
    if isinstance(drive.waveform, CosineWave):
        y = species.soc_phase * drive.waveform.amplitude / (_TWO_PI * drive.nu_s)
        return complex(bessel_j(m, -y))
    return rabi_factor_quadrature(drive, species, m)


def rabi_factor_quadrature(drive: DriveConfig, species: AtomSpecies,
                           sideband: int, tol: float = 1e-11) -> complex:
    """Period-average evaluation of the probe renormalization."""
    m = int(sideband)
    phi = species.soc_phase
    w = drive.waveform

    def phase(t):
        return -(phi * w.integral(t, drive.nu_s) + _TWO_PI * m * drive.nu_s * t)

    return _gl_period_average(phase, drive.nu_s, tol=tol)


def effective_f1(drive: DriveConfig, species: AtomSpecies) -> complex:
    """Single-site hopping factor, honoring an explicit override."""
    if drive.f1_override is not None:
        return complex(drive.f1_override)
    return hopping_factor(drive, species, 1)


def effective_hopping(lattice: LatticeEnsembleConfig, s) -> np.ndarray:
    """Radial-shell-corrected tunneling J/h in Hz for shell(s) s."""
    s = np.asarray(s, dtype=float)
    return lattice.j_nz + lattice.coupling_sign * lattice.c_coeff * (s + 1.0)


def wrap_angle(x):
    """Remove whole turns: map x to [-pi, pi].

    Multiples of 2 pi are removed in a way that leaves arguments already in
    [-pi, pi] bit-identical, so quantities built from wrapped angles are
    exactly 2 pi periodic.
    """
    x = np.asarray(x, dtype=float)
    turns = np.round(x / _TWO_PI)
    out = x - _TWO_PI * turns
    if out.ndim == 0:
        return float(out)
    return out


def dispersion(q, s, lattice: LatticeEnsembleConfig, f1: complex) -> np.ndarray:
    """Dressed band energy E/h in Hz at quasimomentum q and radial shell s.

    E/h = -2 (J/h) |f1| cos(q - arg f1) + nu_r (s + 1), exactly 2 pi periodic
    in q. A complex f1 shifts the band minimum by arg f1.
    """
    f1 = complex(f1)
    mag = abs(f1)
    arg = cmath.phase(f1) if f1.imag != 0.0 or f1.real < 0.0 else 0.0
    j_s = effective_hopping(lattice, s)
    qv = wrap_angle(q)
    band = -2.0 * j_s * mag * np.cos(np.asarray(qv) - arg)
    shell = lattice.nu_r * (np.asarray(s, dtype=float) + 1.0)
    out = band + shell
    if np.ndim(out) == 0:
        return float(out)
    return out


def detuning_amplitude(lattice: LatticeEnsembleConfig, s, f1: complex,
                       soc_phase: float) -> np.ndarray:
    """Amplitude 4 (J/h) |f1| sin(soc_phase/2) of the q-dependent detuning, Hz."""
    return 4.0 * effective_hopping(lattice, s) * abs(complex(f1)) * math.sin(0.5 * soc_phase)


def generalized_detuning(q, s, sideband: int, delta: float, drive: DriveConfig,
                         lattice: LatticeEnsembleConfig, species: AtomSpecies,
                         f1: complex | None = None):
    """Detuning seen by the sideband-m probe on the dressed band.

    Equals delta + m nu_s + (E(q + soc_phase) - E(q))/h; the band-energy
    difference evaluates to
    4 (J/h) |f1| sin(q + soc_phase/2 - arg f1) sin(soc_phase/2).
    """
    if f1 is None:
        f1 = effective_f1(drive, species)
    f1 = complex(f1)
    arg = cmath.phase(f1) if f1.imag != 0.0 or f1.real < 0.0 else 0.0
    phi = species.soc_phase
    amp = detuning_amplitude(lattice, s, f1, phi)
    qv = np.asarray(wrap_angle(q))
    out = delta + sideband * drive.nu_s + amp * np.sin(qv + 0.5 * phi - arg)
    if np.ndim(out) == 0:
        return float(out)
    return out
