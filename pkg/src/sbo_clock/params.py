"""Physical parameter containers for the driven lattice clock model.

Conventions used throughout the package: all frequencies are plain (not
angular) and carried in Hz, times in seconds, the quasimomentum q is the
dimensionless phase per lattice site in (-pi, pi], and the radial quantum
number s = n_x + n_y labels the (s+1)-fold degenerate transverse oscillator
shell.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import constants

from .errors import ConfigError, SboValidityWarning

__all__ = [
    "AtomSpecies",
    "CosineWave",
    "TabulatedWave",
    "DriveConfig",
    "LatticeEnsembleConfig",
    "PulseConfig",
    "strontium_87",
]

_H = constants.h
_KB = constants.k


@dataclass(frozen=True)
class AtomSpecies:
    """Atom and lattice constants.

    mass            kg
    lambda_lattice  m, lattice laser wavelength
    lambda_clock    m, probe (clock) wavelength
    recoil_freq     Hz, lattice recoil E_r/h; derived as h/(2 M lambda^2)
                    when omitted. Published lattice-clock work often quotes
                    a rounded operating value instead, so an explicit
                    override is first class.
    soc_phase       rad, spin-orbit phase per site pi*lambda_lattice/lambda_clock;
                    derived when omitted.
    """

    mass: float
    lambda_lattice: float
    lambda_clock: float
    recoil_freq: float | None = None
    soc_phase: float | None = None

    def __post_init__(self) -> None:
        if self.mass <= 0:
            raise ConfigError("species.mass must be positive")
        if self.lambda_lattice <= 0 or self.lambda_clock <= 0:
            raise ConfigError("species wavelengths must be positive")
        if self.recoil_freq is None:
            object.__setattr__(self, "recoil_freq", self.derived_recoil_freq())
        if self.recoil_freq <= 0:
            raise ConfigError("species.recoil_freq must be positive")
        if self.soc_phase is None:
            object.__setattr__(
                self, "soc_phase", math.pi * self.lambda_lattice / self.lambda_clock
            )

    def derived_recoil_freq(self) -> float:
        """Recoil frequency h / (2 M lambda_lattice^2) in Hz."""
        return _H / (2.0 * self.mass * self.lambda_lattice**2)


def strontium_87(recoil_freq: float | None = 3441.0) -> AtomSpecies:
    """Operating values for 87Sr in an 813.43 nm magic-wavelength lattice.

    recoil_freq defaults to the commonly quoted 3441 Hz operating value;
    pass None to derive h/(2 M lambda^2) (about 3469 Hz) from the mass.
    """
    return AtomSpecies(
        mass=86.909180531 * constants.atomic_mass,
        lambda_lattice=813.43e-9,
        lambda_clock=698.0e-9,
        recoil_freq=recoil_freq,
    )


@dataclass(frozen=True)
class CosineWave:
    """Cosine frequency-difference drive dnu(t) = amplitude * cos(2 pi nu_s t)."""

    amplitude: float  # Hz

    def value(self, t, nu_s):
        return self.amplitude * np.cos(2.0 * np.pi * nu_s * np.asarray(t, dtype=float))

    def integral(self, t, nu_s):
        """Running integral of dnu from 0 to t (dimensionless * s * Hz)."""
        w = 2.0 * np.pi * nu_s
        return self.amplitude * np.sin(w * np.asarray(t, dtype=float)) / w


@dataclass(frozen=True, eq=False)
class TabulatedWave:
    """One period of a drive waveform given as uniform samples.

    Samples are interpreted as values at t_k = k T_s / n for k = 0..n-1 and
    evaluated through the trigonometric interpolant, which also yields the
    exact running integral. The period mean is removed at construction; a
    nonzero mean is a static force, not part of the oscillating drive.
    """

    samples: np.ndarray
    _coeffs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        raw = np.asarray(self.samples, dtype=float)
        if raw.ndim != 1 or raw.size < 64:
            raise ConfigError("tabulated waveform needs at least 64 samples in one period")
        if not np.all(np.isfinite(raw)):
            raise ConfigError("tabulated waveform samples must be finite")
        cleaned = raw - raw.mean()
        object.__setattr__(self, "samples", cleaned)
        n = cleaned.size
        spec = np.fft.rfft(cleaned) / n
        # complex amplitudes a_k with x(t) = Re sum_k a_k exp(i k w t), k >= 1
        amps = 2.0 * spec
        amps[0] = 0.0
        if n % 2 == 0:
            amps[-1] = spec[-1]  # Nyquist bin carries no factor 2
        object.__setattr__(self, "_coeffs", amps)

    def value(self, t, nu_s):
        t = np.asarray(t, dtype=float)
        w = 2.0 * np.pi * nu_s
        k = np.arange(self._coeffs.size)
        phases = np.exp(1j * np.multiply.outer(t, k) * w)
        return np.real(phases @ self._coeffs)

    def integral(self, t, nu_s):
        t = np.asarray(t, dtype=float)
        w = 2.0 * np.pi * nu_s
        k = np.arange(1, self._coeffs.size)
        a = self._coeffs[1:]
        phases = np.exp(1j * np.multiply.outer(t, k) * w) - 1.0
        return np.real(phases @ (a / (1j * k * w)))


@dataclass(frozen=True)
class DriveConfig:
    """Periodic lattice drive and the near-resonant force it compensates.

    waveform     CosineWave or TabulatedWave giving dnu(t) over one period
    nu_s         Hz, drive frequency
    n_res        resonance integer n of the static force, F0 d ~ n h nu_s
    delta_frac   dimensionless residual Delta; the SBO rate is
                 Delta * nu_s = delta_nu_s
    f1_override  optional dressed-hopping factor used in place of the value
                 computed from the waveform (handy when quoting a rounded
                 renormalization directly)
    """

    waveform: CosineWave | TabulatedWave
    nu_s: float
    n_res: int = 1
    delta_frac: float = 0.0
    f1_override: complex | None = None

    def __post_init__(self) -> None:
        if self.nu_s <= 0:
            raise ConfigError("drive.nu_s must be positive")
        if not isinstance(self.n_res, (int, np.integer)):
            raise ConfigError("drive.n_res must be an integer")
        if abs(self.delta_frac) >= 0.1:
            raise ConfigError("drive.delta_frac must satisfy |Delta| < 0.1")
        if abs(self.delta_frac) > 0.01:
            warnings.warn(
                "drive.delta_frac above 0.01; the slow-drift picture degrades",
                SboValidityWarning,
                stacklevel=2,
            )

    @property
    def delta_nu_s(self) -> float:
        """SBO frequency Delta * nu_s in Hz."""
        return self.delta_frac * self.nu_s

    @property
    def period(self) -> float:
        return 1.0 / self.nu_s


@dataclass(frozen=True)
class LatticeEnsembleConfig:
    """Lattice band structure inputs and thermal ensemble controls.

    j_nz           Hz, bare longitudinal tunneling of the populated band
    c_coeff        Hz per radial quantum; the radial correction to the
                   tunneling is coupling_sign * c_coeff * (s+1)
    nu_r           Hz, radial trap frequency
    n_sites        number of lattice sites N (q grid size)
    s_max          highest radial shell kept in thermal sums
    temperature    K
    coupling_sign  +1 or -1
    dressed_weights  when True (default) Boltzmann weights use the
                   drive-dressed dispersion; False uses the bare tunneling
    """

    j_nz: float
    c_coeff: float
    nu_r: float
    n_sites: int
    s_max: int
    temperature: float
    coupling_sign: int = 1
    dressed_weights: bool = True

    def __post_init__(self) -> None:
        if self.j_nz < 0:
            raise ConfigError("lattice.j_nz must be nonnegative")
        if self.nu_r <= 0:
            raise ConfigError("lattice.nu_r must be positive")
        if self.n_sites < 1:
            raise ConfigError("lattice.n_sites must be at least 1")
        if self.s_max < 0:
            raise ConfigError("lattice.s_max must be nonnegative")
        if self.temperature <= 0:
            raise ConfigError("lattice.temperature must be positive")
        if self.coupling_sign not in (1, -1):
            raise ConfigError("lattice.coupling_sign must be +1 or -1")

    @property
    def kbt_freq(self) -> float:
        """k_B T / h in Hz."""
        return _KB * self.temperature / _H


@dataclass(frozen=True)
class PulseConfig:
    """One probe pulse addressing Floquet sideband `sideband`.

    g_eff is the effective Rabi frequency of that sideband in Hz. When the
    pulse is specified through a bare coupling g0, `bare_g0` records it so
    sideband sums can rescale per sideband.
    """

    g_eff: float
    detuning: float
    duration: float
    sideband: int = 0
    bare_g0: float | None = None

    def __post_init__(self) -> None:
        if self.g_eff < 0:
            raise ConfigError("pulse.g_eff must be nonnegative")
        if self.duration < 0:
            raise ConfigError("pulse.duration must be nonnegative")
        if not isinstance(self.sideband, (int, np.integer)):
            raise ConfigError("pulse.sideband must be an integer")

    @classmethod
    def pi_pulse(cls, g_eff: float, detuning: float, sideband: int = 0,
                 bare_g0: float | None = None) -> "PulseConfig":
        """Pulse with duration = 0.5 / g_eff exactly."""
        if g_eff <= 0:
            raise ConfigError("pi pulse needs g_eff > 0")
        return cls(g_eff=g_eff, detuning=detuning, duration=0.5 / g_eff,
                   sideband=sideband, bare_g0=bare_g0)

    @classmethod
    def from_bare(cls, g0: float, drive: DriveConfig, species: AtomSpecies,
                  detuning: float, sideband: int = 0,
                  duration: float | None = None) -> "PulseConfig":
        """Build from the bare coupling g0; g_eff = g0 * |rabi_factor(sideband)|.

        duration None selects a pi pulse at the resulting g_eff.
        """
        from .floquet import rabi_factor

        if g0 < 0:
            raise ConfigError("pulse.bare_g0 must be nonnegative")
        g_eff = g0 * abs(rabi_factor(drive, species, sideband))
        if duration is None:
            return cls.pi_pulse(g_eff=g_eff, detuning=detuning,
                                sideband=sideband, bare_g0=g0)
        return cls(g_eff=g_eff, detuning=detuning, duration=duration,
                   sideband=sideband, bare_g0=g0)
