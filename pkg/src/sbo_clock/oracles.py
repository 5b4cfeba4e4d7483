"""Independent reference computations used to validate the fast paths.

Nothing here shares numerics with the production code: period averages go
through adaptive quadrature instead of fixed Gauss-Legendre panels, pulse
physics goes through direct integration of the two-level Schrodinger
equation instead of the closed-form lineshape, derivatives through
Richardson-extrapolated differences instead of the analytic chain rule,
and thermal weights through extended-precision arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import NumericsError
from .evolve import rk4_harmonic, rk4_two_level

__all__ = [
    "hopping_coefficient_quad",
    "rabi_coefficient_quad",
    "TwoLevelSim",
    "OracleTrace",
    "evolve_two_level",
    "finite_difference",
    "boltzmann_weights_reference",
]

_TWO_PI = 2.0 * math.pi


def _period_average(phase, period: float, tol: float) -> complex:
    """Average of exp(i phase(t)) over [0, period] by adaptive quadrature."""
    re, re_err = integrate.quad(lambda t: math.cos(phase(t)), 0.0, period,
                                epsabs=tol, epsrel=tol, limit=400)
    im, im_err = integrate.quad(lambda t: math.sin(phase(t)), 0.0, period,
                                epsabs=tol, epsrel=tol, limit=400)
    if max(re_err, im_err) > 100.0 * tol * period:
        raise NumericsError(
            f"adaptive period average error estimate {max(re_err, im_err):.3e} "
            "above tolerance")
    return complex(re, im) / period


def hopping_coefficient_quad(waveform, nu_s: float, n_res: int,
                             recoil_freq: float, hop: int = 1,
                             tol: float = 1e-12) -> complex:
    """Tunneling renormalization by adaptive quadrature.

    waveform needs value(t, nu_s). The drive-origin phase i^{n*hop} of even
    waveforms is removed, matching the production convention.
    """
    scale = math.pi / (4.0 * recoil_freq)
    n = int(n_res)
    hop = int(hop)

    def phase(t: float) -> float:
        return hop * (scale * float(waveform.value(t, nu_s))
                      + _TWO_PI * n * nu_s * t)

    avg = _period_average(phase, 1.0 / nu_s, tol)
    gauge = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)[(-n * hop) % 4]
    return gauge * avg


def rabi_coefficient_quad(waveform, nu_s: float, sideband: int,
                          soc_phase: float, tol: float = 1e-12) -> complex:
    """Probe renormalization by adaptive quadrature.

    waveform needs value(t, nu_s); its running integral is reconstructed by
    nested quadrature, so this route never touches a closed-form integral.
    """
    m = int(sideband)

    def running_integral(t: float) -> float:
        if t == 0.0:
            return 0.0
        val, _ = integrate.quad(lambda u: float(waveform.value(u, nu_s)),
                                0.0, t, epsabs=tol, epsrel=tol, limit=400)
        return val

    def phase(t: float) -> float:
        return -(soc_phase * running_integral(t) + _TWO_PI * m * nu_s * t)

    return _period_average(phase, 1.0 / nu_s, tol)


@dataclass(frozen=True)
class TwoLevelSim:
    """Direct-integration setup for one probe pulse.

    The probe phase is phi(t) = phase_amplitude * sin(2 pi drive_freq t)
    unless phase_fn (t -> radians) is given. detuning is the full probe
    detuning in the two-level frame; steps_per_cycle controls the RK4 step
    against the fastest frequency present.
    """

    coupling: float
    detuning: float
    duration: float
    phase_amplitude: float = 0.0
    drive_freq: float = 0.0
    phase_fn: object = None
    steps_per_cycle: int = 256
    record_points: int = 200


@dataclass(eq=False)
class OracleTrace:
    times: np.ndarray
    populations: np.ndarray
    norm: float

    @property
    def final(self) -> float:
        return float(self.populations[-1])


def evolve_two_level(sim: TwoLevelSim) -> OracleTrace:
    """Integrate the pulse and return the excited-population trace.

    Raises NumericsError when the state norm drifts by more than 1e-8.
    """
    if sim.duration <= 0:
        raise ValueError("sim.duration must be positive")
    fastest = max(abs(sim.detuning), abs(sim.coupling), abs(sim.drive_freq),
                  1.0 / sim.duration)
    per_rec = max(1, math.ceil(sim.duration * fastest * sim.steps_per_cycle
                               / sim.record_points))
    n_steps = per_rec * sim.record_points
    dt = sim.duration / n_steps
    if sim.phase_fn is not None:
        times, pops, norm = rk4_two_level(sim.detuning, sim.coupling,
                                          sim.phase_fn, dt, n_steps, per_rec)
    else:
        times, pops, norm = rk4_harmonic(sim.detuning, sim.coupling,
                                         sim.phase_amplitude,
                                         _TWO_PI * sim.drive_freq,
                                         dt, n_steps, per_rec)
    if abs(norm - 1.0) > 1e-8:
        raise NumericsError(
            f"two-level norm drifted to {norm!r}; reduce the step size")
    return OracleTrace(times=times, populations=pops, norm=norm)


def finite_difference(fn, x: float, h: float):
    """Richardson-extrapolated central difference of a scalar function.

    Returns (derivative, error_estimate); the estimate is the change between
    the h and h/2 central differences, which bounds the leading h^2 term.
    """
    if h <= 0:
        raise ValueError("finite_difference needs h > 0")
    d1 = (fn(x + h) - fn(x - h)) / (2.0 * h)
    d2 = (fn(x + 0.5 * h) - fn(x - 0.5 * h)) / h
    return (4.0 * d2 - d1) / 3.0, abs(d2 - d1) / 3.0


def boltzmann_weights_reference(energies, s_levels, kbt_freq: float,
                                dps: int = 60) -> np.ndarray:
    """Degeneracy-weighted Boltzmann distribution at dps decimal digits.

    energies is the (n_s, n_q) grid in Hz; s_levels the matching shell
    indices. Requires mpmath (test extra).
    """
    try:
        import mpmath
    except ImportError as exc:
        raise ImportError(
            "boltzmann_weights_reference needs mpmath; install the 'test' extra"
        ) from exc
    energies = np.asarray(energies, dtype=float)
    s_levels = np.asarray(s_levels)
    if energies.ndim != 2 or energies.shape[0] != s_levels.size:
        raise ValueError("energies must be (n_s, n_q) matching s_levels")
    with mpmath.workdps(dps):
        beta = -1.0 / mpmath.mpf(kbt_freq)
        raw = [[(int(s) + 1) * mpmath.exp(beta * mpmath.mpf(float(e)))
                for e in row]
               for s, row in zip(s_levels, energies)]
        z = mpmath.fsum(v for row in raw for v in row)
        out = np.array([[float(v / z) for v in row] for row in raw])
    return out
