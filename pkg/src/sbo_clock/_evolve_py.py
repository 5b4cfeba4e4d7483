"""Fixed-step RK4 for a driven two-level system. Pure-Python backend.

Integrates i d(psi)/dt = 2 pi H(t) psi in the frame where the probe phase
phi(t) sits on the coupling:

  H(t) = [[ delta/2,            (g/2) e^{+i phi(t)} ],
          [ (g/2) e^{-i phi(t)}, -delta/2           ]]

with psi = (c_e, c_g), all frequencies in Hz. The state starts in the
ground state (0, 1).
"""

from __future__ import annotations

import cmath
import math

import numpy as np

BACKEND = "numpy"

_MINUS_TWO_PI_I = -2.0j * math.pi


def _check_args(dt: float, n_steps: int, record_every: int) -> int:
    if dt <= 0 or n_steps < 1:
        raise ValueError("rk4 needs dt > 0 and n_steps >= 1")
    if record_every < 1 or n_steps % record_every != 0:
        raise ValueError("record_every must be >= 1 and divide n_steps")
    return n_steps // record_every + 1


def rk4_two_level(delta: float, g: float, phase_fn, dt: float, n_steps: int,
                  record_every: int = 1):
    """Integrate with an arbitrary phase function phi(t) in radians.

    Returns (times, excited_populations, final_norm); populations are
    recorded every record_every steps including both endpoints.
    """
    n_rec = _check_args(dt, n_steps, record_every)
    times = np.empty(n_rec)
    pops = np.empty(n_rec)
    ce = 0.0 + 0.0j
    cg = 1.0 + 0.0j
    half_d = 0.5 * delta
    half_g = 0.5 * g

    def deriv(t, ae, ag):
        ph = phase_fn(t)
        e = cmath.exp(1j * ph)
        return (_MINUS_TWO_PI_I * (half_d * ae + half_g * e * ag),
                _MINUS_TWO_PI_I * (half_g * ae / e - half_d * ag))

    times[0] = 0.0
    pops[0] = 0.0
    rec = 1
    for step in range(n_steps):
        t = step * dt
        k1e, k1g = deriv(t, ce, cg)
        k2e, k2g = deriv(t + 0.5 * dt, ce + 0.5 * dt * k1e, cg + 0.5 * dt * k1g)
        k3e, k3g = deriv(t + 0.5 * dt, ce + 0.5 * dt * k2e, cg + 0.5 * dt * k2g)
        k4e, k4g = deriv(t + dt, ce + dt * k3e, cg + dt * k3g)
        ce = ce + (dt / 6.0) * (k1e + 2.0 * k2e + 2.0 * k3e + k4e)
        cg = cg + (dt / 6.0) * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)
        if (step + 1) % record_every == 0:
            times[rec] = (step + 1) * dt
            pops[rec] = ce.real * ce.real + ce.imag * ce.imag
            rec += 1
    norm = abs(ce) ** 2 + abs(cg) ** 2
    return times, pops, norm


def rk4_harmonic(delta: float, g: float, phase_amp: float, omega: float,
                 dt: float, n_steps: int, record_every: int = 1):
    """Same integrator with phi(t) = phase_amp * sin(omega t)."""
    return rk4_two_level(delta, g,
                         lambda t: phase_amp * math.sin(omega * t),
                         dt, n_steps, record_every)
