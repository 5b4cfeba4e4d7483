# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Fixed-step RK4 for a driven two-level system. Compiled backend.

Same contract as _evolve_py.rk4_harmonic: the probe phase is restricted to
phi(t) = phase_amp * sin(omega t), which keeps the step loop free of Python
calls. Arbitrary phase functions stay on the Python backend.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()

BACKEND = "compiled"

cdef double TWO_PI = 6.283185307179586476925287


cdef inline void _deriv(double t, double complex ae, double complex ag,
                        double half_d, double half_g, double phase_amp,
                        double omega, double complex *de,
                        double complex *dg) noexcept nogil:
    cdef double ph = phase_amp * sin(omega * t)
    cdef double complex e = cos(ph) + 1j * sin(ph)
    cdef double complex mtpi = -1j * TWO_PI
    de[0] = mtpi * (half_d * ae + half_g * e * ag)
    dg[0] = mtpi * (half_g * ae / e - half_d * ag)


def rk4_harmonic(double delta, double g, double phase_amp, double omega,
                 double dt, long n_steps, long record_every=1):
    """Integrate with phi(t) = phase_amp * sin(omega t).

    Returns (times, excited_populations, final_norm); populations are
    recorded every record_every steps including both endpoints.
    """
    if dt <= 0 or n_steps < 1:
        raise ValueError("rk4 needs dt > 0 and n_steps >= 1")
    if record_every < 1 or n_steps % record_every != 0:
        raise ValueError("record_every must be >= 1 and divide n_steps")
    cdef long n_rec = n_steps // record_every + 1
    times_arr = np.empty(n_rec)
    pops_arr = np.empty(n_rec)
    cdef double[::1] times = times_arr
    cdef double[::1] pops = pops_arr
    cdef double complex ce = 0.0
    cdef double complex cg = 1.0
    cdef double half_d = 0.5 * delta
    cdef double half_g = 0.5 * g
    cdef double complex k1e, k1g, k2e, k2g, k3e, k3g, k4e, k4g
    cdef double t, norm
    cdef long step, rec

    times[0] = 0.0
    pops[0] = 0.0
    rec = 1
    with nogil:
        for step in range(n_steps):
            t = step * dt
            _deriv(t, ce, cg, half_d, half_g, phase_amp, omega, &k1e, &k1g)
            _deriv(t + 0.5 * dt, ce + 0.5 * dt * k1e, cg + 0.5 * dt * k1g,
                   half_d, half_g, phase_amp, omega, &k2e, &k2g)
            _deriv(t + 0.5 * dt, ce + 0.5 * dt * k2e, cg + 0.5 * dt * k2g,
                   half_d, half_g, phase_amp, omega, &k3e, &k3g)
            _deriv(t + dt, ce + dt * k3e, cg + dt * k3g,
                   half_d, half_g, phase_amp, omega, &k4e, &k4g)
            ce = ce + (dt / 6.0) * (k1e + 2.0 * k2e + 2.0 * k3e + k4e)
            cg = cg + (dt / 6.0) * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)
            if (step + 1) % record_every == 0:
                times[rec] = (step + 1) * dt
                pops[rec] = ce.real * ce.real + ce.imag * ce.imag
                rec += 1
    norm = ce.real * ce.real + ce.imag * ce.imag \
        + cg.real * cg.real + cg.imag * cg.imag
    return times_arr, pops_arr, norm
