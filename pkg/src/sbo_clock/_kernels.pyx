# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the reductions in `_kernels_py`.

Accumulation is compensated (Kahan) and strictly ordered (shells outer,
quasimomentum inner) so repeated runs and thread counts cannot change
emitted values.
"""

from libc.math cimport cos, sin, sqrt

import numpy as np

BACKEND = "compiled"


def excitation_grid(double[::1] sin_u, double[::1] amp, double delta0,
                    double g, double tp):
    cdef Py_ssize_t ns = amp.shape[0]
    cdef Py_ssize_t nq = sin_u.shape[0]
    out_arr = np.empty((ns, nq), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double g2 = g * g
    cdef double pitp = 3.14159265358979323846 * tp
    cdef double a, d, om2, s
    cdef Py_ssize_t i, j
    if g == 0.0:
        out_arr[:, :] = 0.0
        return out_arr
    with nogil:
        for i in range(ns):
            a = amp[i]
            for j in range(nq):
                d = delta0 + a * sin_u[j]
                om2 = g2 + d * d
                s = sin(pitp * sqrt(om2))
                out[i, j] = g2 * s * s / om2
    return out_arr


def weighted_lineshape_sums(double[:, ::1] weights, double[::1] sin_u,
                            double[::1] cos_u, double[::1] amp, double delta0,
                            double g, double tp, bint with_derivative):
    cdef Py_ssize_t ns = weights.shape[0]
    cdef Py_ssize_t nq = weights.shape[1]
    if amp.shape[0] != ns or sin_u.shape[0] != nq or cos_u.shape[0] != nq:
        raise ValueError("shape mismatch")
    cdef double g2 = g * g
    cdef double pitp = 3.14159265358979323846 * tp
    cdef double sum_p = 0.0, comp_p = 0.0
    cdef double sum_d = 0.0, comp_d = 0.0
    cdef double a, w, d, om2, om, x, s, c, p, dp, term, y, acc
    cdef Py_ssize_t i, j
    if g == 0.0:
        return 0.0, 0.0
    with nogil:
        for i in range(ns):
            a = amp[i]
            for j in range(nq):
                d = delta0 + a * sin_u[j]
                om2 = g2 + d * d
                om = sqrt(om2)
                x = pitp * om
                s = sin(x)
                p = g2 * s * s / om2
                w = weights[i, j]
                term = w * p
                y = term - comp_p
                acc = sum_p + y
                comp_p = (acc - sum_p) - y
                sum_p = acc
                if with_derivative:
                    c = cos(x)
                    dp = 2.0 * g2 * d * (pitp * s * c / (om2 * om) - s * s / (om2 * om2))
                    term = w * dp * a * cos_u[j]
                    y = term - comp_d
                    acc = sum_d + y
                    comp_d = (acc - sum_d) - y
                    sum_d = acc
    return sum_p, sum_d
