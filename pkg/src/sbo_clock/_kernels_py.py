"""NumPy reference implementations of the hot reductions.

Kept semantically identical to the compiled module `_kernels`; either one
can serve the rest of the package. See `kernels` for backend selection.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def excitation_grid(sin_u, amp, delta0, g, tp):
    """Rabi excitation probability on the (shell, quasimomentum) grid.

    sin_u   (nq,) sin of the dressed-band phase per q point
    amp     (ns,) detuning amplitude per radial shell, Hz
    delta0  scalar base detuning delta + m nu_s, Hz
    g, tp   pulse coupling (Hz) and duration (s)

    Returns (ns, nq) probabilities.
    """
    sin_u = np.asarray(sin_u, dtype=float)
    amp = np.asarray(amp, dtype=float)
    if g == 0.0:
        return np.zeros((amp.size, sin_u.size))
    d = delta0 + amp[:, None] * sin_u[None, :]
    om2 = g * g + d * d
    s = np.sin((np.pi * tp) * np.sqrt(om2))
    return (g * g) * s * s / om2


def weighted_lineshape_sums(weights, sin_u, cos_u, amp, delta0, g, tp,
                            with_derivative):
    """Weighted sums of the lineshape and its quasimomentum derivative.

    weights (ns, nq), sin_u/cos_u (nq,), amp (ns,). Returns
    (sum w*P, sum w * dP/d(delta~) * amp * cos_u); the second entry is 0
    unless with_derivative.
    """
    weights = np.asarray(weights, dtype=float)
    sin_u = np.asarray(sin_u, dtype=float)
    amp = np.asarray(amp, dtype=float)
    if weights.shape != (amp.size, sin_u.size):
        raise ValueError("shape mismatch")
    if g == 0.0:
        return 0.0, 0.0
    g2 = g * g
    d = delta0 + amp[:, None] * sin_u[None, :]
    om2 = g2 + d * d
    om = np.sqrt(om2)
    x = (np.pi * tp) * om
    s = np.sin(x)
    p = g2 * s * s / om2
    sum_p = float(np.sum(weights * p))
    if not with_derivative:
        return sum_p, 0.0
    cos_u = np.asarray(cos_u, dtype=float)
    c = np.cos(x)
    dpdd = 2.0 * g2 * d * ((np.pi * tp) * s * c / (om2 * om) - s * s / (om2 * om2))
    sum_d = float(np.sum(weights * dpdd * (amp[:, None] * cos_u[None, :])))
    return sum_p, sum_d
