"""Backend selection for the two-level RK4 integrator.

The compiled extension covers the sinusoidal-phase case; the Python
implementation additionally accepts arbitrary phase callables and is always
used for those. Set SBO_PURE_PYTHON=1 to skip the extension entirely.
"""

from __future__ import annotations

import os

from . import _evolve_py

if os.environ.get("SBO_PURE_PYTHON", "") not in ("", "0"):
    _impl = _evolve_py
else:
    try:
        from . import _evolve as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _evolve_py

rk4_harmonic = _impl.rk4_harmonic
rk4_two_level = _evolve_py.rk4_two_level


def backend_name() -> str:
    return _impl.BACKEND
