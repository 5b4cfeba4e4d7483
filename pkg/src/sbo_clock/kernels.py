"""Backend selection for the hot reductions.

The compiled extension is preferred when present; the NumPy module is the
fallback. Set SBO_PURE_PYTHON=1 to force the fallback (used by the parity
tests and the benchmark).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("SBO_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

excitation_grid = _impl.excitation_grid
weighted_lineshape_sums = _impl.weighted_lineshape_sums


def backend_name() -> str:
    """Either "compiled" or "numpy"."""
    return _impl.BACKEND
