"""Kernel backend selection: compiled extension if built, NumPy otherwise.

Set QTHETA_FORCE_PURE=1 to force the NumPy fallback.
"""

from __future__ import annotations

import os
import warnings

from . import pure

if os.environ.get("QTHETA_FORCE_PURE"):
    backend = pure
else:
    try:
        from . import _fastsum as backend  # type: ignore[no-redef]
    except ImportError:
        warnings.warn("compiled kernel unavailable, using the NumPy fallback",
                      stacklevel=1)
        backend = pure

lattice_phase_sum = backend.lattice_phase_sum
BACKEND_NAME = backend.BACKEND_NAME


def available_backends():
    out = [pure]
    try:
        from . import _fastsum
        out.append(_fastsum)
    except ImportError:
        pass
    return out
