"""NumPy fallback for the hot lattice-sum kernel."""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "pure"


def lattice_phase_sum(qints, hmod: int, mod: int, tscale: float, roots) -> complex:
    """sum_i exp(-tscale * qints[i]) * roots[(hmod * qints[i]) % mod].

    qints are the integer values s^2*Q(n); roots is the table of the mod-th
    roots of unity; the result is accumulated exactly (math.fsum).
    """
    qints = np.asarray(qints, dtype=np.int64)
    idx = (hmod * qints) % mod
    terms = np.exp(-tscale * qints.astype(float)) * np.asarray(roots)[idx]
    return complex(math.fsum(terms.real), math.fsum(terms.imag))
