# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled lattice-sum kernel: phase-table exponential sums with compensated
accumulation, avoiding the large temporaries of the NumPy path."""

from libc.math cimport exp

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "cython"


def lattice_phase_sum(qints, long long hmod, long long mod, double tscale, roots):
    cdef cnp.int64_t[::1] q = np.ascontiguousarray(qints, dtype=np.int64)
    cdef cnp.complex128_t[::1] r = np.ascontiguousarray(roots, dtype=np.complex128)
    cdef Py_ssize_t i, n = q.shape[0]
    cdef long long idx
    cdef double w
    cdef double sr = 0.0, si = 0.0, cr = 0.0, ci = 0.0
    cdef double tr, ti, yr, yi
    for i in range(n):
        idx = (hmod * q[i]) % mod
        if idx < 0:
            idx += mod
        w = exp(-tscale * <double> q[i])
        # Kahan-compensated accumulation, real and imaginary parts
        yr = w * r[idx].real - cr
        tr = sr + yr
        cr = (tr - sr) - yr
        sr = tr
        yi = w * r[idx].imag - ci
        ti = si + yi
        ci = (ti - si) - yi
        si = ti
    return complex(sr, si)
