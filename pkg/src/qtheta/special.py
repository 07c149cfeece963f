"""One- and two-dimensional (complementary) error functions and Bernoulli polynomials.

The two-dimensional kernel E2 is evaluated through Owen's T function:

    E2(kappa; u1, u2) = 1 - 4c - 4*T(a, u2/u1) - 4*T(b, (u1-k*u2)/(u2+k*u1)),

with a = sqrt(2 pi) u1, b = sqrt(2 pi) (u2 + kappa u1)/sqrt(1+kappa^2) and
c = 1/2 iff a*b < 0 (axis cases degenerate to a single T term).  M2 follows
from the relation

    M2 = E2 + sgn(x1) sgn(x2) - sgn(x2) E(u1) - sgn(x1) E((u2+kappa*u1)/sqrt(1+kappa^2)),

written in the coordinates x1 = u1 - kappa*u2, x2 = u2 in which the
discontinuity loci are the coordinate axes; with sgn(0) = 0 this formula *is*
the continuous-in-the-interior extension used throughout, and replacing sgn by
sgn* (sgn*(0) = 1) gives M2*.

Lattice series multiply M2 by the exponentially growing |q^{-Q(n)}|, so this
module also provides the scaled kernel

    m2_scaled(kappa; x1, x2) = M2(kappa; u) * exp(pi |u|^2 / 2)

through a cancellation-free tail form: regrouping the Owen terms pairwise
gives M2 = 4*G(a, u2/u1) + 4*G(b, ...) with

    G(h, x) = sgn(x)/(2 pi) * int_{|x|}^{inf} exp(-h^2 (1+t^2)/2) / (1+t^2) dt,

whose integrand already carries the full Gaussian decay exp(-pi |u|^2); the
scaled tail integral is evaluated by panelled Gauss-Legendre quadrature with
the exponent computed in the stable form h^2*(y*sigma + sigma^2/2).
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import erf as _erf, erfcx as _erfcx, owens_t as _owens_t

SQRTPI = math.sqrt(math.pi)
SQRT2PI = math.sqrt(2.0 * math.pi)

# pi*|u|^2 below this: plain Owen formula (absolute error ~1e-16 * exp(pi|u|^2/2)
# stays below 1e-11); above: tail form with relative accuracy ~1e-13.
_SCALED_SPLIT = 24.0

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)
_PANEL_LEVELS = (0.1, 0.3, 0.7, 1.5, 3.0, 6.0, 11.0, 19.0, 31.0, 45.0)


def erf_E(u):
    """E(u) = 2*int_0^u exp(-pi w^2) dw = erf(sqrt(pi) u)."""
    return _erf(SQRTPI * np.asarray(u, dtype=float)) if np.ndim(u) else float(_erf(SQRTPI * u))


def erf_M(u):
    """M(u) = E(u) - sgn(u) = -sgn(u) * Gamma(1/2, pi u^2)/sqrt(pi), u != 0."""
    if np.ndim(u) == 0:
        if u == 0:
            raise ValueError("M(0) is undefined; use the sgn* conventions at 0")
        return float(-np.sign(u) * _erfcx(SQRTPI * abs(u)) * np.exp(-np.pi * u * u))
    u = np.asarray(u, dtype=float)
    if np.any(u == 0):
        raise ValueError("M(0) is undefined; use the sgn* conventions at 0")
    return -np.sign(u) * _erfcx(SQRTPI * np.abs(u)) * np.exp(-np.pi * u * u)


def m_scaled(w):
    """M(w) * exp(pi w^2 / 2), stable for large w (0 at w = 0 by sgn(0) = 0)."""
    w = np.asarray(w, dtype=float)
    return -np.sign(w) * _erfcx(SQRTPI * np.abs(w)) * np.exp(-0.5 * np.pi * w * w)


def _e2_array(kappa: float, u1, u2):
    """Vectorized E2(kappa; u1, u2) via Owen's T."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    s = math.hypot(1.0, kappa)
    a = SQRT2PI * u1
    b = SQRT2PI * (u2 + kappa * u1) / s
    den1 = np.where(u1 == 0.0, 1.0, u1)
    den2 = np.where(b == 0.0, 1.0, u2 + kappa * u1)
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = _owens_t(a, u2 / den1)
        t2 = _owens_t(b, (u1 - kappa * u2) / den2)
    c = np.where(a * b < 0.0, 0.5, 0.0)
    generic = 1.0 - 4.0 * c - 4.0 * t1 - 4.0 * t2
    out = np.where(u1 == 0.0, 4.0 * _owens_t(b, kappa), generic)
    out = np.where(b == 0.0, 4.0 * _owens_t(a, kappa), out)
    return out


def erf_E2(kappa: float, u1, u2):
    """E2(kappa; u) = int sgn(w1) sgn(w2 + kappa w1) e^{-pi|w-u|^2} dw."""
    out = _e2_array(kappa, u1, u2)
    return out if out.ndim else float(out)


def _m2_from_x(kappa: float, x1, x2, sgn):
    """M2 (or M2* for sgn = sgn*) from the locus-adapted coordinates."""
    s = math.hypot(1.0, kappa)
    u1 = x1 + kappa * x2
    u2 = x2
    w2 = (u2 + kappa * u1) / s
    return (_e2_array(kappa, u1, u2) + sgn(x1) * sgn(x2)
            - sgn(x2) * _erf(SQRTPI * u1) - sgn(x1) * _erf(SQRTPI * w2))


def _sgn(x):
    return np.sign(x)


def _sgn_star(x):
    return np.where(np.asarray(x, dtype=float) >= 0.0, 1.0, -1.0)


def erf_M2(kappa: float, u1, u2):
    """M2(kappa; u1, u2), extended across the loci with sgn(0) = 0."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    out = _m2_from_x(kappa, u1 - kappa * u2, u2, _sgn)
    return out if out.ndim else float(out)


def erf_M2_star(kappa: float, u1, u2):
    """M2 with every sgn replaced by sgn* (sgn*(0) = 1)."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    out = _m2_from_x(kappa, u1 - kappa * u2, u2, _sgn_star)
    return out if out.ndim else float(out)


def erf_derivative(kind: str, kappa: float, u1, u2):
    """First partial derivatives of M2/E2: kind in {M2_10, M2_01, E2_10, E2_01}."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    s = math.hypot(1.0, kappa)
    gauss_cross = np.exp(-np.pi * (u2 + kappa * u1) ** 2 / (s * s))
    arg = (u1 - kappa * u2) / s
    if kind == "M2_10":
        out = 2.0 * np.exp(-np.pi * u1 * u1) * erf_M(u2) + (2.0 * kappa / s) * gauss_cross * erf_M(arg)
    elif kind == "M2_01":
        out = (2.0 / s) * gauss_cross * erf_M(arg)
    elif kind == "E2_10":
        out = 2.0 * np.exp(-np.pi * u1 * u1) * _erf(SQRTPI * u2) + (2.0 * kappa / s) * gauss_cross * _erf(SQRTPI * arg)
    elif kind == "E2_01":
        out = (2.0 / s) * gauss_cross * _erf(SQRTPI * arg)
    else:
        raise ValueError(f"unknown derivative kind {kind!r}")
    return out if np.ndim(out) else float(out)


def owen_tail_k(h, y):
    """K(h, y) = int_0^inf exp(-h^2 (y*s + s^2/2)) / (1 + (y+s)^2) ds, vectorized.

    Equals exp(h^2 (1+y^2)/2) * int_{y}^{inf} e^{-h^2(1+t^2)/2}/(1+t^2) dt; the
    shifted form keeps the exponent free of cancellation.
    """
    h = np.asarray(h, dtype=float)
    y = np.asarray(y, dtype=float)
    h2 = h * h
    out = np.zeros(np.broadcast(h, y).shape)
    lo = np.zeros_like(out)
    for c in _PANEL_LEVELS:
        hi = 2.0 * c / (h2 * y + np.sqrt(h2 * h2 * y * y + 2.0 * c * h2))
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        for xg, wg in zip(_GL_NODES, _GL_WEIGHTS):
            sg = mid + half * xg
            out += (wg * half) * np.exp(-h2 * (y * sg + 0.5 * sg * sg)) / (1.0 + (y + sg) ** 2)
        lo = hi
    return out


def m2_scaled_from_x(kappa: float, x1, x2):
    """M2(kappa; u) * exp(pi |u|^2 / 2) with u1 = x1 + kappa*x2, u2 = x2.

    The x-coordinates are the natural lattice variables (x1 is proportional to
    n1, x2 to n2), so the discontinuity loci are detected exactly.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    scalar = x1.ndim == 0 and x2.ndim == 0
    x1, x2 = np.broadcast_arrays(np.atleast_1d(x1), np.atleast_1d(x2))
    s = math.hypot(1.0, kappa)
    u1 = x1 + kappa * x2
    u2 = x2
    w2 = (kappa / s) * x1 + s * x2            # (u2 + kappa*u1)/s
    r2 = u1 * u1 + u2 * u2
    pir2 = np.pi * r2
    out = np.empty_like(u1)

    small = pir2 < _SCALED_SPLIT
    if np.any(small):
        m2 = _m2_from_x(kappa, x1[small], x2[small], _sgn)
        out[small] = m2 * np.exp(0.5 * pir2[small])

    big = ~small
    if np.any(big):
        acc = np.zeros(big.sum())
        b_u1, b_u2 = u1[big], u2[big]
        b_w2, b_x1 = w2[big], x1[big]
        pair_a = (b_u1 != 0.0) & (b_u2 != 0.0)
        if np.any(pair_a):
            ah = b_u2[pair_a] / b_u1[pair_a]
            vals = owen_tail_k(SQRT2PI * np.abs(b_u1[pair_a]), np.abs(ah))
            acc[pair_a] += np.sign(ah) * vals
        pair_b = (b_w2 != 0.0) & (b_x1 != 0.0)
        if np.any(pair_b):
            ak = b_x1[pair_b] / (b_w2[pair_b] * s)
            vals = owen_tail_k(SQRT2PI * np.abs(b_w2[pair_b]), np.abs(ak))
            acc[pair_b] += np.sign(ak) * vals
        out[big] = (2.0 / np.pi) * acc * np.exp(-0.5 * pir2[big])

    return float(out[0]) if scalar else out


def m2_star_scaled_from_x(kappa: float, x1, x2):
    """M2*(kappa; u) * exp(pi |u|^2 / 2); differs from m2_scaled only on loci."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    scalar = x1.ndim == 0 and x2.ndim == 0
    x1, x2 = np.broadcast_arrays(np.atleast_1d(x1), np.atleast_1d(x2))
    out = np.array(m2_scaled_from_x(kappa, x1, x2), copy=True)
    s = math.hypot(1.0, kappa)
    on2 = (x2 == 0.0) & (x1 != 0.0)
    if np.any(on2):
        # M2* - M2 = -M(x1), scaled by exp(pi x1^2 / 2)
        z = x1[on2]
        out[on2] += np.sign(z) * _erfcx(SQRTPI * np.abs(z)) * np.exp(-0.5 * np.pi * z * z)
    on1 = (x1 == 0.0) & (x2 != 0.0)
    if np.any(on1):
        # M2* - M2 = -M(sqrt(1+kappa^2) x2); here |u|^2 = (1+kappa^2) x2^2
        w = s * x2[on1]
        out[on1] += np.sign(w) * _erfcx(SQRTPI * np.abs(w)) * np.exp(-0.5 * np.pi * w * w)
    both = (x1 == 0.0) & (x2 == 0.0)
    if np.any(both):
        out[both] += 1.0
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Bernoulli numbers and polynomials (exact rationals)

MAX_BERNOULLI_ORDER = 64


class UnsupportedOrderError(ValueError):
    pass


@lru_cache(maxsize=None)
def bernoulli_number(m: int) -> Fraction:
    """B_m = B_m(0), by the defining recurrence."""
    if m == 0:
        return Fraction(1)
    total = Fraction(0)
    for j in range(m):
        total += Fraction(math.comb(m + 1, j)) * bernoulli_number(j)
    return -total / (m + 1)


def bernoulli_poly(m: int, x) -> Fraction:
    """B_m(x) = sum_j C(m,j) B_j x^(m-j), exact for rational x."""
    if not (0 <= m <= MAX_BERNOULLI_ORDER):
        raise UnsupportedOrderError(f"Bernoulli order {m} outside [0, {MAX_BERNOULLI_ORDER}]")
    x = Fraction(x)
    acc = Fraction(0)
    xp = Fraction(1)
    for j in range(m, -1, -1):
        acc += Fraction(math.comb(m, j)) * bernoulli_number(j) * xp
        xp *= x
    return acc
