"""Arbitrary-precision (mpmath) counterparts of the special-function kernel.

Used by the extended-precision evaluation mode.  Lattice sums in that mode
evaluate near-origin terms (where O(1) cancellations happen) with mpmath and
keep the far tail in the double-precision scaled kernel, whose relative error
1e-13 lands below 1e-18 absolute once pi*|u|^2 > 24.
"""

from __future__ import annotations

import mpmath as mp

from .special import _SCALED_SPLIT, m2_scaled_from_x


def mp_E(u):
    return mp.erf(mp.sqrt(mp.pi) * u)


def mp_M(u):
    if u == 0:
        raise ValueError("M(0) is undefined")
    return -mp.sign(u) * mp.erfc(mp.sqrt(mp.pi) * abs(u))


def mp_owens_t(h, a):
    """Owen's T(h, a) by tanh-sinh quadrature of the defining integral."""
    h = mp.mpf(h)
    a = mp.mpf(a)
    if a == 0:
        return mp.mpf(0)
    if mp.isinf(a):
        return mp.sign(a) * mp.erfc(abs(h) / mp.sqrt(2)) / 4
    f = lambda t: mp.e ** (-h * h * (1 + t * t) / 2) / (1 + t * t)
    return mp.quad(f, [0, a]) / (2 * mp.pi)


def mp_E2(kappa, u1, u2):
    kappa = mp.mpf(kappa)
    u1 = mp.mpf(u1)
    u2 = mp.mpf(u2)
    s = mp.sqrt(1 + kappa * kappa)
    a = mp.sqrt(2 * mp.pi) * u1
    b = mp.sqrt(2 * mp.pi) * (u2 + kappa * u1) / s
    if a == 0:
        return 4 * mp_owens_t(b, kappa)
    if b == 0:
        return 4 * mp_owens_t(a, kappa)
    c = mp.mpf("0.5") if a * b < 0 else mp.mpf(0)
    return (1 - 4 * c - 4 * mp_owens_t(a, u2 / u1)
            - 4 * mp_owens_t(b, (u1 - kappa * u2) / (u2 + kappa * u1)))


def mp_M2_from_x(kappa, x1, x2, star=False):
    kappa = mp.mpf(kappa)
    x1 = mp.mpf(x1)
    x2 = mp.mpf(x2)
    s = mp.sqrt(1 + kappa * kappa)
    u1 = x1 + kappa * x2
    u2 = x2
    sgn = (lambda t: mp.mpf(1) if t >= 0 else mp.mpf(-1)) if star else mp.sign
    return (mp_E2(kappa, u1, u2) + sgn(x1) * sgn(x2)
            - sgn(x2) * mp_E(u1) - sgn(x1) * mp_E((u2 + kappa * u1) / s))


def mp_M2(kappa, u1, u2):
    kappa = mp.mpf(kappa)
    u1 = mp.mpf(u1)
    u2 = mp.mpf(u2)
    return mp_M2_from_x(kappa, u1 - kappa * u2, u2)


def mp_m2_scaled_from_x(kappa, x1, x2):
    """M2 * exp(pi |u|^2/2): mpmath near the origin, double kernel in the tail."""
    kappa = mp.mpf(kappa)
    x1 = mp.mpf(x1)
    x2 = mp.mpf(x2)
    u1 = x1 + kappa * x2
    u2 = x2
    pir2 = mp.pi * (u1 * u1 + u2 * u2)
    if pir2 < _SCALED_SPLIT:
        return mp_M2_from_x(kappa, x1, x2) * mp.e ** (pir2 / 2)
    return mp.mpf(m2_scaled_from_x(float(kappa), float(x1), float(x2)))


def mp_m_scaled(w):
    """M(w) * exp(pi w^2 / 2) (0 at w = 0)."""
    w = mp.mpf(w)
    if w == 0:
        return mp.mpf(0)
    return -mp.sign(w) * mp.erfc(mp.sqrt(mp.pi) * abs(w)) * mp.e ** (mp.pi * w * w / 2)
