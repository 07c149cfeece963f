"""The double Eichler companion EE in three independent representations.

1. E_m2_series: the lattice series (1/2) sum_{alpha} eps sum_{n in alpha+Z^2}
   M2(kappa; u(n)) q^{-Q(n)}, with u(n1, n2) = (sqrt(v)(2 sqrt(a1) n1 +
   a2 n2 / sqrt(a1)), sqrt(v) m n2), m = sqrt(4 a3 - a2^2/a1), kappa = a2/sqrt(D).
   Since |q^{-Q(n)}| = exp(pi |u(n)|^2 / 2) exactly, each term is the scaled
   kernel m2_scaled times a unimodular phase.

2. E_star_decomposition: EE = E* + H1 + H2, where E* replaces sgn by sgn* and
   folds the lattice into cones, and H1/H2 are the boundary corrections with
   one-dimensional M factors (argument 2 sqrt(a3 v) j resp. 2 sqrt(a1 v) j).

3. quadrature_E: the defining iterated integral of the two theta kernels
   against (-i(w + tau))^{-1/2}, by adaptive quadrature on vertical paths.

The module also hosts the Shimura theta functions with their transformation
checks, the residue character sets that decompose EE into Shimura theta
double integrals, and the numerical check of the depth-two transformation
identity for a single component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp
import numpy as np
from scipy.integrate import quad

from .domain import FamilySpec, QPoint, QuadForm, derived_sets, require_valid
from .mpkernel import mp_m2_scaled_from_x, mp_m_scaled
from .precision import STANDARD, Precision
from .special import m2_scaled_from_x, m2_star_scaled_from_x, m_scaled

MAX_SERIES_POINTS = 40_000_000


class QuadratureError(RuntimeError):
    pass


class TruncationError(RuntimeError):
    def __init__(self, message, achieved_bound):
        super().__init__(message)
        self.achieved_bound = achieved_bound


# ---------------------------------------------------------------------------
# geometry of the M2 argument map

@dataclass(frozen=True)
class KappaFrame:
    """The argument map of the M2 lattice series for a given form."""

    a1: int
    a2: int
    a3: int
    m: float
    kappa: float

    @classmethod
    def from_form(cls, form: QuadForm) -> "KappaFrame":
        m = math.sqrt(4.0 * form.a3 - form.a2 ** 2 / form.a1)
        kappa = form.a2 / math.sqrt(form.disc)
        return cls(form.a1, form.a2, form.a3, m, kappa)

    def u(self, n1, n2, v: float):
        sq = math.sqrt(v)
        return (sq * (2.0 * math.sqrt(self.a1) * n1 + self.a2 * n2 / math.sqrt(self.a1)),
                sq * self.m * n2)

    def x(self, n1, n2, v: float):
        """Locus-adapted coordinates: x1 = 2 sqrt(a1 v) n1, x2 = sqrt(v) m n2."""
        sq = math.sqrt(v)
        return (2.0 * math.sqrt(self.a1 * v) * n1, sq * self.m * n2)


# ---------------------------------------------------------------------------
# lattice enumeration helpers

def _lattice_qmax(form: QuadForm, v: float, tail: float, n_cones: int) -> float:
    """Q-cutoff so that sum of 2*exp(-2 pi v Q(n)) beyond is < tail."""
    lam = form.min_eigenvalue()
    c = 2.0 * math.pi * v * lam

    def plane_tail(radius):
        r0 = max(radius - 1.0, 0.5)
        return n_cones * 2.0 * (4.0 * math.exp(-c * r0 * r0) / c
                                + 12.0 * math.sqrt(math.pi / c) * math.erfc(math.sqrt(c) * r0) / 2.0)

    radius = 1.0 + math.sqrt(max(math.log(max(plane_tail(1.5) / tail, 2.0)), 1.0) / c)
    while plane_tail(radius) > tail:
        radius *= 1.25
        if radius * radius > MAX_SERIES_POINTS:
            raise TruncationError("series tail unreachable", plane_tail(radius))
    return radius


def _full_lattice(alpha, radius: float):
    """Integer offsets (i1, i2) with sup-norm of n = alpha + i below radius(+)."""
    lo1 = int(math.floor(-radius - float(alpha.alpha1))) - 1
    hi1 = int(math.ceil(radius - float(alpha.alpha1))) + 1
    lo2 = int(math.floor(-radius - float(alpha.alpha2))) - 1
    hi2 = int(math.ceil(radius - float(alpha.alpha2))) + 1
    i1 = np.arange(lo1, hi1 + 1, dtype=np.int64)
    i2 = np.arange(lo2, hi2 + 1, dtype=np.int64)
    return np.repeat(i1, len(i2)), np.tile(i2, len(i1))


def _series_terms(spec: FamilySpec, alpha, v: float, radius: float):
    """(x1, x2, qints, mask) arrays for n in alpha + Z^2 within the radius."""
    s = spec.s
    f = spec.form
    i1, i2 = _full_lattice(alpha, radius)
    nn1 = s * i1 + (s * alpha.r1 + alpha.x1)     # s * n1, integer
    nn2 = s * i2 + (s * alpha.r2 + alpha.x2)
    qints = f.a1 * nn1 * nn1 + f.a2 * nn1 * nn2 + f.a3 * nn2 * nn2
    if alpha.is_integral():
        keep = ~((nn1 == 0) & (nn2 == 0))
        nn1, nn2, qints = nn1[keep], nn2[keep], qints[keep]
    frame = KappaFrame.from_form(f)
    x1 = 2.0 * math.sqrt(f.a1 * v) * (nn1 / s)
    x2 = math.sqrt(v) * frame.m * (nn2 / s)
    return x1, x2, qints, frame


def _phase_values(qints, spec: FamilySpec, re_tau):
    """Phases e^{-2 pi i Re(tau) Q(n)}; exact residue arithmetic for rational Re."""
    s2 = spec.s * spec.s
    if isinstance(re_tau, QPoint):
        mod = re_tau.k * s2
        roots = np.exp(-2j * np.pi * np.arange(mod) / mod)
        return roots[(re_tau.h * qints) % mod]
    return np.exp(-2j * np.pi * float(re_tau) * qints / s2)


def ecal_alpha(spec: FamilySpec, alpha, tau: complex, tail: float = 1e-10) -> complex:
    """E_alpha(tau) = (1/2) sum_{n in alpha + Z^2} M2(kappa; u(n)) q^{-Q(n)}."""
    v = tau.imag
    if v <= 0:
        raise ValueError("tau must lie in the upper half plane")
    radius = _lattice_qmax(spec.form, v, tail, 1)
    x1, x2, qints, frame = _series_terms(spec, alpha, v, radius)
    vals = m2_scaled_from_x(frame.kappa, x1, x2)
    phases = _phase_values(qints, spec, tau.real)
    terms = vals * phases
    return 0.5 * complex(math.fsum(terms.real), math.fsum(terms.imag))


def E_m2_series(spec: FamilySpec, tau: complex, tail: float = 1e-10) -> complex:
    """EE(tau) as the M2 lattice series over J*."""
    require_valid(spec)
    total = 0j
    for alpha, eps in spec.jstar:
        total += float(eps) * ecal_alpha(spec, alpha, tau, tail / max(len(spec.jstar), 1))
    return total


def E_m2_series_at_root(spec: FamilySpec, point: QPoint, t, tail: float = 1e-12,
                        precision: Precision = STANDARD) -> complex:
    """EE at tau = h/k + i t/(2 pi) with exact root-of-unity phases.

    Extended mode evaluates near-origin terms (pi |u|^2 < 24, where the O(1)
    sign cancellations live) in mpmath and keeps the Gaussian tail in the
    double-precision scaled kernel, whose per-term absolute error is below
    1e-18 there.
    """
    require_valid(spec)
    with precision.ctx():
        v = float(t) / (2.0 * math.pi)
        radius = _lattice_qmax(spec.form, v, tail, len(spec.jstar))
        total_re, total_im = [], []
        s2 = spec.s * spec.s
        mod = point.k * s2
        for alpha, eps in spec.jstar:
            x1, x2, qints, frame = _series_terms(spec, alpha, v, radius)
            vals = m2_scaled_from_x(frame.kappa, x1, x2)
            if precision.extended:
                tm = t if isinstance(t, mp.mpf) else mp.mpf(t)
                vm = tm / (2 * mp.pi)
                kap = mp.mpf(spec.form.a2) / mp.sqrt(spec.form.disc)
                mm = mp.sqrt(4 * spec.form.a3 - mp.mpf(spec.form.a2) ** 2 / spec.form.a1)
                roots = [mp.expjpi(mp.mpf(-2 * j) / mod) for j in range(mod)]
                u1 = x1 + frame.kappa * x2
                near = np.pi * (u1 * u1 + x2 * x2) < 24.0
                eps_f = float(eps)
                for idx in range(len(qints)):
                    q = int(qints[idx])
                    z = roots[(point.h * q) % mod]
                    if near[idx]:
                        # recompute the lattice coordinates exactly in mp
                        nn1 = Fraction(int(round(x1[idx] / (2.0 * math.sqrt(spec.form.a1 * v)) * spec.s)), spec.s)
                        nn2 = Fraction(int(round(x2[idx] / (math.sqrt(v) * frame.m) * spec.s)), spec.s)
                        mx1 = 2 * mp.sqrt(spec.form.a1 * vm) * mp.mpf(nn1.numerator) / nn1.denominator
                        mx2 = mp.sqrt(vm) * mm * mp.mpf(nn2.numerator) / nn2.denominator
                        val = mp_m2_scaled_from_x(kap, mx1, mx2)
                    else:
                        val = mp.mpf(float(vals[idx]))
                    total_re.append(eps_f * val * z.real)
                    total_im.append(eps_f * val * z.imag)
            else:
                phases = _phase_values(qints, spec, point)
                terms = float(eps) * vals * phases
                total_re.append(math.fsum(terms.real))
                total_im.append(math.fsum(terms.imag))
        if precision.extended:
            return 0.5 * mp.mpc(mp.fsum(total_re), mp.fsum(total_im))
        return 0.5 * complex(math.fsum(np.atleast_1d(total_re)), math.fsum(np.atleast_1d(total_im)))


# ---------------------------------------------------------------------------
# E* + H1 + H2

def E_star_decomposition(spec: FamilySpec, tau: complex, tail: float = 1e-11):
    """EE = E* + H1 + H2: returns the three pieces as a tuple."""
    require_valid(spec)
    v = tau.imag
    if v <= 0:
        raise ValueError("tau must lie in the upper half plane")
    f = spec.form
    s = spec.s
    j, j1, j2 = derived_sets(spec)
    frame = KappaFrame.from_form(f)
    radius = _lattice_qmax(f, v, tail, 2 * len(j))

    def cone_sum(alpha, eps, flip):
        i1, i2 = _full_lattice(alpha, radius)
        keep = (i1 >= 0) & (i2 >= 0)
        i1, i2 = i1[keep], i2[keep]
        nn1 = s * i1 + (s * alpha.r1 + alpha.x1)
        nn2 = s * i2 + (s * alpha.r2 + alpha.x2)
        if alpha.is_integral():
            k2 = ~((nn1 == 0) & (nn2 == 0))
            nn1, nn2 = nn1[k2], nn2[k2]
        sign1 = -1.0 if flip else 1.0
        x1 = sign1 * 2.0 * math.sqrt(f.a1 * v) * (nn1 / s)
        x2 = math.sqrt(v) * frame.m * (nn2 / s)
        qints = f.a1 * nn1 * nn1 + sign1 * f.a2 * nn1 * nn2 + f.a3 * nn2 * nn2
        vals = m2_star_scaled_from_x(frame.kappa, x1, x2)
        s2 = s * s
        phases = np.exp(-2j * np.pi * tau.real * qints / s2)
        terms = float(eps) * vals * phases
        return complex(math.fsum(terms.real), math.fsum(terms.imag))

    estar = 0j
    for alpha, eps in j:
        estar += 0.5 * cone_sum(alpha, eps, flip=False)
    for alpha, eps in j:
        # J~ = {(1 - alpha_1, alpha_2)} with inherited weights
        tilde = alpha.__class__.from_rationals(1 - alpha.alpha1, alpha.alpha2, s)
        estar += 0.5 * cone_sum(tilde, eps, flip=True)

    def h_sum(jsub, coeff, use_second):
        if not jsub:
            return 0j
        total = 0j
        rad = math.sqrt(radius * radius * f.min_eigenvalue() / coeff) + 2.0
        for alpha, eps in jsub:
            sign_coord = alpha.alpha1 if use_second else alpha.alpha2
            sum_coord = alpha.alpha2 if use_second else alpha.alpha1
            sgn_star = 1.0 if sign_coord >= 0 else -1.0
            inner = 0j
            for beta, part_sign in ((sum_coord, 1), (1 - sum_coord, -1)):
                m_max = max(int(math.ceil(rad - float(beta))) + 1, 1)
                mm = np.arange(m_max, dtype=np.int64)
                jj = s * mm + int(beta * s)          # s * j, integer
                if alpha.is_integral():
                    jj = jj[jj != 0]
                w = 2.0 * math.sqrt(coeff * v) * (jj / s)
                qints = coeff * jj * jj
                phases = np.exp(-2j * np.pi * tau.real * qints / (s * s))
                terms = m_scaled(w) * phases
                inner += part_sign * complex(math.fsum(terms.real), math.fsum(terms.imag))
            total += float(eps) * sgn_star * inner
        return -0.5 * total

    h1 = h_sum(j1, f.a3, use_second=True)
    h2 = h_sum(j2, f.a1, use_second=False)
    return estar, h1, h2


# ---------------------------------------------------------------------------
# Shimura theta functions

def shimura_theta(nu: int, A: int, h: int, N: int, tau: complex,
                  tail: float = 1e-14) -> complex:
    """Theta_nu(A, h, N; tau) = sum_{m = h mod N} m^nu q^{A m^2/(2 N^2)}."""
    if nu not in (0, 1):
        raise ValueError("nu must be 0 or 1")
    if N % A and A != N:
        pass
    if A < 1 or N < 1 or N % A != 0:
        raise ValueError("need A | N")
    if (h * A) % N != 0:
        raise ValueError("need N | h A")
    v = tau.imag
    if v <= 0:
        raise ValueError("tau must lie in the upper half plane")
    c = math.pi * v * A / (N * N)
    m_abs = 1.0
    while (m_abs + N) ** nu * 2.0 * math.exp(-c * m_abs * m_abs) / min(c * m_abs, 1.0) > tail:
        m_abs *= 1.4
        if m_abs > 1e8:
            raise TruncationError("theta tail unreachable", None)
    jmax = int(m_abs / N) + 2
    ms = h + N * np.arange(-jmax, jmax + 1, dtype=np.int64)
    terms = ms ** nu * np.exp(1j * np.pi * tau * A * ms.astype(float) ** 2 / (N * N))
    return complex(np.sum(terms))


def kronecker_symbol(a: int, n: int) -> int:
    """Extended Jacobi (Kronecker) symbol (a / n)."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -1
    # factor out 2s from n
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            sign = -sign
    a %= n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                sign = -sign
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            sign = -sign
        a %= n
    return sign if n == 1 else 0


def shimura_S_residual(nu: int, A: int, h: int, N: int, tau: complex,
                       tail: float = 1e-14) -> float:
    """|LHS - RHS| of the S-transformation of Theta_nu at tau."""
    lhs = shimura_theta(nu, A, h, N, -1.0 / tau, tail)
    pref = (-1j) ** nu * (-1j * tau) ** (0.5 + nu) * A ** -0.5
    total = 0j
    for k in range(N):
        if (A * k) % N == 0:
            total += np.exp(2j * np.pi * A * k * h / (N * N)) * shimura_theta(nu, A, k, N, tau, tail)
    return abs(lhs - pref * total)


def shimura_gamma0_residual(nu: int, A: int, h: int, N: int, mat, tau: complex,
                            tail: float = 1e-13) -> float:
    """|LHS - RHS| of the Gamma_0(2N) transformation law for a matrix with 2 | b."""
    a, b, c, d = mat
    if a * d - b * c != 1:
        raise ValueError("matrix must have determinant 1")
    if c % (2 * N) != 0:
        raise ValueError("matrix must lie in Gamma_0(2N)")
    if b % 2 != 0:
        raise ValueError("the law requires 2 | b")
    if d % 2 == 0:
        raise ValueError("d must be odd")
    mtau = (a * tau + b) / (c * tau + d)
    lhs = shimura_theta(nu, A, h, N, mtau, tail)
    eps_d = 1.0 if d % 4 == 1 else 1j
    pref = (np.exp(2j * np.pi * a * b * A * h * h / (2.0 * N * N))
            * kronecker_symbol(2 * A * c, d) * eps_d * (c * tau + d) ** (0.5 + nu))
    return abs(lhs - pref * shimura_theta(nu, A, (a * h) % N, N, tau, tail))


# ---------------------------------------------------------------------------
# residue character sets

@dataclass(frozen=True)
class ThetaCharSet:
    a_chars: tuple          # ((A1, A2, eps1), ...) mod 2 a1 s
    b_chars: tuple          # ((B1, B2, eps2), ...) mod 2 a3 s
    e_constant_a: bool
    e_constant_b: bool


def theta_char_sets(spec: FamilySpec) -> ThetaCharSet:
    """The residue sets decomposing EE into Shimura theta double integrals."""
    require_valid(spec)
    f = spec.form
    s = spec.s
    D = f.disc

    def build(coeff_outer, coeff_other, swap):
        mod = 2 * coeff_outer * s
        chars = []
        for alpha, eps in spec.jstar:
            sa1 = int(alpha.alpha1 * s)          # s*alpha1, integer
            sa2 = int(alpha.alpha2 * s)
            first, second = (sa2, sa1) if swap else (sa1, sa2)
            for rho in range(2 * coeff_outer):
                c1 = (2 * coeff_outer * first + f.a2 * second + f.a2 * rho * s) % mod
                c2 = (second + rho * s) % mod
                chars.append((c1, c2, eps))
        vals = {(c1 * c1 + D * c2 * c2) % mod for c1, c2, _ in chars}
        return tuple(chars), len(vals) == 1

    a_chars, const_a = build(f.a1, f.a3, swap=False)
    b_chars, const_b = build(f.a3, f.a1, swap=True)
    return ThetaCharSet(a_chars, b_chars, const_a, const_b)


# ---------------------------------------------------------------------------
# iterated quadrature of the defining integrals

def _quad_complex(fun, a, b, epsabs, limit=200):
    re, re_err = quad(lambda y: fun(y).real, a, b, epsabs=epsabs, limit=limit)
    im, im_err = quad(lambda y: fun(y).imag, a, b, epsabs=epsabs, limit=limit)
    if re_err + im_err > 100.0 * epsabs + 1e-13:
        raise QuadratureError(f"quadrature error estimate {re_err + im_err:.2e} too large")
    return re + 1j * im


def eichler_double_integral(f, g, base: complex, tau: complex, epsabs: float = 1e-10) -> complex:
    """int_{base}^{i inf} int_{w1}^{i inf} f(w1) g(w2) / (sqrt(-i(w1+tau)) sqrt(-i(w2+tau))) dw2 dw1.

    Both paths vertical; includes the i^2 Jacobian of the parametrizations.
    """

    def inner(w1):
        def g_int(y2):
            w2 = w1 + 1j * y2
            return g(w2) / np.sqrt(-1j * (w2 + tau))
        return _quad_complex(g_int, 0.0, np.inf, epsabs)

    def f_int(y1):
        w1 = base + 1j * y1
        return f(w1) * inner(w1) / np.sqrt(-1j * (w1 + tau))

    return -_quad_complex(f_int, 0.0, np.inf, epsabs)


def eichler_line_integral(f, base: complex, tau: complex, epsabs: float = 1e-11) -> complex:
    """int_{base}^{i inf} f(w) (-i(w + tau))^{-1/2} dw along the vertical path."""

    def f_int(y):
        w = base + 1j * y
        return f(w) / np.sqrt(-1j * (w + tau))

    return 1j * _quad_complex(f_int, 0.0, np.inf, epsabs)


def _theta12(spec: FamilySpec, alpha, w1: complex, w2: complex, tail: float = 1e-13) -> complex:
    """theta_1 + theta_2 of the defining integrand, truncated lattice sums."""
    f = spec.form
    s = spec.s
    D = f.disc
    y1 = w1.imag
    y2 = w2.imag
    total = 0j
    for (ca, cb, cc, swap) in ((f.a1, f.a2, D, False), (f.a3, f.a2, D, True)):
        # theta_1: coefficients (2 a1 n1 + a2 n2) n2; theta_2 swaps the roles
        c1 = math.pi * y1 / (2.0 * ca)
        c2 = math.pi * cc * y2 / (2.0 * ca)
        b1 = math.sqrt(max(math.log(1.0 / tail), 1.0) / c1) + 1.0
        b2 = math.sqrt(max(math.log(1.0 / tail), 1.0) / c2) + 1.0
        a1f, a2f = (float(alpha.alpha2), float(alpha.alpha1)) if swap else (float(alpha.alpha1), float(alpha.alpha2))
        # enumerate n with |2 ca n_f + cb n_s| <= b1, |n_s| <= b2
        n2lo = int(math.floor(-b2 - a2f)) - 1
        n2hi = int(math.ceil(b2 - a2f)) + 1
        acc = 0j
        for i2 in range(n2lo, n2hi + 1):
            ns = a2f + i2
            lo = (-b1 - cb * ns) / (2.0 * ca) - a1f
            hi = (b1 - cb * ns) / (2.0 * ca) - a1f
            i1 = np.arange(int(math.floor(lo)) - 1, int(math.ceil(hi)) + 2)
            nf = a1f + i1
            nu1 = 2.0 * ca * nf + cb * ns
            acc += complex(np.sum(nu1 * ns * np.exp(1j * math.pi * nu1 ** 2 * w1 / (2.0 * ca)
                                                    + 1j * math.pi * cc * ns * ns * w2 / (2.0 * ca))))
        total += acc / ca
    return total


def ecal_alpha_quadrature(spec: FamilySpec, alpha, tau: complex, epsabs: float = 1e-9) -> complex:
    """E_alpha(tau) by iterated quadrature of the theta kernels."""
    D = spec.form.disc

    def f(w1):
        return 1.0

    base = -np.conj(tau)

    def inner_fun(w1):
        def g_int(y2):
            w2 = w1 + 1j * y2
            return _theta12(spec, alpha, w1, w2) / np.sqrt(-1j * (w2 + tau))
        return _quad_complex(g_int, 0.0, np.inf, epsabs)

    def outer(y1):
        w1 = base + 1j * y1
        return inner_fun(w1) / np.sqrt(-1j * (w1 + tau))

    val = _quad_complex(outer, 0.0, np.inf, epsabs)
    return math.sqrt(D) / 4.0 * val


def quadrature_E(spec: FamilySpec, tau: complex, epsabs: float = 1e-8) -> complex:
    """EE(tau) straight from the defining double integrals (slow oracle)."""
    require_valid(spec)
    total = 0j
    for alpha, eps in spec.jstar:
        total += float(eps) * ecal_alpha_quadrature(spec, alpha, tau, epsabs)
    return total


def ecal_from_char_sets(spec: FamilySpec, tau: complex, epsabs: float = 1e-8) -> complex:
    """Ecal(tau) reassembled from the A/B Shimura double integrals."""
    require_valid(spec)
    f = spec.form
    s = spec.s
    D = f.disc
    chars = theta_char_sets(spec)
    base = -np.conj(tau)
    total = 0j
    for coeff, char_list in ((f.a1, chars.a_chars), (f.a3, chars.b_chars)):
        mod = 2 * coeff * s
        for (c1, c2, eps) in char_list:
            fa = lambda w, _c=c1: shimura_theta(1, mod, _c, mod, w)
            fb = lambda w, _c=c2: shimura_theta(1, mod, _c, mod, D * w)
            val = eichler_double_integral(fa, fb, base, tau, epsabs)
            total += -math.sqrt(D) / (4.0 * coeff * s * s) * float(eps) * val
    return total


def depth_two_transform_residual(spec: FamilySpec, tau: complex, charA,
                                 epsabs: float = 1e-8, verbatim_sign: bool = False) -> float:
    """Residual of the depth-two S-transformation identity for one A-component.

    LHS combines I_{A1,A2}(tau) with the root-of-unity average of the
    transformed double integrals (collapsed into twisted theta kernels); RHS
    is the boundary double integral from 0 plus the I*r - r*r error terms.
    With verbatim_sign the average enters with the opposite (printed) sign.
    """
    require_valid(spec)
    f = spec.form
    s = spec.s
    D = f.disc
    A1, A2 = charA
    na = 2 * f.a1 * s
    nb = 2 * D * f.a1 * s

    th_a = lambda w: shimura_theta(1, na, A1, na, w)
    th_b = lambda w: shimura_theta(1, nb, (D * A2) % nb, nb, w)

    def twisted(A_char, mod_theta):
        def fun(w):
            v = w.imag
            c = math.pi * v / mod_theta
            bound = math.sqrt(max(math.log(1e14), 1.0) / c) + 1.0
            ms = np.arange(-int(bound) - 1, int(bound) + 2, dtype=float)
            return complex(np.sum(ms * np.exp(2j * np.pi * ms * A_char / na)
                                  * np.exp(1j * math.pi * ms ** 2 * w / mod_theta)))
        return fun

    tw_a = twisted(A1, na)
    tw_b = twisted(A2, nb)

    stau = -1.0 / tau
    i_here = eichler_double_integral(th_a, th_b, -np.conj(tau), tau, epsabs)
    i_there = eichler_double_integral(tw_a, tw_b, -np.conj(stau), stau, epsabs)
    avg = i_there / ((-1j * tau) * (2.0 * f.a1 * s * math.sqrt(D)))
    lhs = i_here - avg if verbatim_sign else i_here + avg

    boundary = eichler_double_integral(th_a, th_b, 0.0, tau, epsabs)
    i_a = eichler_line_integral(th_a, -np.conj(tau), tau)
    r_a = eichler_line_integral(th_a, 0.0, tau)
    r_b = eichler_line_integral(th_b, 0.0, tau)
    rhs = boundary + i_a * r_b - r_a * r_b
    return abs(lhs - rhs)
