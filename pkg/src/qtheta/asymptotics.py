"""Euler-Maclaurin expansions of F at roots of unity, with exact coefficients.

The generic 1-D and 2-D Euler-Maclaurin formulas are exposed as operations on
rapid-decay function handles; the expansion of F assembles them for the
Gaussian kernels exp(-Q(x)), exp(-a3 x^2), exp(-a1 x^2) whose derivatives are
integer-coefficient polynomials times the kernel (an exact recurrence) and
whose axis integrals are half-line Gaussian moments Gamma((d+1)/2)/(2 c^((d+1)/2)).

Production assembly uses the pairing of alpha with 1-alpha, under which all
half-integer powers of t cancel and only odd Bernoulli-index terms survive on
the axes; the unpaired assembly over the full doubled set (all blocks, both
parities) is kept for verifying exactly that cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath as mp
import numpy as np

from .domain import FamilySpec, QPoint, QuadForm, derived_sets, require_valid
from .precision import STANDARD, Precision
from .quantum_set import main_term_sum
from .special import bernoulli_poly

MEMBER_TOL = 1e-10


class NonMemberError(ValueError):
    """Expansion at a point whose main term does not vanish."""

    def __init__(self, message, growing_term):
        super().__init__(message)
        self.growing_term = growing_term


# ---------------------------------------------------------------------------
# derivative recurrences for Gaussian kernels

@lru_cache(maxsize=None)
def _gauss2d_poly(form: QuadForm, n1: int, n2: int):
    """P with d^{n1+n2}/dx1^{n1} dx2^{n2} e^{-Q} = P * e^{-Q}, as {(i,j): int}."""
    if n1 == 0 and n2 == 0:
        return ((0, 0, 1),)
    if n1 > 0:
        prev = _gauss2d_poly(form, n1 - 1, n2)
        dq = ((1, 0, 2 * form.a1), (0, 1, form.a2))
    else:
        prev = _gauss2d_poly(form, n1, n2 - 1)
        dq = ((1, 0, form.a2), (0, 1, 2 * form.a3))
    var = 0 if n1 > 0 else 1
    acc: dict[tuple[int, int], int] = {}
    for (i, j, c) in prev:
        # derivative of the monomial
        if var == 0 and i > 0:
            acc[(i - 1, j)] = acc.get((i - 1, j), 0) + c * i
        if var == 1 and j > 0:
            acc[(i, j - 1)] = acc.get((i, j - 1), 0) + c * j
        # times -dQ/dvar
        for (di, dj, dc) in dq:
            key = (i + di, j + dj)
            acc[key] = acc.get(key, 0) - c * dc
    return tuple((i, j, c) for (i, j), c in sorted(acc.items()) if c)


def f1_deriv00(form: QuadForm, n1: int, n2: int) -> int:
    """Exact value of the (n1, n2) partial of exp(-Q) at the origin."""
    for (i, j, c) in _gauss2d_poly(form, n1, n2):
        if i == 0 and j == 0:
            return c
    return 0


def gauss1d_deriv0(c: int, n: int) -> int:
    """n-th derivative of exp(-c x^2) at 0 (0 for odd n)."""
    if n % 2:
        return 0
    m = n // 2
    return math.factorial(n) // math.factorial(m) * (-c) ** m


def _half_moment(d: int, c: int, extended: bool):
    """int_0^inf x^d exp(-c x^2) dx."""
    if extended:
        return mp.gamma(mp.mpf(d + 1) / 2) / (2 * mp.mpf(c) ** (mp.mpf(d + 1) / 2))
    return math.gamma((d + 1) / 2) / (2.0 * c ** ((d + 1) / 2.0))


def f1_axis_integral(form: QuadForm, axis: int, n: int, extended: bool = False):
    """int_0^inf of the pure-axis partial of exp(-Q) along the other axis slice.

    axis=1: int_0^inf (d/dx2)^n exp(-Q)(x1, 0) dx1 (slice kernel exp(-a1 x1^2));
    axis=2: the symmetric integral with the roles of x1 and x2 swapped.
    """
    poly = _gauss2d_poly(form, 0, n) if axis == 1 else _gauss2d_poly(form, n, 0)
    total = mp.mpf(0) if extended else 0.0
    for (i, j, c) in poly:
        if axis == 1 and j == 0:
            total += c * _half_moment(i, form.a1, extended)
        elif axis == 2 and i == 0:
            total += c * _half_moment(j, form.a3, extended)
    return total


def gauss_cone_integral(form: QuadForm, extended: bool = False):
    """I = int over the first quadrant of exp(-Q) = arccos(a2/(2 sqrt(a1 a3)))/sqrt(D)."""
    if extended:
        return mp.acos(form.a2 / (2 * mp.sqrt(form.a1 * form.a3))) / mp.sqrt(form.disc)
    return math.acos(form.a2 / (2.0 * math.sqrt(form.a1 * form.a3))) / math.sqrt(form.disc)


# ---------------------------------------------------------------------------
# generic Euler-Maclaurin operations

class Gaussian1D:
    """Handle for exp(-c x^2) with exact derivative access."""

    def __init__(self, c: int):
        self.c = c

    def deriv0(self, n: int):
        return gauss1d_deriv0(self.c, n)

    def integral(self):
        return _half_moment(0, self.c, False)


class GaussianCone2D:
    """Handle for exp(-Q(x)) on the first quadrant."""

    def __init__(self, form: QuadForm):
        self.form = form

    def deriv00(self, n1: int, n2: int):
        return f1_deriv00(self.form, n1, n2)

    def axis_integral(self, axis: int, n: int):
        return f1_axis_integral(self.form, axis, n)

    def double_integral(self):
        return gauss_cone_integral(self.form)


@dataclass(frozen=True)
class Em1d:
    main: float                 # coefficient of 1/t
    corrections: tuple          # corrections[n] = coefficient of t^n


def em1d(fun, alpha, order: int) -> Em1d:
    """One-dimensional Euler-Maclaurin: sum f((n+alpha)t) ~ I/t - sum B_{n+1}(alpha)/(n+1)! f^(n)(0) t^n."""
    alpha = Fraction(alpha)
    corr = []
    for n in range(order + 1):
        try:
            d = fun.deriv0(n)
        except Exception as exc:
            raise ValueError(f"derivative order {n} unavailable: {exc}") from exc
        b = bernoulli_poly(n + 1, alpha) / math.factorial(n + 1)
        corr.append(-float(b) * d)
    return Em1d(fun.integral(), tuple(corr))


@dataclass(frozen=True)
class Em2d:
    main: float                 # coefficient of 1/t^2
    axis1: tuple                # axis1[n2] = coefficient of t^(n2-1)
    axis2: tuple                # axis2[n1] = coefficient of t^(n1-1)
    corner: dict                # corner[(n1, n2)] = coefficient of t^(n1+n2)


def em2d(fun, alpha, order: int) -> Em2d:
    """Two-dimensional Euler-Maclaurin blocks for sum over N_0^2 of f((n+alpha)t)."""
    a1 = Fraction(alpha[0])
    a2 = Fraction(alpha[1])
    ax1 = []
    ax2 = []
    for n in range(order + 1):
        b2 = bernoulli_poly(n + 1, a2) / math.factorial(n + 1)
        ax1.append(-float(b2) * fun.axis_integral(1, n))
        b1 = bernoulli_poly(n + 1, a1) / math.factorial(n + 1)
        ax2.append(-float(b1) * fun.axis_integral(2, n))
    corner = {}
    for n1 in range(order + 1):
        b1 = bernoulli_poly(n1 + 1, a1) / math.factorial(n1 + 1)
        for n2 in range(order + 1):
            b2 = bernoulli_poly(n2 + 1, a2) / math.factorial(n2 + 1)
            corner[(n1, n2)] = float(b1) * float(b2) * fun.deriv00(n1, n2)
    return Em2d(fun.double_integral(), tuple(ax1), tuple(ax2), corner)


# ---------------------------------------------------------------------------
# the assembled expansion of F

@dataclass(frozen=True)
class AsymptoticSeries:
    """F(e^{2 pi i h/k - t}) ~ growing_term/t + sum_m coeffs[m] t^m."""

    point: QPoint
    side: str                   # "F" or "E"
    order: int
    coeffs: tuple
    growing_term: complex

    def partial_sum(self, t):
        acc = 0j
        tp = 1.0 if not isinstance(t, mp.mpf) else mp.mpf(1)
        for c in self.coeffs:
            acc = acc + c * tp
            tp = tp * t
        return acc


def _phases(mod: int, extended: bool):
    if extended:
        return [mp.expjpi(mp.mpf(2 * j) / mod) for j in range(mod)]
    return np.exp(2j * np.pi * np.arange(mod) / mod)


def _num(x: Fraction, extended: bool):
    return mp.mpf(x.numerator) / x.denominator if extended else float(x)


def expand_F(spec: FamilySpec, p: QPoint, order: int,
             precision: Precision = STANDARD,
             allow_growing: bool = False) -> AsymptoticSeries:
    """Coefficients a_{h,k}(m), m <= order, of F at e^{2 pi i h/k - t}.

    Uses the paired assembly (only integer powers of t appear).  Refuses
    non-members unless allow_growing is set; the growing term (coefficient
    of 1/t) is always recorded.
    """
    require_valid(spec)
    if order < 0 or order > 8:
        raise ValueError("order must be between 0 and 8")
    ext = precision.extended
    with precision.ctx():
        f = spec.form
        s = spec.s
        delta = p.delta(s)
        ell_range = p.k * s // delta
        mod = p.k * s * s
        roots = _phases(mod, ext)
        _, j1, j2 = derived_sets(spec)

        growing_sum = main_term_sum(spec, p)
        growing = complex(growing_sum) * gauss_cone_integral(f) * (delta / (p.k * s)) ** 2
        if abs(growing_sum) > MEMBER_TOL and not allow_growing:
            raise NonMemberError(
                f"{p} is not in the quantum set (|main term| = {abs(growing_sum):.3e})",
                growing,
            )

        zero = mp.mpc(0) if ext else 0j
        coeffs = [zero for _ in range(order + 1)]
        lpow = Fraction(p.k * s, delta)

        # F1: corner and axis blocks over J*, paired
        ax1_int = [f1_axis_integral(f, 1, n, ext) for n in range(2 * order + 2)]
        ax2_int = [f1_axis_integral(f, 2, n, ext) for n in range(2 * order + 2)]
        for alpha, eps in spec.jstar:
            pair_weight = 2 if alpha.one_minus() != alpha else 1
            epsn = _num(eps, ext) * pair_weight
            for l1 in range(ell_range):
                b1v = alpha.alpha1 + l1
                beta1 = b1v * Fraction(delta, p.k * s)
                for l2 in range(ell_range):
                    b2v = alpha.alpha2 + l2
                    beta2 = b2v * Fraction(delta, p.k * s)
                    qint = f(s * (l1 + alpha.r1) + alpha.x1, s * (l2 + alpha.r2) + alpha.x2)
                    phase = roots[(p.h * qint) % mod]
                    w = epsn * phase
                    for m in range(order + 1):
                        acc = zero
                        # axis terms, odd derivative index only
                        b = bernoulli_poly(2 * m + 2, beta2) / math.factorial(2 * m + 2)
                        acc -= _num(b, ext) * ax1_int[2 * m + 1]
                        b = bernoulli_poly(2 * m + 2, beta1) / math.factorial(2 * m + 2)
                        acc -= _num(b, ext) * ax2_int[2 * m + 1]
                        # corner terms with n1 = n2 mod 2 and n1 + n2 = 2m
                        for n1 in range(2 * m + 1):
                            n2 = 2 * m - n1
                            d = f1_deriv00(f, n1, n2)
                            if d == 0:
                                continue
                            b12 = (bernoulli_poly(n1 + 1, beta1) * bernoulli_poly(n2 + 1, beta2)
                                   / (math.factorial(n1 + 1) * math.factorial(n2 + 1)))
                            acc += _num(b12, ext) * d
                        coeffs[m] = coeffs[m] + w * acc * _num(lpow ** (2 * m), ext)

        # F2 / F3 blocks (one-dimensional)
        for jsub, coeff_c, use_second in ((j1, f.a3, True), (j2, f.a1, False)):
            for alpha, eps in jsub:
                sign_coord = alpha.alpha1 if use_second else alpha.alpha2
                sum_coord = alpha.alpha2 if use_second else alpha.alpha1
                sgn_star = 1 if sign_coord >= 0 else -1
                epsn = _num(eps, ext) * sgn_star
                for r in range(ell_range):
                    for beta0, part_sign in ((1 - sum_coord, 1), (sum_coord, -1)):
                        bv = beta0 + r
                        beta = bv * Fraction(delta, p.k * s)
                        qint = coeff_c * (s * r + int(beta0 * s)) ** 2
                        phase = roots[(p.h * qint) % mod]
                        for m in range(order + 1):
                            d = gauss1d_deriv0(coeff_c, 2 * m)
                            b = bernoulli_poly(2 * m + 1, beta) / math.factorial(2 * m + 1)
                            term = 0.5 * epsn * part_sign * phase * _num(b, ext) * d
                            coeffs[m] = coeffs[m] + term * _num(lpow ** (2 * m), ext)

        out = tuple(coeffs) if ext else tuple(complex(c) for c in coeffs)
        return AsymptoticSeries(p, "F", order, out, growing)


def expand_F_raw(spec: FamilySpec, p: QPoint, order: int) -> dict:
    """Unpaired assembly over the full doubled set, all Euler-Maclaurin blocks.

    Returns {power: coefficient} with half-integer powers included, for
    verifying that the pairing cancellations are real.  Double precision only.
    """
    require_valid(spec)
    f = spec.form
    s = spec.s
    delta = p.delta(s)
    ell_range = p.k * s // delta
    mod = p.k * s * s
    roots = _phases(mod, False)
    j, j1, j2 = derived_sets(spec)

    out: dict[Fraction, complex] = {}

    def add(power: Fraction, value: complex):
        out[power] = out.get(power, 0j) + value

    lpow = float(p.k * s) / delta
    icone = gauss_cone_integral(f)
    ax1_int = [f1_axis_integral(f, 1, n) for n in range(2 * order + 2)]
    ax2_int = [f1_axis_integral(f, 2, n) for n in range(2 * order + 2)]

    for alpha, eps in j:
        epsn = float(eps)
        for l1 in range(ell_range):
            beta1 = (alpha.alpha1 + l1) * Fraction(delta, p.k * s)
            for l2 in range(ell_range):
                beta2 = (alpha.alpha2 + l2) * Fraction(delta, p.k * s)
                qint = f(s * (l1 + alpha.r1) + alpha.x1, s * (l2 + alpha.r2) + alpha.x2)
                w = epsn * roots[(p.h * qint) % mod]
                add(Fraction(-1), w * icone / lpow ** 2)
                for n in range(2 * order + 2):
                    b2 = float(bernoulli_poly(n + 1, beta2)) / math.factorial(n + 1)
                    add(Fraction(n - 1, 2), -w * b2 * ax1_int[n] * lpow ** (n - 1))
                    b1 = float(bernoulli_poly(n + 1, beta1)) / math.factorial(n + 1)
                    add(Fraction(n - 1, 2), -w * b1 * ax2_int[n] * lpow ** (n - 1))
                for n1 in range(2 * order + 1):
                    b1 = float(bernoulli_poly(n1 + 1, beta1)) / math.factorial(n1 + 1)
                    for n2 in range(2 * order + 1 - n1):
                        d = f1_deriv00(f, n1, n2)
                        if d == 0:
                            continue
                        b2 = float(bernoulli_poly(n2 + 1, beta2)) / math.factorial(n2 + 1)
                        add(Fraction(n1 + n2, 2), w * b1 * b2 * d * lpow ** (n1 + n2))

    for jsub, coeff_c, use_second in ((j1, f.a3, True), (j2, f.a1, False)):
        for alpha, eps in jsub:
            sign_coord = alpha.alpha1 if use_second else alpha.alpha2
            sum_coord = alpha.alpha2 if use_second else alpha.alpha1
            sgn_star = 1 if sign_coord >= 0 else -1
            epsn = float(eps) * sgn_star
            i_line = _half_moment(0, coeff_c, False)
            for r in range(ell_range):
                for beta0, part_sign in ((1 - sum_coord, 1), (sum_coord, -1)):
                    beta = (beta0 + r) * Fraction(delta, p.k * s)
                    qint = coeff_c * (s * r + int(beta0 * s)) ** 2
                    w = -0.5 * epsn * part_sign * roots[(p.h * qint) % mod]
                    add(Fraction(-1, 2), w * i_line / lpow)
                    for n in range(0, 2 * order + 1, 2):
                        d = gauss1d_deriv0(coeff_c, n)
                        b = float(bernoulli_poly(n + 1, beta)) / math.factorial(n + 1)
                        add(Fraction(n, 2), -w * b * d * lpow ** n)
    return out


def expand_E(spec: FamilySpec, p: QPoint, order: int,
             precision: Precision = STANDARD,
             allow_growing: bool = False) -> AsymptoticSeries:
    """Series of the companion EE at h/k + it/(2 pi): coefficients a_{-h,k}(m) (-1)^m."""
    base = expand_F(spec, QPoint.make(-p.h, p.k), order, precision, allow_growing)
    coeffs = tuple(c * (-1) ** m for m, c in enumerate(base.coeffs))
    return AsymptoticSeries(p, "E", order, coeffs, -base.growing_term)
