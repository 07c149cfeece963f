"""Direct evaluation of the partial theta family F = F1 + F2 + F3.

F1 sums eps(alpha) * q^{Q(n)} over the shifted cones alpha + N_0^2 for alpha
in the doubled set J; F2 and F3 are the one-dimensional boundary sums over
J1* and J2*.  Evaluation points are q = exp(2 pi i h/k - t) with t > 0.

Root-of-unity phases are exact: s^2 Q(n) is an integer for n in alpha + Z^2,
so each phase is a power of exp(2 pi i / (k s^2)) selected by integer residue
arithmetic; only the real factor exp(-t Q(n)) is floating point.  Tails are
certified with a Gaussian bound through the smallest eigenvalue of the form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp
import numpy as np

from ._kernels import lattice_phase_sum
from .domain import FamilySpec, QPoint, ShiftPair, derived_sets, require_valid
from .precision import STANDARD, Precision

MAX_CONE_POINTS = 10_000_000


class TruncationError(RuntimeError):
    """Tail bound not reachable within the lattice-point cap."""

    def __init__(self, message, achieved_bound):
        super().__init__(message)
        self.achieved_bound = achieved_bound


@dataclass(frozen=True)
class EvalRequest:
    spec: FamilySpec
    point: QPoint
    t: float
    tail_bound: float = 1e-12


def _cone_tail_bound(t: float, lam: float, radius: float) -> float:
    """Bound on sum of exp(-t*Q(n)) over cone points with sup-norm > radius."""
    if radius <= 1.0:
        return math.inf
    c = t * lam
    r0 = radius - 1.0
    return math.exp(-c * r0 * r0) / c + 5.0 * math.sqrt(math.pi / c) * math.erfc(math.sqrt(c) * r0) / 2.0


def _cone_radius(t: float, lam: float, tail: float) -> float:
    c = t * lam
    arg = math.log(max((1.0 / c + 5.0 * math.sqrt(math.pi / c)) / tail, 2.0))
    radius = 1.0 + math.sqrt(arg / c)
    while _cone_tail_bound(t, lam, radius) > tail:
        radius *= 1.25
        if (radius + 2.0) ** 2 > MAX_CONE_POINTS:
            raise TruncationError(
                f"tail bound {tail:g} unreachable within {MAX_CONE_POINTS} points",
                _cone_tail_bound(t, lam, radius),
            )
    return radius


def _roots_table(mod: int):
    j = np.arange(mod)
    return np.exp(2j * np.pi * j / mod)


def _mp_roots_table(mod: int):
    return [mp.expjpi(mp.mpf(2 * j) / mod) for j in range(mod)]


def _cone_qints(spec: FamilySpec, alpha: ShiftPair, radius: float):
    """Integer values s^2*Q(n) over the cone alpha + N_0^2, sup-norm <= radius(+)."""
    s = spec.s
    f = spec.form
    m1_max = int(math.ceil(radius - float(alpha.alpha1))) + 1
    m2_max = int(math.ceil(radius - float(alpha.alpha2))) + 1
    m1 = np.arange(max(m1_max, 1), dtype=np.int64)
    m2 = np.arange(max(m2_max, 1), dtype=np.int64)
    n1 = s * m1 + (s * alpha.r1 + alpha.x1)
    n2 = s * m2 + (s * alpha.r2 + alpha.x2)
    g1 = n1[:, None]
    g2 = n2[None, :]
    q = f.a1 * g1 * g1 + f.a2 * g1 * g2 + f.a3 * g2 * g2
    q = q.ravel()
    if alpha.is_integral():
        # omit n = (0,0)
        keep = ~((g1 == 0) & (g2 == 0)).ravel()
        q = q[keep]
    return q


def _phase_sum(qints, point: QPoint, s: int, t, precision: Precision) -> complex:
    mod = point.k * s * s
    hmod = point.h % mod
    if precision.extended:
        roots = _mp_roots_table(mod)
        with precision.ctx():
            tm = mp.mpf(t) if not isinstance(t, mp.mpf) else t
            terms_re = []
            terms_im = []
            for q in qints.tolist():
                w = mp.e ** (-tm * q / (s * s))
                z = roots[(hmod * q) % mod]
                terms_re.append(w * z.real)
                terms_im.append(w * z.imag)
            return complex(mp.fsum(terms_re), mp.fsum(terms_im))
    return lattice_phase_sum(qints, hmod, mod, float(t) / (s * s), _roots_table(mod))


def eval_F1(spec: FamilySpec, point: QPoint, t, tail_bound: float = 1e-12,
            precision: Precision = STANDARD) -> complex:
    """F1 at q = exp(2 pi i h/k - t), tail below tail_bound."""
    require_valid(spec)
    if t <= 0:
        raise ValueError("t must be positive")
    j, _, _ = derived_sets(spec)
    lam = spec.form.min_eigenvalue()
    per_alpha = tail_bound / len(j)
    radius = _cone_radius(float(t), lam, per_alpha)
    total = 0j
    for alpha, eps in j:
        qints = _cone_qints(spec, alpha, radius)
        total += float(eps) * _phase_sum(qints, point, spec.s, t, precision)
    return total


def _line_qints(coeff: int, beta: Fraction, s: int, radius: float):
    """Integer s^2 * coeff * j^2 over j in beta + N_0, j <= radius(+)."""
    m_max = max(int(math.ceil(radius - float(beta))) + 1, 1)
    m = np.arange(m_max, dtype=np.int64)
    jj = s * m + int(beta * s)
    return coeff * jj * jj, jj


def _sgn_star(x: Fraction) -> int:
    return 1 if x >= 0 else -1


def _eval_boundary(spec, point, t, tail_bound, precision, jsub, coeff, shift_index):
    """Common body of F2/F3: the difference of two shifted 1-D partial thetas."""
    if t <= 0:
        raise ValueError("t must be positive")
    if not jsub:
        return 0j
    lam = float(coeff)
    per_sum = tail_bound / (2 * len(jsub))
    c = float(t) * lam
    radius = 1.0 + math.sqrt(math.log(max(2.0 / (c * per_sum), 2.0)) / c)
    while 2.0 * math.exp(-c * (radius - 1.0) ** 2) / c > per_sum:
        radius *= 1.25
        if radius > MAX_CONE_POINTS:
            raise TruncationError("1-D tail unreachable", 2.0 * math.exp(-c * (radius - 1.0) ** 2) / c)
    total = 0j
    for alpha, eps in jsub:
        sign_coord = alpha.alpha1 if shift_index == 2 else alpha.alpha2
        sum_coord = alpha.alpha2 if shift_index == 2 else alpha.alpha1
        omit_zero = alpha.is_integral()
        inner = 0j
        for beta, part_sign in ((1 - sum_coord, 1), (sum_coord, -1)):
            qints, jj = _line_qints(coeff, beta, spec.s, radius)
            if omit_zero:
                qints = qints[jj != 0]
            inner += part_sign * _phase_sum(qints, point, spec.s, t, precision)
        total += float(eps) * _sgn_star(sign_coord) * inner
    return -0.5 * total


def eval_F2(spec: FamilySpec, point: QPoint, t, tail_bound: float = 1e-12,
            precision: Precision = STANDARD) -> complex:
    """F2: the J1* boundary sum with exponent a3 j^2 (0 when J1* is empty)."""
    require_valid(spec)
    _, j1, _ = derived_sets(spec)
    return _eval_boundary(spec, point, t, tail_bound, precision, j1, spec.form.a3, 2)


def eval_F3(spec: FamilySpec, point: QPoint, t, tail_bound: float = 1e-12,
            precision: Precision = STANDARD) -> complex:
    """F3: the J2* boundary sum with exponent a1 j^2 (0 when J2* is empty)."""
    require_valid(spec)
    _, _, j2 = derived_sets(spec)
    return _eval_boundary(spec, point, t, tail_bound, precision, j2, spec.form.a1, 3)


def eval_F(spec: FamilySpec, point: QPoint, t, tail_bound: float = 1e-12,
           precision: Precision = STANDARD) -> complex:
    """F = F1 + F2 + F3 under a shared tail budget (a third each)."""
    third = tail_bound / 3.0
    return (eval_F1(spec, point, t, third, precision)
            + eval_F2(spec, point, t, third, precision)
            + eval_F3(spec, point, t, third, precision))


def eval_F_tau(spec: FamilySpec, tau: complex, tail_bound: float = 1e-12) -> complex:
    """F at an interior point q = exp(2 pi i tau), Im tau > 0 (float phases)."""
    require_valid(spec)
    v = tau.imag
    if v <= 0:
        raise ValueError("tau must lie in the upper half plane")
    t = 2.0 * math.pi * v
    j, j1, j2 = derived_sets(spec)
    lam = spec.form.min_eigenvalue()
    radius = _cone_radius(t, lam, tail_bound / (2 * len(j)))
    s = spec.s
    total = 0j
    for alpha, eps in j:
        qints = _cone_qints(spec, alpha, radius)
        total += float(eps) * complex(np.sum(np.exp(2j * np.pi * tau * qints / (s * s))))
    for jsub, coeff, idx in ((j1, spec.form.a3, 2), (j2, spec.form.a1, 3)):
        for alpha, eps in jsub:
            sign_coord = alpha.alpha1 if idx == 2 else alpha.alpha2
            sum_coord = alpha.alpha2 if idx == 2 else alpha.alpha1
            inner = 0j
            for beta, part_sign in ((1 - sum_coord, 1), (sum_coord, -1)):
                qints, jj = _line_qints(coeff, beta, s, radius)
                if alpha.is_integral():
                    qints = qints[jj != 0]
                inner += part_sign * complex(np.sum(np.exp(2j * np.pi * tau * qints / (s * s))))
            total += -0.5 * float(eps) * _sgn_star(sign_coord) * inner
    return total
