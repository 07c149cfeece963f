"""Quadratic Gauss sums, the vanishing criteria, and quantum-set membership.

The quantum set Q = Q1 u Q2 u Q3 is decided by divisibility of the invariants
g(x) (for Q1) and by an exponent n with Q2 = {h in s^n Z}, Q3 = {k in s^n Z}.
When s divides no g the exponent is 1 or 2 according to whether Q(x) mod s is
constant across J; otherwise it is found by a direct vanishing search on the
Euler-Maclaurin main-term sum, which is the quantity the whole construction
is engineered to kill.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .domain import FamilySpec, QPoint, derived_sets, g_set, require_valid

MAX_ELL_RANGE = 4000


class ExponentNotFoundError(RuntimeError):
    """No exponent n <= n_max makes the main term vanish on the test grid."""


# ---------------------------------------------------------------------------
# exact vanishing certificates in Z[zeta_m]

@lru_cache(maxsize=None)
def _cyclotomic_poly(m: int) -> tuple[int, ...]:
    """Coefficients (ascending) of the m-th cyclotomic polynomial."""
    if m == 1:
        return (-1, 1)
    poly = [-1] + [0] * (m - 1) + [1]          # X^m - 1
    for d in range(1, m):
        if m % d == 0:
            poly = _polydiv_exact(poly, list(_cyclotomic_poly(d)))
    return tuple(poly)


def _polydiv_exact(num, den):
    """Exact division of integer polynomials (remainder must be zero)."""
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1]
        if c % den[-1]:
            raise ArithmeticError("non-exact polynomial division")
        c //= den[-1]
        out[i] = c
        if c:
            for j, dj in enumerate(den):
                num[i + j] -= c * dj
    if any(num[: len(den) - 1]):
        raise ArithmeticError("nonzero remainder in exact division")
    return out


@dataclass(frozen=True)
class CycloVector:
    """An element sum_j coeffs[j] * zeta_m^j of Z[zeta_m], coefficients exact."""

    modulus: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.modulus:
            raise ValueError("coefficient vector length must equal the modulus")
        if self.modulus > 16000:
            raise ValueError("modulus too large for the exact cyclotomic mode")

    def is_zero(self) -> bool:
        """Exact: zero in Z[zeta_m] iff the m-th cyclotomic polynomial divides."""
        phi = _cyclotomic_poly(self.modulus)
        rem = list(self.coeffs)
        dn = len(phi)
        for i in range(len(rem) - dn, -1, -1):
            c = rem[i + dn - 1]
            if c:
                for j in range(dn):
                    rem[i + j] -= c * phi[j]
        return not any(rem[: dn - 1])

    def complex_value(self) -> complex:
        j = np.arange(self.modulus)
        return complex(np.sum(np.array(self.coeffs) * np.exp(2j * np.pi * j / self.modulus)))


# ---------------------------------------------------------------------------
# Gauss sums

def gauss_sum(a: int, b: int, c: int) -> complex:
    """G(a, b, c) = sum_{n mod c} e^{2 pi i (a n^2 + b n)/c}."""
    if c < 1:
        raise ValueError("c must be a positive integer")
    n = np.arange(c, dtype=np.int64)
    idx = (a * n * n + b * n) % c
    counts = np.bincount(idx, minlength=c)
    return complex(np.sum(counts * np.exp(2j * np.pi * np.arange(c) / c)))


def gauss_sum_exact(a: int, b: int, c: int) -> CycloVector:
    n = np.arange(c, dtype=np.int64)
    idx = (a * n * n + b * n) % c
    counts = np.bincount(idx, minlength=c)
    return CycloVector(c, tuple(int(x) for x in counts))


def gauss_vanishes(a: int, b: int, c: int) -> bool:
    """True when one of the three vanishing criteria applies to G(a, b, c)."""
    g = math.gcd(a, c)
    if g > 1 and b % g != 0:
        return True
    if c % 4 == 0 and b % 2 == 1 and g == 1:
        return True
    if c % 4 == 2 and g == 1 and b == 0:
        return True
    return False


def lemma_applies(a: int, b: int, c: int) -> bool:
    """Whether any clause of the vanishing criteria matches the triple."""
    return gauss_vanishes(a, b, c)


# ---------------------------------------------------------------------------
# the Euler-Maclaurin main-term sum

def _ell_counts(spec: FamilySpec, p: QPoint):
    """Per-shift residue counts of h*s^2*Q(ell+alpha) mod k*s^2, ell mod ks/delta."""
    require_valid(spec)
    s = spec.s
    f = spec.form
    delta = p.delta(s)
    ell_range = p.k * s // delta
    if ell_range > MAX_ELL_RANGE:
        raise ValueError(f"ell range {ell_range} exceeds the cost cap {MAX_ELL_RANGE}")
    mod = p.k * s * s
    j, _, _ = derived_sets(spec)
    ell = np.arange(ell_range, dtype=np.int64)
    out = []
    for alpha, eps in j:
        n1 = (s * ell + s * alpha.r1 + alpha.x1)[:, None]
        n2 = (s * ell + s * alpha.r2 + alpha.x2)[None, :]
        q = f.a1 * n1 * n1 + f.a2 * n1 * n2 + f.a3 * n2 * n2
        idx = (p.h * q) % mod
        out.append((eps, np.bincount(idx.ravel(), minlength=mod)))
    return mod, out


def main_term_sum(spec: FamilySpec, p: QPoint) -> complex:
    """sum_{alpha in J} eps(alpha) sum_{ell mod ks/delta} e^{2 pi i (h/k) Q(ell+alpha)}."""
    mod, counts = _ell_counts(spec, p)
    roots = np.exp(2j * np.pi * np.arange(mod) / mod)
    total = 0j
    for eps, cnt in counts:
        total += float(eps) * complex(np.sum(cnt * roots))
    return total


def main_term_vanishes_exact(spec: FamilySpec, p: QPoint) -> bool:
    """Exact decision of main-term vanishing in the cyclotomic ring."""
    mod, counts = _ell_counts(spec, p)
    den = 1
    for eps, _ in counts:
        den = den * eps.denominator // math.gcd(den, eps.denominator)
    acc = np.zeros(mod, dtype=object)
    for eps, cnt in counts:
        w = int(eps * den)
        acc = acc + w * cnt.astype(object)
    return CycloVector(mod, tuple(int(x) for x in acc)).is_zero()


# ---------------------------------------------------------------------------
# membership

@dataclass(frozen=True)
class MembershipRecord:
    point: QPoint
    in_q1: bool
    in_q2: bool
    in_q3: bool
    exponent_n: int | None
    main_term: complex | None

    @property
    def is_member(self) -> bool:
        return self.in_q1 or self.in_q2 or self.in_q3


def q_mod_s_constant(spec: FamilySpec) -> bool:
    """Whether Q(x) mod s is constant across the fractional parts of J."""
    j, _, _ = derived_sets(spec)
    f = spec.form
    vals = {f(alpha.x1, alpha.x2) % spec.s for alpha, _ in j}
    return len(vals) == 1


_H_SIDE_COFACTORS = (1, 3, 5)
_COPRIME_PARTNERS = (1, 3, 5, 7, 11, 13)


def _vanishes_at(spec: FamilySpec, h: int, k: int, tol: float) -> bool | None:
    """None when the point exceeds the cost cap (skipped)."""
    if math.gcd(h, k) != 1:
        return None
    try:
        value = main_term_sum(spec, QPoint.make(h, k))
    except ValueError:
        return None
    return abs(value) < tol


def _exponent_search(spec: FamilySpec, n_max: int, tol: float):
    floor = 1 if q_mod_s_constant(spec) else 2
    s = spec.s
    s_primes = sorted({p for p in range(2, s + 1) if s % p == 0 and all(p % r for r in range(2, p))})
    for n in range(floor, n_max + 1):
        sn = s ** n
        checked = 0
        ok = True
        for c in _H_SIDE_COFACTORS:
            for k in _COPRIME_PARTNERS:
                res = _vanishes_at(spec, c * sn, k, tol)
                if res is None:
                    continue
                checked += 1
                if not res:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            for d in _H_SIDE_COFACTORS:
                if math.gcd(d, s) != 1:
                    continue
                for h in _COPRIME_PARTNERS:
                    res = _vanishes_at(spec, h, sn * d, tol)
                    if res is None:
                        continue
                    checked += 1
                    if not res:
                        ok = False
                        break
                if not ok:
                    break
        if ok and checked:
            caveat = False
            for p in s_primes:
                for h in _COPRIME_PARTNERS:
                    res = _vanishes_at(spec, h, sn * p, tol)
                    if res is False:
                        caveat = True
            return n, caveat
    raise ExponentNotFoundError(
        f"no exponent n <= {n_max} clears the main term; quantum set is Q1 only")


@lru_cache(maxsize=None)
def _exponent_cached(spec: FamilySpec, n_max: int, tol: float):
    g = g_set(spec)
    if all(gg % spec.s != 0 for gg in g):
        return (1 if q_mod_s_constant(spec) else 2), False
    return _exponent_search(spec, n_max, tol)


def determine_exponent(spec: FamilySpec, n_max: int = 8, tol: float = 1e-10) -> int:
    """The exponent n defining Q2 = {h in s^n Z} and Q3 = {k in s^n Z}."""
    require_valid(spec)
    return _exponent_cached(spec, n_max, tol)[0]


def exponent_diagnostics(spec: FamilySpec, n_max: int = 8, tol: float = 1e-10) -> dict:
    """Exponent plus the caveat flag for vanishing failures at higher s-powers."""
    require_valid(spec)
    try:
        n, caveat = _exponent_cached(spec, n_max, tol)
        return {"exponent": n, "higher_power_caveat": caveat, "found": True}
    except ExponentNotFoundError as exc:
        return {"exponent": None, "higher_power_caveat": False, "found": False,
                "reason": str(exc)}


def membership(spec: FamilySpec, p: QPoint, tol: float = 1e-10) -> MembershipRecord:
    """Decide h/k in Q1/Q2/Q3, with the main-term sum as a consistency witness."""
    require_valid(spec)
    s = spec.s
    g = g_set(spec)
    delta, gamma = p.delta(s), p.gamma(s)
    in_q1 = all(gg % (s // delta) != 0 and gg % (s // gamma) != 0 for gg in g)
    try:
        n = determine_exponent(spec, tol=tol)
        in_q2 = p.h % s ** n == 0
        in_q3 = p.k % s ** n == 0
    except ExponentNotFoundError:
        n, in_q2, in_q3 = None, False, False
    try:
        witness = main_term_sum(spec, p)
    except ValueError:
        witness = None
    return MembershipRecord(p, in_q1, in_q2, in_q3, n, witness)
