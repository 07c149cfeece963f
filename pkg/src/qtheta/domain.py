"""Exact domain types: quadratic forms, shifted lattice families, rational points.

Everything here is exact arithmetic (ints and fractions.Fraction); the numeric
modules build on top of these types.  A family is the triple (Q, s, J*) with
weights eps, subject to the structural constraints that make the quantum-set
construction work:

  * gcd(a1, a2, a3) = 1 and D = 4*a1*a3 - a2^2 > 0,
  * for s != 1 no shift pair lies in Z^2,
  * each shift has at least one fractional part coprime to s (minimality),
  * the weights, extended to the doubled set J by eps(1-alpha) = eps(alpha),
    sum to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache


class InvalidFamilyError(ValueError):
    """Raised when an operation requires a structurally valid family."""


@dataclass(frozen=True)
class QuadForm:
    """Positive definite integral binary quadratic form a1*x^2 + a2*x*y + a3*y^2."""

    a1: int
    a2: int
    a3: int

    def __post_init__(self):
        if not all(isinstance(a, int) for a in (self.a1, self.a2, self.a3)):
            raise TypeError("coefficients must be integers")
        if self.a1 <= 0 or self.a2 <= 0 or self.a3 <= 0:
            # a2 = 0 is rejected: the construction assumes all three
            # coefficients are positive naturals.
            raise ValueError("coefficients must be positive integers")
        if math.gcd(math.gcd(self.a1, self.a2), self.a3) != 1:
            raise ValueError("gcd(a1, a2, a3) must be 1")
        if self.disc <= 0:
            raise ValueError("form must be positive definite (4*a1*a3 > a2^2)")

    @property
    def disc(self) -> int:
        """D = 4*a1*a3 - a2^2 (the form has discriminant -D)."""
        return 4 * self.a1 * self.a3 - self.a2 * self.a2

    def __call__(self, n1, n2):
        """Evaluate the form; works for ints, Fractions, floats and arrays."""
        return self.a1 * n1 * n1 + self.a2 * n1 * n2 + self.a3 * n2 * n2

    def gram(self):
        """Integer Gram matrix [[2*a1, a2], [a2, 2*a3]] of the bilinear form."""
        return ((2 * self.a1, self.a2), (self.a2, 2 * self.a3))

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue of [[a1, a2/2], [a2/2, a3]]; Q(x) >= lam*|x|^2."""
        tr = self.a1 + self.a3
        det = self.a1 * self.a3 - self.a2 * self.a2 / 4.0
        return 0.5 * (tr - math.sqrt(tr * tr - 4.0 * det))


@dataclass(frozen=True)
class ShiftPair:
    """A pair (alpha1, alpha2) of elements of Z[1/s], stored as r + x/s.

    The fractional parts are normalized to the window -s/2 <= x < s/2.
    """

    r1: int
    r2: int
    x1: int
    x2: int
    s: int

    def __post_init__(self):
        if self.s < 1:
            raise ValueError("s must be a positive integer")
        for x in (self.x1, self.x2):
            if not (-self.s <= 2 * x < self.s):
                raise ValueError(f"fractional part {x} outside [-s/2, s/2)")

    @classmethod
    def from_rationals(cls, alpha1: Fraction, alpha2: Fraction, s: int) -> "ShiftPair":
        a1 = Fraction(alpha1)
        a2 = Fraction(alpha2)
        rx = []
        for a in (a1, a2):
            num = a * s
            if num.denominator != 1:
                raise ValueError(f"{a} is not an element of Z[1/{s}]")
            x = int(num) % s
            if 2 * x >= s:
                x -= s
            r = int(a - Fraction(x, s))
            rx.append((r, x))
        return cls(rx[0][0], rx[1][0], rx[0][1], rx[1][1], s)

    @property
    def alpha1(self) -> Fraction:
        return self.r1 + Fraction(self.x1, self.s)

    @property
    def alpha2(self) -> Fraction:
        return self.r2 + Fraction(self.x2, self.s)

    def alpha(self) -> tuple[Fraction, Fraction]:
        return (self.alpha1, self.alpha2)

    def one_minus(self) -> "ShiftPair":
        """Componentwise 1 - alpha, renormalized to the canonical window."""
        return ShiftPair.from_rationals(1 - self.alpha1, 1 - self.alpha2, self.s)

    def is_integral(self) -> bool:
        return self.x1 == 0 and self.x2 == 0


@dataclass(frozen=True)
class FamilySpec:
    """A weighted shift family (Q, s, J*) defining the partial theta sum."""

    form: QuadForm
    s: int
    jstar: tuple[tuple[ShiftPair, Fraction], ...]

    def __post_init__(self):
        if self.s < 1:
            raise ValueError("s must be a positive integer")
        for alpha, eps in self.jstar:
            if alpha.s != self.s:
                raise ValueError("shift denominator does not match family s")
            if eps == 0:
                raise ValueError("weights must be nonzero")

    @classmethod
    def build(cls, form: QuadForm, s: int, entries) -> "FamilySpec":
        """Construct from (alpha1, alpha2, eps) triples of rationals."""
        jstar = tuple(
            (ShiftPair.from_rationals(Fraction(a1), Fraction(a2), s), Fraction(eps))
            for (a1, a2, eps) in entries
        )
        return cls(form, s, jstar)

    @property
    def n_shifts(self) -> int:
        return len(self.jstar)


def validate_family(spec: FamilySpec) -> list[str]:
    """Check the structural constraints; returns a list of violations (empty = valid)."""
    violations = []
    for alpha, _eps in spec.jstar:
        if spec.s != 1 and alpha.is_integral():
            violations.append(f"alpha={alpha.alpha()} lies in Z^2 (forbidden for s>1)")
        if math.gcd(alpha.x1, spec.s) != 1 and math.gcd(alpha.x2, spec.s) != 1:
            violations.append(
                f"alpha={alpha.alpha()} has no fractional part coprime to s={spec.s}"
            )
    total = Fraction(0)
    for alpha, eps in spec.jstar:
        total += eps if alpha.one_minus() == alpha else 2 * eps
    if total != 0:
        violations.append(f"sum of epsilon nonzero over J (={total})")
    return violations


def require_valid(spec: FamilySpec) -> None:
    violations = validate_family(spec)
    if violations:
        raise InvalidFamilyError("; ".join(violations))


def derived_sets(spec: FamilySpec):
    """Return (J, J1*, J2*).

    J doubles J* by 1-alpha with inherited weights (self-paired shifts are
    not repeated); J1*/J2* are the J* members with integral first/second
    coordinate.  All three preserve multiplicity.
    """
    require_valid(spec)
    j = []
    for alpha, eps in spec.jstar:
        j.append((alpha, eps))
        mirrored = alpha.one_minus()
        if mirrored != alpha:
            j.append((mirrored, eps))
    j1 = tuple((a, e) for a, e in spec.jstar if a.alpha1.denominator == 1)
    j2 = tuple((a, e) for a, e in spec.jstar if a.alpha2.denominator == 1)
    return tuple(j), j1, j2


def g_of(spec: FamilySpec, alpha: ShiftPair) -> int:
    """g(x) = gcd(2*a1*x1 + a2*x2, a2*x1 + 2*a3*x2) on the fractional parts.

    Conventions: g((0,0)) = 1 and gcd(0, t) = t.
    """
    x1, x2 = alpha.x1, alpha.x2
    if x1 == 0 and x2 == 0:
        return 1
    f = spec.form
    return math.gcd(2 * f.a1 * x1 + f.a2 * x2, f.a2 * x1 + 2 * f.a3 * x2)


def g_set(spec: FamilySpec) -> frozenset[int]:
    """G = { g(x) : alpha in J }."""
    j, _, _ = derived_sets(spec)
    return frozenset(g_of(spec, alpha) for alpha, _ in j)


@dataclass(frozen=True)
class QPoint:
    """A reduced rational h/k with k >= 1."""

    h: int
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("denominator must be positive")
        if math.gcd(self.h, self.k) != 1:
            raise ValueError(f"{self.h}/{self.k} is not reduced")

    @classmethod
    def make(cls, h: int, k: int) -> "QPoint":
        if k == 0:
            raise ValueError("denominator must be nonzero")
        if k < 0:
            h, k = -h, -k
        g = math.gcd(h, k)
        return cls(h // g, k // g)

    def delta(self, s: int) -> int:
        """gcd(h, s), with the convention gcd(0, s) = s."""
        return math.gcd(self.h, s)

    def gamma(self, s: int) -> int:
        return math.gcd(self.k, s)

    def s_transform(self) -> "QPoint":
        """The modular S-action h/k -> -k/h (undefined at h = 0)."""
        if self.h == 0:
            raise ValueError("S(0/1) is the cusp at infinity, not a rational")
        return QPoint.make(-self.k, self.h)

    def __str__(self):
        return f"{self.h}/{self.k}"

    def as_fraction(self) -> Fraction:
        return Fraction(self.h, self.k)


@lru_cache(maxsize=None)
def _running_example() -> FamilySpec:
    return FamilySpec.build(
        QuadForm(2, 1, 1),
        4,
        [
            (Fraction(1, 4), Fraction(1, 4), 1),
            (Fraction(1, 4), Fraction(-1, 2), -1),
        ],
    )


def running_example() -> FamilySpec:
    """The standard worked example: Q = 2x^2 + xy + y^2 (D = 7), s = 4."""
    return _running_example()
