"""Exact rational parameters and affine energies.

Every energy on the two-cluster graph has the form ``A + B*eps + C*h`` with
integer coefficients.  Keeping the coefficients lets the oracle compare
energies without floating rounding, which matters at regime boundaries
such as ``h == -eps``.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import NamedTuple, Union

import numpy as np

Number = Union[int, float, str, Fraction]


def to_rational(x: Number) -> Fraction:
    """Parse a user value as an exact rational.

    Floats go through their shortest decimal repr, so ``0.3`` becomes
    ``3/10`` rather than the nearest binary fraction.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("boolean is not a number")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not np.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot parse {x!r} as a rational")


class Affine(NamedTuple):
    """Energy ``const + eps*eps_coef + field*h`` with integer coefficients."""

    const: int
    eps: int
    field: int

    def __add__(self, other: "Affine") -> "Affine":  # type: ignore[override]
        return Affine(self.const + other.const, self.eps + other.eps,
                      self.field + other.field)

    def __sub__(self, other: "Affine") -> "Affine":
        return Affine(self.const - other.const, self.eps - other.eps,
                      self.field - other.field)

    def __neg__(self) -> "Affine":
        return Affine(-self.const, -self.eps, -self.field)

    def scale(self, k: int) -> "Affine":
        return Affine(k * self.const, k * self.eps, k * self.field)

    def exact(self, epsilon: Fraction, h: Fraction) -> Fraction:
        return self.const + self.eps * epsilon + self.field * h

    def value(self, epsilon, h) -> float:
        return float(self.const + self.eps * float(epsilon) + self.field * float(h))


ZERO = Affine(0, 0, 0)


def integer_scale(epsilon: Fraction, h: Fraction) -> tuple[int, int, int]:
    """Return ``(den, e, f)`` with ``eps = e/den`` and ``h = f/den``.

    Multiplying an affine energy by ``den`` gives an integer, so arrays of
    energies can be compared exactly with integer numpy arithmetic.
    """
    den = lcm(epsilon.denominator, h.denominator)
    return den, int(epsilon * den), int(h * den)


def scaled_energies(coefs: np.ndarray, epsilon: Fraction, h: Fraction) -> tuple[np.ndarray, int]:
    """Integer energies ``den * H`` for an ``(m, 3)`` coefficient array."""
    den, e, f = integer_scale(epsilon, h)
    coefs = np.asarray(coefs, dtype=np.int64)
    return coefs[:, 0] * den + coefs[:, 1] * e + coefs[:, 2] * f, den
