"""Exact univariate polynomials over the rationals."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import mpmath

from .matrix import RationalMatrix, int_charpoly, parse_rational


@dataclass(frozen=True)
class RationalPolynomial:
    """Coefficients constant term first; trailing zeros are stripped."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        cs = [parse_rational(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def of(cls, coeffs: Iterable) -> "RationalPolynomial":
        return cls(tuple(coeffs))

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, x):
        acc = 0 * x
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def mp_eval(self, x):
        """Horner evaluation at an mpmath number under the current precision."""
        acc = mpmath.mpf(0)
        for c in reversed(self.coeffs):
            acc = acc * x + mpmath.mpf(c.numerator) / c.denominator
        return acc

    def derivative(self) -> "RationalPolynomial":
        return RationalPolynomial(tuple(i * c for i, c in enumerate(self.coeffs) if i > 0))

    def monic(self) -> "RationalPolynomial":
        lc = self.leading
        return RationalPolynomial(tuple(c / lc for c in self.coeffs))

    def __add__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return RationalPolynomial(tuple(x + y for x, y in zip(a, b)))

    def __mul__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        if self.is_zero() or other.is_zero():
            return RationalPolynomial(())
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return RationalPolynomial(tuple(out))

    def divmod(self, other: "RationalPolynomial") -> tuple["RationalPolynomial", "RationalPolynomial"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return RationalPolynomial(()), self
        quot = [Fraction(0)] * (dq + 1)
        lc = other.leading
        for i in range(dq, -1, -1):
            q = rem[i + other.degree] / lc
            quot[i] = q
            if q:
                for j, c in enumerate(other.coeffs):
                    rem[i + j] -= q * c
        return RationalPolynomial(tuple(quot)), RationalPolynomial(tuple(rem[: other.degree]))

    def gcd(self, other: "RationalPolynomial") -> "RationalPolynomial":
        """Monic greatest common divisor (Euclid over Q)."""
        a, b = self, other
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        return a.monic() if not a.is_zero() else a

    def squarefree_part(self) -> "RationalPolynomial":
        g = self.gcd(self.derivative())
        if g.degree <= 0:
            return self.monic()
        return self.divmod(g)[0].monic()

    def evaluate_matrix(self, b: RationalMatrix) -> RationalMatrix:
        """Horner evaluation at a square matrix (used for Cayley-Hamilton checks)."""
        d = b.dim
        acc = RationalMatrix.identity(d).scale(0)
        eye = RationalMatrix.identity(d)
        for c in reversed(self.coeffs):
            acc = acc @ b + eye.scale(c)
        return acc


def char_poly(b: RationalMatrix) -> RationalPolynomial:
    """Exact monic characteristic polynomial det(xI - B).

    Computed on the integer numerator M of B = M/D, then rescaled:
    p_B(x) = D^{-d} p_M(Dx).
    """
    d = b.dim
    cm = int_charpoly(b.num)
    return RationalPolynomial(tuple(Fraction(c, b.den ** (d - i)) for i, c in enumerate(cm)))
