"""Exact rational matrices and compound (exterior power) matrices.

A :class:`RationalMatrix` is stored as an integer numerator matrix over one
positive common denominator, kept in lowest terms.  The bare integer helpers
(``int_matmul``, ``int_wedge`` ...) are the hot path used by the trace code,
which multiplies thousands of word products without normalising each one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import combinations
from typing import Iterable, Sequence

from ..errors import DimensionMismatch

IntMatrix = tuple[tuple[int, ...], ...]


def parse_rational(value) -> Fraction:
    """Parse an exact rational from an int, Fraction or string such as ``"-4/7"``.

    Floats are rejected: they would smuggle a rounded value into exact code.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip().replace("−", "-")
        if not text:
            raise ValueError("empty rational string")
        return Fraction(text)
    raise TypeError(f"cannot parse {value!r} as an exact rational")


def format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# --- integer kernels -------------------------------------------------------


def int_matmul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    cols = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a)


def int_det(m: Sequence[Sequence[int]]) -> int:
    """Determinant of an integer matrix by fraction-free Bareiss elimination."""
    n = len(m)
    if n == 0:
        return 1
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    a = [list(r) for r in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def int_wedge(m: IntMatrix, k: int) -> IntMatrix:
    """k-th compound of an integer matrix; subsets in lexicographic order."""
    d = len(m)
    if k == 0:
        return ((1,),)
    if k == 1:
        return m
    if k == d:
        return ((int_det(m),),)
    subsets = list(combinations(range(d), k))
    if k == 2:
        return tuple(
            tuple(m[i0][j0] * m[i1][j1] - m[i0][j1] * m[i1][j0] for (j0, j1) in subsets)
            for (i0, i1) in subsets
        )
    return tuple(
        tuple(int_det([[m[i][j] for j in cols] for i in rows]) for cols in subsets)
        for rows in subsets
    )


def int_charpoly(m: IntMatrix) -> list[int]:
    """Characteristic polynomial det(xI - M), constant term first.

    Faddeev-LeVerrier; every division is exact over the integers because the
    coefficients of an integer matrix's characteristic polynomial are integers.
    """
    n = len(m)
    if n == 1:
        return [-m[0][0], 1]
    if n == 2:
        return [m[0][0] * m[1][1] - m[0][1] * m[1][0], -(m[0][0] + m[1][1]), 1]
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    work = [[int(i == j) for j in range(n)] for i in range(n)]
    for step in range(1, n + 1):
        if step > 1:
            am = int_matmul(m, work)
            c = coeffs[n - step + 1]
            work = [[am[i][j] + (c if i == j else 0) for j in range(n)] for i in range(n)]
        am = int_matmul(m, work)
        tr = sum(am[i][i] for i in range(n))
        q, r = divmod(-tr, step)
        assert r == 0, "Faddeev-LeVerrier produced a non-integer coefficient"
        coeffs[n - step] = q
    return coeffs


def max_bits(m: IntMatrix) -> int:
    return max(abs(x).bit_length() for row in m for x in row)


# --- RationalMatrix --------------------------------------------------------


@dataclass(frozen=True)
class RationalMatrix:
    """Square matrix with exact rational entries, ``num / den``."""

    num: IntMatrix
    den: int = 1

    def __post_init__(self):
        d = len(self.num)
        if d == 0 or any(len(row) != d for row in self.num):
            raise DimensionMismatch("matrix must be square and nonempty")
        if self.den <= 0:
            raise ValueError("denominator must be positive")
        g = reduce(math.gcd, (x for row in self.num for x in row), self.den)
        if g > 1:
            object.__setattr__(self, "num", tuple(tuple(x // g for x in row) for row in self.num))
            object.__setattr__(self, "den", self.den // g)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable]) -> "RationalMatrix":
        fr = [[parse_rational(x) for x in row] for row in rows]
        den = reduce(lambda a, b: a * b // math.gcd(a, b), (x.denominator for row in fr for x in row), 1)
        return cls(tuple(tuple(int(x * den) for x in row) for row in fr), den)

    @classmethod
    def identity(cls, d: int) -> "RationalMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(d)) for i in range(d)))

    @classmethod
    def diag(cls, values: Iterable) -> "RationalMatrix":
        vals = [parse_rational(v) for v in values]
        d = len(vals)
        return cls.from_rows([[vals[i] if i == j else 0 for j in range(d)] for i in range(d)])

    @property
    def dim(self) -> int:
        return len(self.num)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return Fraction(self.num[i][j], self.den)

    def rows(self) -> list[list[Fraction]]:
        return [[Fraction(x, self.den) for x in row] for row in self.num]

    def to_strings(self) -> list[list[str]]:
        return [[format_rational(x) for x in row] for row in self.rows()]

    def to_float(self) -> list[list[float]]:
        return [[x / self.den for x in row] for row in self.num]

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if other.dim != self.dim:
            raise DimensionMismatch("dimension mismatch in product")
        return RationalMatrix(int_matmul(self.num, other.num), self.den * other.den)

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        if other.dim != self.dim:
            raise DimensionMismatch("dimension mismatch in sum")
        a, b = self.den, other.den
        return RationalMatrix(
            tuple(tuple(x * b + y * a for x, y in zip(r, s)) for r, s in zip(self.num, other.num)),
            a * b,
        )

    def __neg__(self) -> "RationalMatrix":
        return RationalMatrix(tuple(tuple(-x for x in row) for row in self.num), self.den)

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        return self + (-other)

    def scale(self, c) -> "RationalMatrix":
        c = parse_rational(c)
        return RationalMatrix(
            tuple(tuple(x * c.numerator for x in row) for row in self.num), self.den * c.denominator
        )

    @property
    def T(self) -> "RationalMatrix":
        return RationalMatrix(tuple(zip(*self.num)), self.den)

    def trace(self) -> Fraction:
        return Fraction(sum(self.num[i][i] for i in range(self.dim)), self.den)

    def det(self) -> Fraction:
        return Fraction(int_det(self.num), self.den**self.dim)

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.num for x in row)

    def __repr__(self) -> str:
        return f"RationalMatrix({self.to_strings()})"


def wedge_power(a: RationalMatrix, k: int) -> RationalMatrix:
    """Compound matrix of order k: entry (I, J) is the minor with rows I, columns J.

    Index subsets are ordered lexicographically, so for d = 3, k = 2 the basis
    is e1^e2, e1^e3, e2^e3.  ``k = 0`` gives ``[[1]]`` and ``k = d`` gives
    ``[[det a]]``.
    """
    if not 0 <= k <= a.dim:
        raise DimensionMismatch(f"wedge order {k} outside [0, {a.dim}]")
    if k == 0:
        return RationalMatrix(((1,),))
    return RationalMatrix(int_wedge(a.num, k), a.den**k)
