"""Certified leading eigenvalues, spectral radii and singular value functions.

Roots of an exact characteristic polynomial are approximated with
``mpmath.polyroots`` and then enclosed in disks via the Weierstrass
correction: for a monic p of degree n and distinct approximations z_i, every
root lies in the union of the disks |z - z_i| <= n |W_i| with
W_i = p(z_i) / prod_{j != i} (z_i - z_j), and a connected component made of m
disks holds exactly m roots (Gerschgorin applied to diag(z) - W 1^T, whose
characteristic polynomial is p).  A disk centred on the real axis that is
disjoint from the rest holds a single root, which must then be real.

Evaluation runs with ``GUARD_BITS`` extra bits and the radii are padded by a
rounding allowance, so enclosures are reliable to the working precision
rather than proven by interval arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from ..errors import DegenerateProduct, DominanceUnverified, PrecisionInsufficient
from .matrix import RationalMatrix, int_charpoly
from .poly import RationalPolynomial, char_poly

GUARD_BITS = 64
ESCALATIONS = 2


def to_mpf(x):
    """Exact-rational to mpf at the current precision."""
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


@dataclass(frozen=True)
class LeadingEigen:
    lambda1: mpmath.mpf
    rho: mpmath.mpf
    dominance_gap: mpmath.mpf
    p_prime_at_lambda1: mpmath.mpf
    precision_bits: int


@dataclass(frozen=True)
class RootEnclosure:
    center: mpmath.mpc
    radius: mpmath.mpf


def _weierstrass_radii(coeffs_hi: list, z: list, prec: int) -> list:
    """Inclusion radii n|W_i| plus a rounding allowance; coeffs monic, highest first."""
    n = len(z)
    slack = mpmath.ldexp(1, -(prec + GUARD_BITS // 2)) * n
    radii = []
    for i, zi in enumerate(z):
        denom = mpmath.mpf(1)
        for j, zj in enumerate(z):
            if j != i:
                denom *= zi - zj
        if denom == 0:
            raise ZeroDivisionError("coincident root approximations")
        w = mpmath.polyval(coeffs_hi, zi) / denom
        radii.append(n * abs(w) + slack * (1 + abs(zi)))
    return radii


def _approx_roots(coeffs_hi: list, prec: int) -> list:
    try:
        return list(mpmath.polyroots(coeffs_hi, maxsteps=200, extraprec=prec // 2 + GUARD_BITS))
    except mpmath.libmp.NoConvergence:
        return []


def isolate_roots(poly: RationalPolynomial, prec: int) -> list[RootEnclosure]:
    """Disjoint enclosures of every root of the square-free part of ``poly``."""
    q = poly.squarefree_part()
    if q.degree < 1:
        return []
    for attempt in range(ESCALATIONS + 1):
        p = prec << attempt
        with mpmath.workprec(p + GUARD_BITS):
            hi = [to_mpf(c) for c in reversed(q.coeffs)]
            if q.degree == 1:
                return [RootEnclosure(mpmath.mpc(-hi[1]), mpmath.mpf(0))]
            z = _approx_roots(hi, p)
            if len(z) != q.degree:
                continue
            try:
                r = _weierstrass_radii(hi, z, p)
            except ZeroDivisionError:
                continue
            if all(abs(z[i] - z[j]) > r[i] + r[j] for i in range(len(z)) for j in range(i)):
                return [RootEnclosure(mpmath.mpc(zi), ri) for zi, ri in zip(z, r)]
    raise PrecisionInsufficient(f"could not isolate the roots of a degree-{q.degree} polynomial")


def _leading_quadratic(c0, c1, prec: int, word):
    # x^2 + c1 x + c0 with exact coefficients: everything is decided exactly.
    disc = c1 * c1 - 4 * c0
    if disc <= 0:
        raise DominanceUnverified(
            "leading eigenvalues are a complex pair" if disc < 0 else "double eigenvalue", word
        )
    if c1 == 0:
        raise DominanceUnverified("two real eigenvalues of equal modulus", word)
    with mpmath.workprec(prec + GUARD_BITS):
        sq = mpmath.sqrt(to_mpf(disc))
        if c1 < 0:
            lam, pprime = (sq - to_mpf(c1)) / 2, sq
        else:
            lam, pprime = -(sq + to_mpf(c1)) / 2, -sq
        other = -to_mpf(c1) - lam
        gap = abs(lam) - abs(other)
    return lam, pprime, gap


def _leading_general(coeffs: Sequence, prec: int, word):
    """coeffs: exact monic coefficients, constant first, degree >= 3."""
    n = len(coeffs) - 1
    poly_for_derivative = RationalPolynomial(tuple(Fraction(c) for c in coeffs))
    target = poly_for_derivative
    repeated = None
    last_problem = "root enclosures overlap"
    for attempt in range(ESCALATIONS + 2):
        if attempt == ESCALATIONS + 1:
            # Last resort: strip repeated factors exactly and retry once.
            sf = poly_for_derivative.squarefree_part()
            if sf.degree == n:
                break
            target, repeated = sf, poly_for_derivative.gcd(poly_for_derivative.derivative())
            p = prec << ESCALATIONS
        else:
            p = prec << attempt
        with mpmath.workprec(p + GUARD_BITS):
            hi = [to_mpf(c) for c in reversed(target.coeffs)]
            if target.degree == 1:
                z, r = [-hi[1]], [mpmath.mpf(0)]
                i = 0
            else:
                z = _approx_roots(hi, p)
                if len(z) != target.degree:
                    last_problem = "root approximation did not converge"
                    continue
                i = max(range(len(z)), key=lambda j: abs(z[j]))
                z[i] = mpmath.re(z[i])
                try:
                    r = _weierstrass_radii(hi, z, p)
                except ZeroDivisionError:
                    continue
            lam, ri = z[i], r[i]
            others = [j for j in range(len(z)) if j != i]
            if any(abs(z[j] - lam) <= r[j] + ri for j in others):
                last_problem = "leading eigenvalue is not isolated"
                continue
            if ri >= abs(lam) / 2:
                last_problem = "leading eigenvalue enclosure is not bounded away from zero"
                continue
            bound = max((abs(z[j]) + r[j] for j in others), default=mpmath.mpf(0))
            gap = abs(lam) - ri - bound
            if gap <= 0:
                last_problem = "no eigenvalue strictly dominates in modulus"
                continue
            if repeated is not None and repeated.degree >= 1:
                if abs(repeated.mp_eval(lam)) <= mpmath.ldexp(1, -(p // 2)) * (1 + abs(lam)) ** repeated.degree:
                    raise DominanceUnverified("leading eigenvalue is repeated", word)
            dp = poly_for_derivative.derivative()
            for _ in range(2):
                lam = lam - poly_for_derivative.mp_eval(lam) / dp.mp_eval(lam)
            return lam, dp.mp_eval(lam), gap
    if "zero" in last_problem:
        raise DegenerateProduct(last_problem, word)
    raise DominanceUnverified(last_problem, word)


def leading_root(coeffs: Sequence, prec: int, word=None):
    """(lambda_1, p'(lambda_1), gap) for an exact monic polynomial, constant first."""
    n = len(coeffs) - 1
    if n == 1:
        if coeffs[0] == 0:
            raise DegenerateProduct("leading eigenvalue is zero", word)
        with mpmath.workprec(prec + GUARD_BITS):
            lam = -to_mpf(coeffs[0])
            return lam, mpmath.mpf(1), abs(lam)
    if n == 2:
        return _leading_quadratic(coeffs[0], coeffs[1], prec, word)
    return _leading_general(coeffs, prec, word)


def leading_int(m, scale: int, prec: int, word=None):
    """(lambda_1, p'(lambda_1)) of B = m/scale for an integer matrix m.

    Uses lambda_1(B) = lambda_1(m)/scale and p'_B(x) = scale^{1-d} p'_m(scale x).
    """
    d = len(m)
    if d == 1:
        v = m[0][0]
        if v == 0:
            raise DegenerateProduct("leading eigenvalue is zero", word)
        with mpmath.workprec(prec + GUARD_BITS):
            return mpmath.mpf(v) / scale, mpmath.mpf(1)
    lam, pp, _ = leading_root(int_charpoly(m), prec, word)
    with mpmath.workprec(prec + GUARD_BITS):
        if scale == 1:
            return lam, pp
        return lam / scale, pp / mpmath.mpf(scale) ** (d - 1)


def leading_eigen(b: RationalMatrix, prec: int = 256) -> LeadingEigen:
    """Certified simple dominant real eigenvalue of ``b`` and p_b'(lambda_1)."""
    if b.is_zero():
        raise DegenerateProduct("zero matrix")
    cp = char_poly(b)
    lam, pp, gap = leading_root(cp.coeffs, prec)
    with mpmath.workprec(prec):
        return LeadingEigen(+lam, abs(+lam), +gap, +pp, prec)


def spectral_radius(b: RationalMatrix, prec: int = 256):
    """Largest modulus over the roots of the characteristic polynomial."""
    q = char_poly(b).squarefree_part()
    with mpmath.workprec(prec + GUARD_BITS):
        if q.degree == 1:
            result = abs(to_mpf(q.coeffs[0]))
        elif q.degree == 2:
            c0, c1 = q.coeffs[0], q.coeffs[1]
            disc = c1 * c1 - 4 * c0
            if disc < 0:
                result = mpmath.sqrt(to_mpf(c0))
            else:
                result = (abs(to_mpf(c1)) + mpmath.sqrt(to_mpf(disc))) / 2
        else:
            result = max(abs(e.center) for e in isolate_roots(q, prec))
    with mpmath.workprec(prec):
        return +result


def singular_values(a: RationalMatrix, prec: int = 256) -> list:
    """Singular values in decreasing order, from the eigenvalues of A^T A."""
    ata = a.T @ a
    with mpmath.workprec(prec + GUARD_BITS):
        m = mpmath.matrix([[to_mpf(x) for x in row] for row in ata.rows()])
        ev = mpmath.eigsy(m, eigvals_only=True)
        sv = sorted((mpmath.sqrt(max(e, 0)) for e in ev), reverse=True)
    with mpmath.workprec(prec):
        return [+x for x in sv]


def phi_s(a: RationalMatrix, s, prec: int = 256):
    """Singular value function sigma_1 ... sigma_{floor s} sigma_{ceil s}^{s - floor s}.

    For s >= d it is |det a|^{s/d}.
    """
    d = a.dim
    with mpmath.workprec(prec + GUARD_BITS):
        s = to_mpf(s) if isinstance(s, (int, Fraction)) else mpmath.mpf(s)
        if s < 0:
            raise ValueError("phi_s needs s >= 0")
        if s >= d:
            result = abs(to_mpf(a.det())) ** (s / d)
        else:
            sv = singular_values(a, prec + GUARD_BITS)
            whole = int(mpmath.floor(s))
            frac = s - whole
            result = mpmath.fprod(sv[:whole])
            if frac > 0:
                result *= sv[whole] ** frac
    with mpmath.workprec(prec):
        return +result


def default_precision(matrices: Sequence[RationalMatrix], n_max: int) -> int:
    """max(256, 64 + ceil(8 n_max log2(1 + max_i ||A_i||))) bits."""
    import numpy as np

    norm = max(float(np.linalg.norm(np.array(a.to_float(), dtype=float), 2)) for a in matrices)
    return max(256, 64 + math.ceil(8 * n_max * math.log2(1 + norm)))
