"""Sufficient checks for the hypotheses of the trace algorithm.

Multipositivity is certified, never decided.  Two routes are offered: a
user-supplied polyhedral multicone checked exactly, and eventual entrywise
positivity of the exterior powers of bounded-length products.  The dimension
bracket dim_aff in (k, k+1) is obtained from spectral radii of signed sums of
exterior powers.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Sequence

import mpmath

from .errors import DimensionMismatch, NoPositiveSignPattern
from .linalg import RationalMatrix, parse_rational, spectral_radius, wedge_power
from .linalg.eigen import to_mpf
from .linalg.matrix import int_matmul, int_wedge

Vector = tuple[Fraction, ...]
MAX_SIGN_SEARCH = 12


def _vec(values: Iterable) -> Vector:
    return tuple(parse_rational(v) for v in values)


def _dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def _apply(b: RationalMatrix, v: Vector) -> Vector:
    return tuple(Fraction(sum(x * y for x, y in zip(row, v)), 1) / b.den for row in b.num)


@dataclass(frozen=True)
class PolyhedralCone:
    """Closed convex cone given by extreme rays and facet normals.

    The two descriptions must describe the same cone; only their mutual
    consistency (<g, f> >= 0), a nonempty interior and pointedness are
    checked by :meth:`validate`.
    """

    generators: tuple[Vector, ...]
    facet_normals: tuple[Vector, ...]

    @classmethod
    def from_lists(cls, generators, facet_normals) -> "PolyhedralCone":
        return cls(tuple(_vec(g) for g in generators), tuple(_vec(f) for f in facet_normals))

    @property
    def dim(self) -> int:
        return len(self.generators[0])

    def validate(self) -> list[str]:
        problems = []
        vecs = self.generators + self.facet_normals
        if not self.generators or not self.facet_normals:
            return ["cone needs generators and facet normals"]
        if any(len(v) != self.dim for v in vecs):
            return ["cone vectors have inconsistent lengths"]
        if any(_dot(g, f) < 0 for g in self.generators for f in self.facet_normals):
            problems.append("a generator violates a facet inequality")
        centre = tuple(sum(c) for c in zip(*self.generators))
        if any(_dot(centre, f) <= 0 for f in self.facet_normals):
            problems.append("cone has empty interior")
        dual_centre = tuple(sum(c) for c in zip(*self.facet_normals))
        if any(_dot(g, dual_centre) <= 0 for g in self.generators):
            problems.append("cone is not pointed")
        return problems

    def strictly_contains(self, v: Vector) -> bool:
        return all(_dot(v, f) > 0 for f in self.facet_normals)

    def contains(self, v: Vector) -> bool:
        return all(_dot(v, f) >= 0 for f in self.facet_normals)


@dataclass(frozen=True)
class Multicone:
    """Family of cones with a transverse vector and optional separating functionals.

    ``separators[(a, b)]`` is a vector positive on K_a and negative on K_b
    (minus the origin); it is required to prove K_a and K_b meet only at 0
    when the cones live in dimension 3 or more.
    """

    cones: tuple[PolyhedralCone, ...]
    transverse: Vector
    separators: Mapping[tuple[int, int], Vector] = field(default_factory=dict)


class CertificateKind(str, enum.Enum):
    USER_MULTICONE = "UserMulticoneVerified"
    EVENTUAL_POSITIVITY = "EventualPositivity"
    FAILED = "Failed"


@dataclass(frozen=True)
class Certificate:
    kind: CertificateKind
    k: int
    depth: int | None = None
    details: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.kind is not CertificateKind.FAILED

    def describe(self) -> str:
        if self.kind is CertificateKind.EVENTUAL_POSITIVITY:
            return f"EventualPositivity(depth={self.depth}, k={self.k})"
        if self.kind is CertificateKind.FAILED:
            reason = self.details[-1] if self.details else "unknown"
            return f"Failed(k={self.k}: {reason})"
        return f"UserMulticoneVerified(k={self.k})"


@dataclass(frozen=True)
class BracketResult:
    k: int
    rho_k: mpmath.mpf
    rho_k_plus_1: mpmath.mpf
    bracket_holds: bool
    sign_pattern: tuple[int, ...]
    sign_pattern_upper: tuple[int, ...] | None
    lower_is_exact: bool


def _check_dims(matrices: Sequence[RationalMatrix]) -> int:
    if not matrices:
        raise DimensionMismatch("need at least one matrix")
    d = matrices[0].dim
    if any(a.dim != d for a in matrices):
        raise DimensionMismatch("matrices have different sizes")
    return d


def _sectors_meet(a: PolyhedralCone, b: PolyhedralCone) -> bool:
    # Planar pointed cones meet away from 0 iff an extreme ray of one lies in the other.
    return any(b.contains(g) for g in a.generators) or any(a.contains(g) for g in b.generators)


def check_multicone(matrices: Sequence[RationalMatrix], k: int, mc: Multicone) -> Certificate:
    """Verify that ``mc`` is a multicone for the k-th exterior powers of ``matrices``."""
    d = _check_dims(matrices)
    if not 0 <= k <= d:
        raise DimensionMismatch(f"k={k} outside [0, {d}]")
    n = comb(d, k)
    if any(c.dim != n for c in mc.cones) or len(mc.transverse) != n:
        raise DimensionMismatch(f"multicone must live in dimension C({d},{k}) = {n}")
    log: list[str] = []

    def failed(reason: str) -> Certificate:
        return Certificate(CertificateKind.FAILED, k, None, tuple(log + [reason]))

    for j, cone in enumerate(mc.cones):
        problems = cone.validate()
        if problems:
            return failed(f"cone {j + 1}: {problems[0]}")
        if any(_dot(g, mc.transverse) <= 0 for g in cone.generators):
            return failed(f"cone {j + 1} is not transverse to the given vector")
    log.append("each cone is closed, convex, pointed, solid and transverse")

    for a, b in itertools.combinations(range(len(mc.cones)), 2):
        ka, kb = mc.cones[a], mc.cones[b]
        if n == 2:
            if _sectors_meet(ka, kb):
                return failed(f"cones {a + 1} and {b + 1} intersect")
            continue
        h = mc.separators.get((a, b))
        sign = 1
        if h is None and (b, a) in mc.separators:
            h, sign = mc.separators[(b, a)], -1
        if h is None:
            return failed(f"no separating functional supplied for cones {a + 1} and {b + 1}")
        if not (all(sign * _dot(g, h) > 0 for g in ka.generators)
                and all(sign * _dot(g, h) < 0 for g in kb.generators)):
            return failed(f"functional does not separate cones {a + 1} and {b + 1}")
    if len(mc.cones) > 1:
        log.append("cones pairwise meet only at the origin")

    for i, a in enumerate(matrices):
        b = wedge_power(a, k)
        for j, cone in enumerate(mc.cones):
            images = [_apply(b, g) for g in cone.generators]
            target = None
            for ell, dest in enumerate(mc.cones):
                for sign in (1, -1):
                    if all(dest.strictly_contains(tuple(sign * x for x in v)) for v in images):
                        target = (ell, sign)
                        break
                if target:
                    break
            if target is None:
                return failed(f"matrix {i + 1} does not map cone {j + 1} into the interior of any cone")
            ell, sign = target
            log.append(f"A{i + 1}: K{j + 1} -> {'+' if sign > 0 else '-'}int K{ell + 1}")
    return Certificate(CertificateKind.USER_MULTICONE, k, None, tuple(log))


def _constant_sign(m) -> int:
    """+1 / -1 if every entry is strictly positive / negative, else 0."""
    flat = [x for row in m for x in row]
    if all(x > 0 for x in flat):
        return 1
    if all(x < 0 for x in flat):
        return -1
    return 0


def check_eventual_positivity(matrices: Sequence[RationalMatrix], k: int, max_depth: int = 4) -> Certificate:
    """Smallest depth m <= max_depth at which every length-m product of the k-th
    exterior powers has entries of one strict sign (the sign may vary per product)."""
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    d = _check_dims(matrices)
    if not 0 <= k <= d:
        raise DimensionMismatch(f"k={k} outside [0, {d}]")
    # Denominators are positive, so signs can be read off integer numerators.
    gens = [int_wedge(a.num, k) for a in matrices]
    layer = list(gens)
    for depth in range(1, max_depth + 1):
        if all(_constant_sign(p) for p in layer):
            return Certificate(
                CertificateKind.EVENTUAL_POSITIVITY, k, depth,
                (f"all {len(layer)} products of length {depth} have constant-sign entries",),
            )
        if depth < max_depth:
            layer = [int_matmul(g, p) for p in layer for g in gens]
    return Certificate(
        CertificateKind.FAILED, k, None,
        (f"some product of each length up to {max_depth} has mixed-sign or zero entries",),
    )


def check_contraction(matrices: Sequence[RationalMatrix], gram: RationalMatrix | None = None) -> bool:
    """Exact test that every matrix is a strict contraction in the (G-)Euclidean norm.

    ||A||_G < 1 iff G - A^T G A is positive definite, decided by Sylvester's
    criterion in exact arithmetic.  A False answer does not rule out some
    other contracting norm.
    """
    d = _check_dims(matrices)
    g = gram if gram is not None else RationalMatrix.identity(d)
    if g.dim != d:
        raise DimensionMismatch("Gram matrix has the wrong size")
    if g != g.T or not _positive_definite(g):
        raise ValueError("Gram matrix must be symmetric positive definite")
    return all(_positive_definite(g - a.T @ g @ a) for a in matrices)


def _positive_definite(m: RationalMatrix) -> bool:
    from .linalg.matrix import int_det

    return all(int_det([row[:r] for row in m.num[:r]]) > 0 for r in range(1, m.dim + 1))


def _signed_sum(wedges: Sequence[RationalMatrix], signs: Sequence[int]) -> RationalMatrix:
    total = wedges[0] if signs[0] > 0 else -wedges[0]
    for w, e in zip(wedges[1:], signs[1:]):
        total = total + w if e > 0 else total - w
    return total


def _nonnegative_sign(m: RationalMatrix) -> int:
    flat = [x for row in m.num for x in row]
    if all(x >= 0 for x in flat) and any(flat):
        return 1
    if all(x <= 0 for x in flat) and any(flat):
        return -1
    return 0


def bracket_dimension(
    matrices: Sequence[RationalMatrix],
    k: int,
    sign_pattern: Sequence[int] | None = None,
    prec: int = 256,
) -> BracketResult:
    """Test rho(sum e_i A_i^{k+1}) < 1 < rho(sum e_i A_i^{k}).

    The lower quantity is maximised over sign patterns e (with e_1 = +1; the
    spectral radius is unchanged by a global sign).  For any e it bounds
    exp P(k) from below; it is exact when the signed matrices are
    nonnegative.  The upper quantity needs nonnegative signed matrices, where
    cone preservation makes it equal to exp P(k+1); for k + 1 = d it is the
    exact sum of |det A_i|.
    """
    d = _check_dims(matrices)
    if d < 2:
        raise DimensionMismatch("the trace method needs d >= 2")
    if not 0 <= k < d:
        raise DimensionMismatch(f"k={k} outside [0, {d - 1}]")
    n = len(matrices)

    lower_w = [wedge_power(a, k) for a in matrices]
    if sign_pattern is not None:
        if len(sign_pattern) != n or any(e not in (1, -1) for e in sign_pattern):
            raise ValueError("sign pattern must contain one +1/-1 per matrix")
        patterns = [tuple(sign_pattern)]
    elif n > MAX_SIGN_SEARCH:
        raise ValueError(f"sign search is limited to {MAX_SIGN_SEARCH} matrices; supply a pattern")
    else:
        patterns = [(1,) + rest for rest in itertools.product((1, -1), repeat=n - 1)]
    best_rho, best_pattern = None, None
    for pat in patterns:
        r = spectral_radius(_signed_sum(lower_w, pat), prec)
        if best_rho is None or r > best_rho:
            best_rho, best_pattern = r, pat
    lower_exact = all(
        _nonnegative_sign(w if e > 0 else -w) == 1 for e, w in zip(best_pattern, lower_w)
    )

    if k + 1 == d:
        with mpmath.workprec(prec):
            rho_up = +to_mpf(sum((abs(a.det()) for a in matrices), Fraction(0)))
        upper_pattern = None
    else:
        upper_w = [wedge_power(a, k + 1) for a in matrices]
        upper_pattern = tuple(_nonnegative_sign(w) for w in upper_w)
        if 0 in upper_pattern:
            raise NoPositiveSignPattern(
                f"some exterior power of order {k + 1} has entries of both signs"
            )
        rho_up = spectral_radius(_signed_sum(upper_w, upper_pattern), prec)

    return BracketResult(
        k=k,
        rho_k=best_rho,
        rho_k_plus_1=rho_up,
        bracket_holds=bool(rho_up < 1 < best_rho),
        sign_pattern=best_pattern,
        sign_pattern_upper=upper_pattern,
        lower_is_exact=lower_exact,
    )
