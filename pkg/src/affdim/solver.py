"""Pressure approximations P_n(s) and the secant iteration for the dimension.

P_n(s) = 1 / r_n(s), with r_n(s) the smallest positive root of the truncated
determinant 1 + a_1 x + ... + a_n x^n.  The dimension estimate s_n solves
P_n(s) = 1 and is found by a secant iteration started from k + 1 and k.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Sequence

import mpmath

from .certify import bracket_dimension
from .errors import (
    AffinityDimError,
    BracketFailed,
    DominanceUnverified,
    NoRootFound,
    PrecisionInsufficient,
    SecantDiverged,
)
from .fredholm import CoefficientSeries, coefficients
from .linalg import RationalMatrix
from .linalg.eigen import GUARD_BITS
from .traces import TraceEngine, build_engine

log = logging.getLogger(__name__)

DEFAULT_TOL = mpmath.mpf("1e-40")
MAX_ITERATIONS = 64
MAX_SUBDIVISIONS = 100000


@dataclass(frozen=True)
class PressureApprox:
    s: mpmath.mpf
    n: int
    root: mpmath.mpf
    pressure: mpmath.mpf


@dataclass
class SolveRow:
    n: int
    s_n: mpmath.mpf | None
    iterations: int = 0
    cpu_seconds: float = 0.0
    stable_digits: int = -1
    precision_bits: int = 0
    error: str | None = None
    error_type: str | None = None


@dataclass
class SolveReport:
    k: int
    n_min: int
    n_max: int
    rows: list[SolveRow] = field(default_factory=list)
    precision_bits: int = 0
    reduction_mode: str = "necklace"
    bracket: object = None
    certificates: list = field(default_factory=list)

    def value(self, n: int):
        for row in self.rows:
            if row.n == n:
                return row.s_n
        raise KeyError(n)


def _poly_bound(a: list, hi):
    # sup of |p'| on [0, hi]
    return mpmath.fsum(i * abs(a[i]) * hi ** (i - 1) for i in range(1, len(a)))


def _curvature_bound(a: list, hi):
    # sup of |p''| on [0, hi]
    return mpmath.fsum(i * (i - 1) * abs(a[i]) * hi ** (i - 2) for i in range(2, len(a)))


def smallest_positive_root(coeffs: Sequence | CoefficientSeries, prec: int | None = None):
    """Smallest positive root of sum a_i x^i (a_0 != 0), or NoRootFound.

    Intervals of [0, R] (R the Fujiwara root bound) are scanned left to right; an
    interval is discarded once |p(lo)| exceeds sup|p'| times its width, which
    proves p has no zero there.  The first interval with a sign change on
    which p' provably keeps its sign (or that shrinks below resolution
    without being excluded) is refined by bracketed Newton steps.
    """
    if isinstance(coeffs, CoefficientSeries):
        prec = prec or coeffs.precision_bits
        coeffs = coeffs.coeffs
    prec = prec or mpmath.mp.prec
    with mpmath.workprec(prec + GUARD_BITS):
        a = [mpmath.mpf(c) for c in coeffs]
        while len(a) > 1 and a[-1] == 0:
            a.pop()
        if len(a) < 2:
            raise NoRootFound("constant polynomial")
        if a[0] == 0:
            raise NoRootFound("zero constant term")

        da = [i * a[i] for i in range(len(a) - 1, 0, -1)]

        def p(x):
            return mpmath.polyval(a[::-1], x)

        deg = len(a) - 1
        lead = abs(a[-1])
        # Fujiwara: every root has modulus at most 2 max |a_i / a_n|^{1/(n-i)}.
        upper = 2 * max(
            (abs(a[i]) / lead) ** (mpmath.mpf(1) / (deg - i)) for i in range(deg) if a[i]
        )
        # No root below 1/(1 + max |a_i / a_0|) either.
        floor = abs(a[0]) / (abs(a[0]) + max(abs(c) for c in a[1:]))
        resolution = mpmath.ldexp(1, -(prec // 2))
        found = None
        steps = 0
        # Pending intervals are [lo, hi] for hi on the stack; lo only advances.
        lo, plo = floor, p(floor)
        hi_stack = [upper] if floor < upper else []
        while hi_stack:
            steps += 1
            if steps > MAX_SUBDIVISIONS:
                raise PrecisionInsufficient("root search did not terminate")
            hi = hi_stack[-1]
            if plo == 0:
                found = (lo, lo)
                break
            phi = p(hi)
            if plo * phi < 0:
                # Accept only where p' cannot vanish, so the root is unique.
                slope = abs(mpmath.polyval(da, lo))
                if slope > _curvature_bound(a, hi) * (hi - lo):
                    found = (lo, hi)
                    break
            if abs(plo) > _poly_bound(a, hi) * (hi - lo):
                hi_stack.pop()
                lo, plo = hi, phi
                continue
            if hi - lo < resolution * hi:
                # Tangential contact or numerical noise: cannot separate.
                found = (lo, hi)
                break
            hi_stack.append((lo + hi) / 2)
        if found is None:
            raise NoRootFound("the truncated determinant has no positive root")
        lo, hi = found
        if lo == hi:
            return +lo
        return _refine(a, lo, hi, prec)


def _refine(a: list, lo, hi, prec: int):
    """Bracketed Newton on [lo, hi] where p changes sign (or nearly touches zero)."""
    hi_coeffs = a[::-1]
    dcoeffs = [i * a[i] for i in range(len(a) - 1, 0, -1)]
    plo = mpmath.polyval(hi_coeffs, lo)
    x = (lo + hi) / 2
    tol = mpmath.ldexp(1, -prec) * (1 + abs(hi))
    for _ in range(4 * prec):
        px = mpmath.polyval(hi_coeffs, x)
        if px == 0:
            return x
        if (px < 0) == (plo < 0):
            lo, plo = x, px
        else:
            hi = x
        dpx = mpmath.polyval(dcoeffs, x)
        step = px / dpx if dpx else None
        nxt = x - step if step is not None else None
        if nxt is None or not lo < nxt < hi:
            nxt = (lo + hi) / 2
        if abs(nxt - x) < tol or hi - lo < tol:
            return nxt
        x = nxt
    return x


def pressure_from_series(series: CoefficientSeries, n: int | None = None) -> PressureApprox:
    """P_n(s) = 1 / r_n(s) from the first n + 1 determinant coefficients."""
    n = len(series.coeffs) - 1 if n is None else n
    root = smallest_positive_root(series.coeffs[: n + 1], series.precision_bits)
    with mpmath.workprec(series.precision_bits):
        return PressureApprox(series.s, n, +root, 1 / root)


def pressure_approx(
    matrices: Sequence[RationalMatrix],
    k: int,
    s,
    n: int,
    prec: int | None = None,
    engine: TraceEngine | None = None,
) -> PressureApprox:
    """P_n(s) for a matrix tuple: traces, then coefficients, then the root."""
    engine = engine or build_engine(matrices, k, n, prec)
    return pressure_from_series(coefficients(engine.table(s, n)), n)


def _pressure_minus_one(engine: TraceEngine, s, n: int):
    return pressure_from_series(coefficients(engine.table(s, n)), n).pressure - 1


def secant_dimension(engine: TraceEngine, n: int, tol=DEFAULT_TOL, max_iterations: int = MAX_ITERATIONS):
    """Solve P_n(s) = 1 by the secant method from (k + 1, k).

    Iterates outside [k - 1/2, k + 3/2], or where P_n has no positive root,
    trigger a fall back to bisection on the last sign-changing pair.  Returns
    (s_n, iterations).
    """
    k = engine.k
    with mpmath.workprec(engine.prec + GUARD_BITS):
        tol = mpmath.mpf(tol)
        lo_limit, hi_limit = k - mpmath.mpf(1) / 2, k + mpmath.mpf(3) / 2
        s_prev, s_cur = mpmath.mpf(k + 1), mpmath.mpf(k)
        f_prev = _pressure_minus_one(engine, s_prev, n)
        f_cur = _pressure_minus_one(engine, s_cur, n)
        bracket = (s_cur, f_cur, s_prev, f_prev) if f_prev * f_cur < 0 else None
        for it in range(1, max_iterations + 1):
            if f_cur == f_prev:
                if abs(s_cur - s_prev) <= tol:
                    return s_cur, it
                break
            s_next = s_cur - f_cur * (s_cur - s_prev) / (f_cur - f_prev)
            if not lo_limit <= s_next <= hi_limit:
                log.info("secant left [%s, %s] at n=%d; bisecting", lo_limit, hi_limit, n)
                break
            try:
                f_next = _pressure_minus_one(engine, s_next, n)
            except NoRootFound:
                log.info("no positive root at s=%s, n=%d; bisecting", mpmath.nstr(s_next, 10), n)
                break
            if abs(s_next - s_cur) <= tol:
                return s_next, it
            s_prev, f_prev, s_cur, f_cur = s_cur, f_cur, s_next, f_next
            if f_prev * f_cur < 0:
                bracket = (s_prev, f_prev, s_cur, f_cur)
        else:
            raise SecantDiverged(f"no convergence in {max_iterations} iterations at n={n}")
        if bracket is None:
            raise SecantDiverged(f"secant failed at n={n} without a sign-changing pair")
        return _bisect(engine, n, bracket, tol, max_iterations)


def _bisect(engine: TraceEngine, n: int, bracket, tol, budget: int):
    a, fa, b, fb = bracket
    if a > b:
        a, fa, b, fb = b, fb, a, fa
    # Bisection needs log2(width / tol) steps regardless of the secant budget.
    steps = int(mpmath.ceil(mpmath.log(abs(b - a) / tol, 2))) + 1
    for it in range(1, max(budget, steps) + 1):
        m = (a + b) / 2
        fm = _pressure_minus_one(engine, m, n)
        if fm == 0 or (b - a) / 2 <= tol:
            return m, it
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    raise SecantDiverged(f"bisection did not reach tolerance at n={n}")


def check_bracket(engine: TraceEngine, n: int) -> None:
    """BracketFailed unless P_n(k) >= 1 >= P_n(k + 1).

    NoRootFound propagates when P_n is undefined at either endpoint.
    """
    k = engine.k
    f_lo = _pressure_minus_one(engine, k, n)
    f_hi = _pressure_minus_one(engine, k + 1, n)
    if f_lo < 0 or f_hi > 0:
        raise BracketFailed(f"P_{n}(s) - 1 does not change sign on [{k}, {k + 1}]")


def solve_dimension(
    matrices: Sequence[RationalMatrix],
    k: int,
    n: int,
    prec: int | None = None,
    tol=DEFAULT_TOL,
    mode: str = "necklace",
    engine: TraceEngine | None = None,
):
    """The estimate s_n of the affinity dimension, assumed to lie in [k, k + 1]."""
    engine = engine or build_engine(matrices, k, n, prec, mode)
    if n > engine.n_max:
        raise ValueError(f"engine only covers lengths up to {engine.n_max}")
    check_bracket(engine, n)
    s, _ = secant_dimension(engine, n, tol)
    with mpmath.workprec(engine.prec):
        return +s


def decimal_string(x, places: int = 40) -> str:
    """x rounded to ``places`` decimals, as a plain digit string."""
    with mpmath.workprec(max(mpmath.mp.prec, int(places * 3.33) + GUARD_BITS)):
        scaled = int(mpmath.nint(abs(mpmath.mpf(x)) * mpmath.mpf(10) ** places))
    sign = "-" if x < 0 and scaled else ""
    whole, frac = divmod(scaled, 10**places)
    return f"{sign}{whole}.{frac:0{places}d}" if places else f"{sign}{whole}"


def agreeing_digits(a, b, places: int = 40) -> int:
    """Number of decimals shared by the rounded expansions of a and b.

    -1 when the integer parts differ or either value is missing, so 0 means
    only the integer part agrees.
    """
    if a is None or b is None:
        return -1
    sa, sb = decimal_string(a, places), decimal_string(b, places)
    ia, ib = sa.index("."), sb.index(".")
    if sa[:ia] != sb[:ib]:
        return -1
    count = 0
    for x, y in zip(sa[ia + 1 :], sb[ib + 1 :]):
        if x != y:
            break
        count += 1
    return count


def solve_report(
    matrices: Sequence[RationalMatrix],
    k: int,
    n_min: int,
    n_max: int,
    prec: int | None = None,
    tol=DEFAULT_TOL,
    mode: str = "necklace",
    workers: int = 1,
    engine: TraceEngine | None = None,
    with_bracket: bool = True,
    certificates: Sequence = (),
) -> SolveReport:
    """s_n for n_min..n_max from a single trace engine.

    Per-row failures (no root, no bracket, secant breakdown) are recorded in
    the row instead of being raised.  CPU time covers the row's solve plus an
    equal share of the engine build.
    """
    if n_min < 1 or n_max < n_min:
        raise ValueError("need 1 <= n_min <= n_max")
    start = time.process_time()
    engine = engine or build_engine(matrices, k, n_max, prec, mode, workers)
    build_share = (time.process_time() - start) / (n_max - n_min + 1)
    report = SolveReport(
        k, n_min, n_max, precision_bits=engine.prec, reduction_mode=engine.mode,
        certificates=list(certificates),
    )
    if with_bracket and matrices[0].dim >= 2:
        try:
            report.bracket = bracket_dimension(matrices, k, prec=engine.prec)
        except AffinityDimError as exc:
            log.info("bracket unavailable: %s", exc)
    previous = None
    for n in range(n_min, n_max + 1):
        t0 = time.process_time()
        row = SolveRow(n, None, precision_bits=engine.prec)
        try:
            check_bracket(engine, n)
            s, row.iterations = secant_dimension(engine, n, tol)
            with mpmath.workprec(engine.prec):
                row.s_n = +s
            row.stable_digits = agreeing_digits(row.s_n, previous)
        except (NoRootFound, SecantDiverged, DominanceUnverified, PrecisionInsufficient) as exc:
            row.error, row.error_type = str(exc), type(exc).__name__
        row.cpu_seconds = time.process_time() - t0 + build_share
        previous = row.s_n
        report.rows.append(row)
    return report
