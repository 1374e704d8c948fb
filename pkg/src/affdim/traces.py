"""The traces t_n(s) of the transfer operator, in arbitrary precision.

For a word w with product B = A_w the summand is

    lambda_1(B^k)^{C(d,k)-1} lambda_1(B^{k+1})^{C(d,k+1)-1}
    rho(B^k)^{k+1-s} rho(B^{k+1})^{s-k} / (p'_{B^k}(lambda_1) p'_{B^{k+1}}(lambda_1))

where B^j is the j-th exterior power.  Only the two real powers depend on s,
so :class:`TraceEngine` stores each summand as ``coef * exp(s * log_ratio)``
with ``log_ratio = log(rho(B^{k+1}) / rho(B^k))`` and evaluates t_n(s) for
any s without touching the matrices again.  Eigenvalue data only depend on
the cyclic class of w, so by default one representative per necklace is
evaluated and weighted by the class size.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import comb
from typing import Sequence

import mpmath

from .errors import DimensionMismatch, DominanceUnverified, PrecisionInsufficient
from .linalg import RationalMatrix, default_precision, leading_eigen, wedge_power
from .linalg.eigen import GUARD_BITS, leading_int
from .linalg.matrix import int_matmul, int_wedge
from .words import Word, prenecklace_tree, word_tree

log = logging.getLogger(__name__)

PRECISION_CAP = 16384
PRODUCT_BITS = 4096
MODES = ("necklace", "full")


@dataclass(frozen=True)
class TraceTable:
    s: mpmath.mpf
    k: int
    n_max: int
    values: tuple[mpmath.mpf, ...]
    precision_bits: int
    reduction_mode: str


def word_product(word: Word, matrices: Sequence[RationalMatrix]) -> RationalMatrix:
    """A_{i_n} ... A_{i_1} for word (i_1, ..., i_n)."""
    prod = matrices[word[0]]
    for i in word[1:]:
        prod = matrices[i] @ prod
    return prod


def _validate(matrices: Sequence[RationalMatrix], k: int) -> int:
    if not matrices:
        raise DimensionMismatch("need at least one matrix")
    d = matrices[0].dim
    if any(a.dim != d for a in matrices):
        raise DimensionMismatch("matrices have different sizes")
    if d < 2:
        raise DimensionMismatch("the trace formula needs d >= 2")
    if not 0 <= k < d:
        raise DimensionMismatch(f"k={k} outside [0, {d - 1}]")
    return d


def trace_term(word: Word, matrices: Sequence[RationalMatrix], k: int, s, prec: int = 256):
    """Single summand of t_n(s) for one word, straight from the definition."""
    d = _validate(matrices, k)
    b = word_product(tuple(word), matrices)
    try:
        ek = leading_eigen(wedge_power(b, k), prec)
        ek1 = leading_eigen(wedge_power(b, k + 1), prec)
    except DominanceUnverified as exc:
        raise type(exc)(str(exc), tuple(word)) from None
    with mpmath.workprec(prec + GUARD_BITS):
        s = mpmath.mpf(s)
        num = (
            ek.lambda1 ** (comb(d, k) - 1)
            * ek1.lambda1 ** (comb(d, k + 1) - 1)
            * ek.rho ** (k + 1 - s)
            * ek1.rho ** (s - k)
        )
        value = num / (ek.p_prime_at_lambda1 * ek1.p_prime_at_lambda1)
    with mpmath.workprec(prec):
        return +value


def _spectral_summand(job):
    """(coef, log_ratio) for one word; module-level so worker processes can run it."""
    num, den, d, k, prec, weight, word = job
    if k == 0:
        lam_k = pp_k = mpmath.mpf(1)
    else:
        lam_k, pp_k = leading_int(int_wedge(num, k), den**k, prec, word)
    lam_k1, pp_k1 = leading_int(int_wedge(num, k + 1), den ** (k + 1), prec, word)
    with mpmath.workprec(prec + GUARD_BITS):
        rho_k, rho_k1 = abs(lam_k), abs(lam_k1)
        coef = (
            weight
            * lam_k ** (comb(d, k) - 1)
            * lam_k1 ** (comb(d, k + 1) - 1)
            * rho_k ** (k + 1)
            / rho_k1**k
            / (pp_k * pp_k1)
        )
        return coef, mpmath.log(rho_k1 / rho_k)


def _spectral_chunk(jobs):
    return [_spectral_summand(j) for j in jobs]


class TraceEngine:
    """s-independent spectral data of all word classes of length 1..n_max.

    Products are accumulated exactly; once an entry exceeds ``product_bits``
    bits the numerator and denominator are both rounded by the same power of
    two, a relative perturbation far below the working precision.  Such
    products are counted in ``approximate_products``.
    """

    def __init__(
        self,
        matrices: Sequence[RationalMatrix],
        k: int,
        n_max: int,
        prec: int | None = None,
        mode: str = "necklace",
        product_bits: int = PRODUCT_BITS,
        workers: int = 1,
        min_length: int = 1,
    ):
        self.d = _validate(matrices, k)
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if n_max < 1:
            raise ValueError("n_max must be positive")
        self.matrices = tuple(matrices)
        self.k = k
        self.n_max = n_max
        self.mode = mode
        self.prec = prec or default_precision(matrices, n_max)
        self.product_bits = product_bits
        self.approximate_products = 0
        self._terms: dict[int, list[tuple]] = {}
        self._build(workers, min_length)

    def _jobs(self, min_length: int):
        mats = [(a.num, a.den) for a in self.matrices]
        stack: list[tuple] = [None] * (self.n_max + 1)
        if self.mode == "necklace":
            tree = prenecklace_tree(len(mats), self.n_max)
        else:
            tree = ((w, None) for w in word_tree(len(mats), self.n_max))
        for word, period in tree:
            t = len(word)
            num, den = mats[word[-1]]
            if t > 1:
                pnum, pden = stack[t - 1]
                num, den = int_matmul(num, pnum), den * pden
                num, den = self._limit(num, den)
            stack[t] = (num, den)
            if t < min_length:
                continue
            if period is None:
                yield (num, den, self.d, self.k, self.prec, 1, word)
            elif t % period == 0:
                yield (num, den, self.d, self.k, self.prec, period, word)

    def _limit(self, num, den):
        bits = max(max(abs(x).bit_length() for row in num for x in row), den.bit_length())
        if bits <= self.product_bits:
            return num, den
        shift = bits - self.product_bits
        self.approximate_products += 1
        half = 1 << (shift - 1)
        return tuple(tuple((x + half) >> shift for x in row) for row in num), max(1, (den + half) >> shift)

    def _build(self, workers: int, min_length: int) -> None:
        jobs = list(self._jobs(min_length))
        if workers > 1 and len(jobs) > 64:
            size = -(-len(jobs) // (4 * workers))
            chunks = [jobs[i : i + size] for i in range(0, len(jobs), size)]
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = [r for chunk in pool.map(_spectral_chunk, chunks) for r in chunk]
        else:
            results = [_spectral_summand(j) for j in jobs]
        for job, res in zip(jobs, results):
            self._terms.setdefault(len(job[-1]), []).append(res)
        if self.approximate_products:
            log.info("%d products exceeded %d bits and were rounded", self.approximate_products, self.product_bits)

    @property
    def term_count(self) -> int:
        return sum(len(v) for v in self._terms.values())

    def trace(self, s, n: int):
        """t_n(s) at the engine precision (fixed lexicographic summation order)."""
        terms = self._terms.get(n)
        if terms is None:
            raise ValueError(f"no data for length {n}")
        with mpmath.workprec(self.prec + GUARD_BITS):
            s = mpmath.mpf(s)
            total = mpmath.fsum(c * mpmath.exp(s * lr) for c, lr in terms)
        with mpmath.workprec(self.prec):
            return +total

    def traces(self, s, n: int | None = None) -> list:
        n = self.n_max if n is None else n
        if n > self.n_max:
            raise ValueError(f"engine only covers lengths up to {self.n_max}")
        return [self.trace(s, m) for m in range(1, n + 1)]

    def table(self, s, n: int | None = None) -> TraceTable:
        n = self.n_max if n is None else n
        with mpmath.workprec(self.prec):
            s_mp = mpmath.mpf(s)
        return TraceTable(s_mp, self.k, n, tuple(self.traces(s, n)), self.prec, self.mode)


def verify_precision(engine: TraceEngine, s=None) -> bool:
    """Recompute the two longest traces at double precision and compare.

    Passes when they agree to 2^{-prec/4} relative.
    """
    s = engine.k + mpmath.mpf(1) / 2 if s is None else s
    top = list(range(max(1, engine.n_max - 1), engine.n_max + 1))
    fine = TraceEngine(
        engine.matrices, engine.k, engine.n_max, 2 * engine.prec, engine.mode,
        engine.product_bits, min_length=top[0],
    )
    with mpmath.workprec(2 * engine.prec):
        tol = mpmath.ldexp(1, -(engine.prec // 4))
        for n in top:
            coarse, ref = engine.trace(s, n), fine.trace(s, n)
            if abs(coarse - ref) > tol * abs(ref):
                return False
    return True


def build_engine(
    matrices: Sequence[RationalMatrix],
    k: int,
    n_max: int,
    prec: int | None = None,
    mode: str = "necklace",
    workers: int = 1,
    verify: bool = True,
    cap: int = PRECISION_CAP,
    product_bits: int = PRODUCT_BITS,
) -> TraceEngine:
    """Engine at the default (or given) precision, doubled until the top traces are stable."""
    prec = prec or default_precision(matrices, n_max)
    while True:
        if prec > cap:
            raise PrecisionInsufficient(f"trace precision would exceed the {cap}-bit cap")
        engine = TraceEngine(matrices, k, n_max, prec, mode, product_bits, workers)
        if not verify or verify_precision(engine):
            return engine
        log.info("traces unstable at %d bits; doubling", prec)
        prec *= 2


def trace_table(
    matrices: Sequence[RationalMatrix],
    k: int,
    s,
    n_max: int,
    prec: int | None = None,
    mode: str = "necklace",
    verify: bool = True,
) -> TraceTable:
    return build_engine(matrices, k, n_max, prec, mode, verify=verify).table(s)
