"""Coefficients a_n(s) of the truncated Fredholm determinant det(I - z L_s)."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Sequence

import mpmath

from .linalg.eigen import GUARD_BITS
from .traces import TraceTable

DETERMINANT_LIMIT = 8


@dataclass(frozen=True)
class CoefficientSeries:
    s: mpmath.mpf
    coeffs: tuple[mpmath.mpf, ...]
    precision_bits: int
    source: dict = field(default_factory=dict)
    # max |t_m a_{n-m}| / |a_n| for each n; large ratios mean heavy cancellation
    cancellation: tuple[mpmath.mpf, ...] = ()
    precision_limited: tuple[bool, ...] = ()


def newton_coefficients(traces: Sequence, prec: int):
    """a_0..a_n from t_1..t_n via n a_n = -sum_{m=1}^n t_m a_{n-m}.

    Returns (coeffs, cancellation ratios).
    """
    with mpmath.workprec(prec + GUARD_BITS):
        t = [None] + [mpmath.mpf(x) for x in traces]
        a = [mpmath.mpf(1)]
        ratios = [mpmath.mpf(1)]
        for n in range(1, len(t)):
            parts = [t[m] * a[n - m] for m in range(1, n + 1)]
            an = -mpmath.fsum(parts) / n
            a.append(an)
            biggest = max(abs(p) for p in parts) / n
            ratios.append(biggest / abs(an) if an else mpmath.inf)
    with mpmath.workprec(prec):
        return [+x for x in a], [+r for r in ratios]


def coefficients(traces: TraceTable) -> CoefficientSeries:
    """Determinant coefficients from a trace table (Newton-identity recursion)."""
    prec = traces.precision_bits
    a, ratios = newton_coefficients(traces.values, prec)
    limit = mpmath.ldexp(1, prec // 4)
    return CoefficientSeries(
        s=traces.s,
        coeffs=tuple(a),
        precision_bits=prec,
        source={"k": traces.k, "n_max": traces.n_max, "mode": traces.reduction_mode},
        cancellation=tuple(ratios),
        precision_limited=tuple(bool(r > limit) for r in ratios),
    )


def coefficients_by_determinant(traces: TraceTable | Sequence, n: int):
    """a_n as (-1)^n / n! times the n x n determinant with t's below the diagonal.

    Row i (1-based) holds t_i, ..., t_1 in columns 1..i and n - i in column
    i + 1.  Kept as an independent check on the recursion; limited to n <= 8.
    """
    values = traces.values if isinstance(traces, TraceTable) else tuple(traces)
    prec = traces.precision_bits if isinstance(traces, TraceTable) else mpmath.mp.prec
    if n > DETERMINANT_LIMIT:
        raise ValueError(f"determinant oracle limited to n <= {DETERMINANT_LIMIT}")
    if n > len(values):
        raise ValueError("not enough traces")
    if n == 0:
        return mpmath.mpf(1)
    with mpmath.workprec(prec + GUARD_BITS):
        m = mpmath.zeros(n, n)
        for i in range(n):
            for j in range(i + 1):
                m[i, j] = values[i - j]
            if i + 1 < n:
                m[i, i + 1] = n - 1 - i
        value = (-1) ** n * mpmath.det(m) / factorial(n)
    with mpmath.workprec(prec):
        return +value
