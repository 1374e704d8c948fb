from __future__ import annotations

from fractions import Fraction as F

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from affdim.errors import DegenerateProduct, DominanceUnverified
from affdim.linalg import (
    RationalMatrix,
    RationalPolynomial,
    default_precision,
    isolate_roots,
    leading_eigen,
    phi_s,
    singular_values,
    spectral_radius,
    wedge_power,
)


@pytest.fixture(autouse=True)
def _high_precision():
    with mpmath.workprec(256):
        yield


def test_polynomial_algebra():
    p = RationalPolynomial.of([1, -3, 2])  # (1 - x)(1 - 2x)
    assert p.degree == 2
    assert p(F(1, 2)) == 0
    assert p.derivative().coeffs == (-3, 4)
    q, r = p.divmod(RationalPolynomial.of([-1, 1]))
    assert r.is_zero() and q.coeffs == (-1, 2)
    square = p * p
    assert square.squarefree_part() == p.monic()
    assert square.gcd(square.derivative()) == p.monic()


def test_isolate_roots_separates_close_roots():
    # (x - 1)(x - 1 - 2^-60)(x + 3)
    eps = F(1, 2**60)
    p = RationalPolynomial.of([-1, 1]) * RationalPolynomial.of([-(1 + eps), 1]) * RationalPolynomial.of([3, 1])
    encl = isolate_roots(p, 256)
    centers = sorted(mpmath.re(e.center) for e in encl)
    assert len(encl) == 3
    assert abs(centers[0] + 3) < mpmath.mpf(2) ** -200
    assert abs(centers[2] - centers[1] - mpmath.mpf(2) ** -60) < mpmath.mpf(2) ** -150


def test_leading_eigen_golden_ratio_squared():
    e = leading_eigen(RationalMatrix.from_rows([[2, 1], [1, 1]]))
    phi2 = (3 + mpmath.sqrt(5)) / 2
    assert abs(e.lambda1 - phi2) < mpmath.mpf(10) ** -70
    assert abs(e.p_prime_at_lambda1 - mpmath.sqrt(5)) < mpmath.mpf(10) ** -70
    assert e.dominance_gap > 0


def test_leading_eigen_negative_dominant():
    e = leading_eigen(RationalMatrix.from_rows([[-3, 0, 0], [0, 1, 1], [0, 0, 2]]))
    assert abs(e.lambda1 + 3) < mpmath.mpf(10) ** -70
    assert e.rho == abs(e.lambda1)
    # p(x) = (x + 3)(x - 1)(x - 2); p'(-3) = (-4)(-5) = 20
    assert abs(e.p_prime_at_lambda1 - 20) < mpmath.mpf(10) ** -60


@pytest.mark.parametrize(
    "rows",
    [
        [[1, 0], [0, 1]],  # double eigenvalue
        [[0, -1], [1, 0]],  # complex pair
        [[1, 0], [0, -1]],  # +1 and -1
        [[1, 0, 0], [0, 0, -1], [0, 1, 0]],  # unit circle tie
    ],
)
def test_no_dominant_eigenvalue(rows):
    with pytest.raises(DominanceUnverified):
        leading_eigen(RationalMatrix.from_rows(rows))


def test_nilpotent_is_degenerate():
    with pytest.raises(DegenerateProduct):
        leading_eigen(RationalMatrix.from_rows([[0, 1, 0], [0, 0, 1], [0, 0, 0]]))
    with pytest.raises(DegenerateProduct):
        leading_eigen(RationalMatrix.from_rows([[0, 0], [0, 0]]))


def test_degenerate_is_a_dominance_failure():
    assert issubclass(DegenerateProduct, DominanceUnverified)


def test_spectral_radius_values():
    a1 = RationalMatrix.from_rows([["-4/7", "5/7"], ["0", "1/7"]])
    a2 = RationalMatrix.from_rows([["1/7", "0"], ["-5/7", "-4/7"]])
    assert abs(spectral_radius(a1 - a2) - mpmath.sqrt(50) / 7) < mpmath.mpf(10) ** -70
    # complex pair: modulus sqrt(det)
    assert abs(spectral_radius(RationalMatrix.from_rows([[0, -2], [1, 0]])) - mpmath.sqrt(2)) < mpmath.mpf(10) ** -70


def test_singular_values_and_phi_s():
    a = RationalMatrix.diag([F(1, 2), F(1, 3)])
    sv = singular_values(a)
    assert abs(sv[0] - mpmath.mpf(1) / 2) < mpmath.mpf(10) ** -60
    assert abs(phi_s(a, F(3, 2)) - mpmath.mpf(1) / 2 * mpmath.sqrt(mpmath.mpf(1) / 3)) < mpmath.mpf(10) ** -60
    assert abs(phi_s(a, 3) - (mpmath.mpf(1) / 6) ** (mpmath.mpf(3) / 2)) < mpmath.mpf(10) ** -60
    assert phi_s(a, 0) == 1
    with pytest.raises(ValueError):
        phi_s(a, -1)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.lists(st.integers(1, 9), min_size=3, max_size=3), min_size=3, max_size=3), st.integers(1, 3))
def test_leading_eigen_of_positive_wedges_matches_numpy(rows, k):
    a = RationalMatrix.from_rows(rows)
    w = wedge_power(a, k)
    if w.is_zero():
        return
    try:
        e = leading_eigen(w)
    except DominanceUnverified:
        # A positive matrix has a simple dominant Perron root, so only the
        # higher exterior powers may legitimately lack one.
        assert k > 1
        return
    ev = np.linalg.eigvals(np.array(w.to_float()))
    top = ev[np.argmax(np.abs(ev))]
    assert abs(float(e.lambda1) - top.real) <= 1e-9 * max(1.0, abs(top))


def test_default_precision_grows_with_length():
    a = [RationalMatrix.from_rows([[3, 0], [0, 1]])]
    assert default_precision(a, 1) == 256
    assert default_precision(a, 100) > 256
