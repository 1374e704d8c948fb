from __future__ import annotations

import itertools
from fractions import Fraction as F

import mpmath
import numpy as np
import pytest

from affdim.errors import BracketFailed, NoRootFound, PrecisionInsufficient
from affdim.linalg import RationalMatrix
from affdim.solver import (
    agreeing_digits,
    check_bracket,
    decimal_string,
    pressure_approx,
    smallest_positive_root,
    solve_dimension,
    solve_report,
)
from affdim.traces import build_engine
from reference_values import EXAMPLE1_ROWS, EXAMPLE3_ROWS


@pytest.fixture(scope="module")
def engine1(example1):
    return build_engine(example1.matrices, 1, 10)


def test_smallest_positive_root_simple_cases():
    with mpmath.workprec(256):
        assert abs(smallest_positive_root([1, -1], 256) - 1) < mpmath.ldexp(1, -240)
        # (1 - x)(1 - 2x): roots 1/2 and 1
        assert abs(smallest_positive_root([1, -3, 2], 256) - mpmath.mpf(1) / 2) < mpmath.ldexp(1, -240)
        # (1 - 4x)(1 - 5x) has close positive roots 1/5 < 1/4
        r = smallest_positive_root([1, -9, 20], 256)
        assert abs(r - mpmath.mpf(1) / 5) < mpmath.ldexp(1, -240)


def test_smallest_positive_root_skips_negative_roots():
    with mpmath.workprec(256):
        # (1 + x)(1 - x/3)(1 - x/5): negative root -1, positive roots 3 and 5
        p = [1, 1 - mpmath.mpf(8) / 15, mpmath.mpf(1) / 15 - mpmath.mpf(8) / 15, mpmath.mpf(1) / 15]
        assert abs(smallest_positive_root(p, 256) - 3) < mpmath.ldexp(1, -200)


def test_double_root_is_not_certified():
    # a tangential zero can never be isolated as a simple root
    with mpmath.workprec(128):
        third = mpmath.mpf(1) / 3
        with pytest.raises(PrecisionInsufficient):
            smallest_positive_root([1, -2 * third, third * third], 128)


@pytest.mark.parametrize("coeffs", [[1, 1], [1, 0, 1], [2, 3, 1], [1]])
def test_no_positive_root(coeffs):
    with pytest.raises(NoRootFound):
        smallest_positive_root(coeffs, 128)


def test_pressure_at_bracket_endpoints(example1, engine1):
    with mpmath.workprec(engine1.prec):
        top = pressure_approx(example1.matrices, 1, 2, 10, engine=engine1).pressure
        assert abs(top - mpmath.mpf(8) / 49) < mpmath.mpf(10) ** -14
        low = pressure_approx(example1.matrices, 1, 1, 10, engine=engine1).pressure
        assert low >= mpmath.sqrt(50) / 7


def test_pressure_scaling_identity(example1):
    # P(lam A; s) = lam^s P(A; s), and the truncations inherit it exactly
    lam = F(1, 2)
    scaled = [a.scale(lam) for a in example1.matrices]
    s = mpmath.mpf("1.3")
    with mpmath.workprec(256):
        p = pressure_approx(example1.matrices, 1, s, 6, prec=256).pressure
        q = pressure_approx(scaled, 1, s, 6, prec=256).pressure
        assert abs(q - mpmath.mpf(1) / 2**s * p) < mpmath.ldexp(1, -200)


def test_pressure_is_decreasing_and_log_convex(example1, engine1):
    with mpmath.workprec(engine1.prec):
        grid = [1 + mpmath.mpf(i) / 8 for i in range(9)]
        logs = [mpmath.log(pressure_approx(example1.matrices, 1, s, 10, engine=engine1).pressure) for s in grid]
    assert all(b < a for a, b in zip(logs, logs[1:]))
    assert all(logs[i - 1] - 2 * logs[i] + logs[i + 1] >= 0 for i in range(1, 8))


def _partition_sum(matrices, s, n):
    mats = [np.array(m.to_float(), dtype=float) for m in matrices]
    products = [np.linalg.multi_dot(list(reversed([mats[i] for i in w]))) if n > 1 else mats[w[0]] for w in itertools.product(range(len(mats)), repeat=n)]
    sv = np.linalg.svd(np.array(products), compute_uv=False)
    k = int(np.floor(s))
    phi = np.prod(sv[:, :k], axis=1) * sv[:, k] ** (s - k) if k < sv.shape[1] else np.prod(sv, axis=1) ** (s / sv.shape[1])
    return float(phi.sum()) ** (1.0 / n)


@pytest.mark.parametrize("name", ["example1", "example2", "example3"])
def test_pressure_below_partition_sums(name, request):
    cfg = request.getfixturevalue(name)
    engine = build_engine(cfg.matrices, 1, 8)
    for s in (1.2, 1.5, 1.8):
        with mpmath.workprec(engine.prec):
            p = float(pressure_approx(cfg.matrices, 1, mpmath.mpf(s), 8, engine=engine).pressure)
        for n in (1, 2, 3, 4):
            assert p <= _partition_sum(cfg.matrices, s, n) * (1 + 1e-9)


def test_decimal_string_and_agreement():
    with mpmath.workprec(200):
        x = mpmath.mpf(1) / 3
        assert decimal_string(x, 5) == "0.33333"
        assert decimal_string(-mpmath.mpf(2) / 3, 3) == "-0.667"
        assert decimal_string(mpmath.mpf("0.9999996"), 5) == "1.00000"
        assert agreeing_digits(mpmath.mpf("1.1234"), mpmath.mpf("1.1239"), 4) == 3
        assert agreeing_digits(mpmath.mpf("1.5"), mpmath.mpf("2.5"), 4) == -1
        assert agreeing_digits(mpmath.mpf("1.5"), mpmath.mpf("1.6"), 4) == 0
        assert agreeing_digits(x, None) == -1


@pytest.mark.parametrize("n", [2, 5, 8])
def test_example1_golden_rows(example1, engine1, n):
    s = solve_dimension(example1.matrices, 1, n, engine=engine1)
    with mpmath.workdps(60):
        assert abs(s - mpmath.mpf(EXAMPLE1_ROWS[n])) < mpmath.mpf(10) ** -38


def test_example3_short_words_have_no_bracket(example3):
    engine = build_engine(example3.matrices, 1, 4)
    with pytest.raises(BracketFailed):
        check_bracket(engine, 1)
    with pytest.raises(NoRootFound):
        check_bracket(engine, 2)
    s = solve_dimension(example3.matrices, 1, 3, engine=engine)
    with mpmath.workdps(60):
        assert abs(s - mpmath.mpf(EXAMPLE3_ROWS[3])) < mpmath.mpf(10) ** -38


def test_solve_report_rows_and_stable_digits(example3):
    report = solve_report(example3.matrices, 1, 1, 5)
    assert [r.n for r in report.rows] == [1, 2, 3, 4, 5]
    assert report.rows[0].error_type == "BracketFailed"
    assert report.rows[1].error_type == "NoRootFound"
    assert report.rows[2].stable_digits == -1
    assert report.rows[4].stable_digits == agreeing_digits(report.rows[4].s_n, report.rows[3].s_n)
    assert report.bracket is not None and report.bracket.bracket_holds
    assert report.value(5) == report.rows[4].s_n
    with pytest.raises(KeyError):
        report.value(9)
    with pytest.raises(ValueError):
        solve_report(example3.matrices, 1, 3, 2)


def test_solve_rejects_length_beyond_engine(example1, engine1):
    with pytest.raises(ValueError):
        solve_dimension(example1.matrices, 1, 11, engine=engine1)


def test_diagonal_tuple_matches_closed_form():
    # for two copies of diag(1/3, 1/6) with k = 0 the dimension is log 2 / log 3;
    # the eigenvalue ratio 1/2 makes the error decay like 2^(-n^2 / 2)
    a = RationalMatrix.from_rows([[F(1, 3), 0], [0, F(1, 6)]])
    engine = build_engine([a, a], 0, 14)
    with mpmath.workprec(256):
        exact = mpmath.log(2) / mpmath.log(3)
        errors = [abs(solve_dimension([a, a], 0, n, engine=engine) - exact) for n in (6, 10, 14)]
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < mpmath.mpf(10) ** -30
