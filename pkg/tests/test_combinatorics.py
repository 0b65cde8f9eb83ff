import math
from fractions import Fraction

import mpmath
import pytest

from zerosum_khintchine.combinatorics import (
    binomial,
    binomial_ratio_bound_check,
    gamma_upper_bound_check,
    remark35_condition,
    stirling_sandwich_check,
)
from zerosum_khintchine.errors import ParameterError


@pytest.mark.parametrize("n,k,expected", [(4, 2, 6), (2, 1, 2), (0, 0, 1), (5, -1, 0), (5, 6, 0)])
def test_binomial_small(n, k, expected):
    assert binomial(n, k) == expected


def test_binomial_rejects_negative_n():
    with pytest.raises(ParameterError):
        binomial(-1, 0)


def test_pascal_rule_exhaustive():
    for n in range(2, 65):
        for k in range(1, n):
            assert binomial(n, k) == binomial(n - 1, k - 1) + binomial(n - 1, k)


def test_vandermonde_exhaustive():
    for N in range(41):
        for ell in range(N + 1):
            for n in range(N + 1):
                assert sum(binomial(ell, k) * binomial(N - ell, n - k) for k in range(ell + 1)) == binomial(N, n)


def test_stirling_examples():
    lower, upper = stirling_sandwich_check(1)
    assert float(lower.lhs) == pytest.approx(1.5958, abs=1e-4)
    assert float(upper.rhs) == pytest.approx(2.2568, abs=1e-4)
    assert lower.satisfied and upper.satisfied
    lower, upper = stirling_sandwich_check(2)
    assert float(lower.lhs) == pytest.approx(16 / math.sqrt(4 * math.pi))
    assert float(upper.rhs) == pytest.approx(16 / math.sqrt(2 * math.pi))
    assert lower.rhs_exact == 6


def test_stirling_all_n_up_to_500():
    for n in range(1, 501):
        assert all(r.satisfied and not r.warning for r in stirling_sandwich_check(n)), n


def test_ratio_examples():
    reps = binomial_ratio_bound_check(2, 2)
    ratio = reps[0]
    assert ratio.statement_id == "eq12-ratio"
    assert ratio.lhs_exact == Fraction(1, 3) and ratio.rhs_exact == Fraction(1, 2)
    assert all(r.satisfied for r in reps)
    ratio = binomial_ratio_bound_check(1, 1)[0]
    assert ratio.lhs_exact == Fraction(1, 2) and ratio.rhs_exact == 1


def test_ratio_slack_is_min_over_k():
    n, ell = 7, 4
    rep = binomial_ratio_bound_check(n, ell)[0]
    direct = min(Fraction(2, 2**ell) - Fraction(math.comb(2 * n - ell, n - k), math.comb(2 * n, n)) for k in range(ell + 1))
    assert rep.rhs_exact - rep.lhs_exact == direct


def test_ratio_large_case():
    assert all(r.satisfied for r in binomial_ratio_bound_check(200, 200))


@pytest.mark.parametrize("n,ell", [(0, 0), (3, 0), (3, 4)])
def test_ratio_rejects_bad_range(n, ell):
    with pytest.raises(ParameterError):
        binomial_ratio_bound_check(n, ell)


def test_gamma_examples():
    r = gamma_upper_bound_check(1)
    assert r.lhs_exact == r.rhs_exact == 1 and r.satisfied and r.slack == 0
    r = gamma_upper_bound_check(2)
    assert (r.lhs_exact, r.rhs_exact) == (1, 2)
    r = gamma_upper_bound_check(3.5)
    assert float(r.lhs) == pytest.approx(3.3234, abs=1e-4)
    assert float(r.rhs) == pytest.approx(22.918, abs=1e-3)
    assert r.satisfied


def test_gamma_matches_factorials():
    # the real-argument path uses mpmath.gamma; compare it against (m-1)!
    for m in range(1, 21):
        g = mpmath.gamma(mpmath.mpf(m))
        assert abs(g - math.factorial(m - 1)) <= 1e-12 * math.factorial(m - 1)


def test_gamma_rejects_small_x():
    with pytest.raises(ParameterError):
        gamma_upper_bound_check(0.5)


def test_gamma_dense_grid():
    for i in range(0, 400):
        assert gamma_upper_bound_check(1 + Fraction(i, 20)).satisfied


def test_remark35_examples():
    r = remark35_condition(4, 2, 2)
    assert r.ratio_condition and r.max_ratio == Fraction(1, 3)
    # the k = 0 ratio is exactly 1, accepted since the condition is non-strict
    r = remark35_condition(4, 2, 0)
    assert r and r.max_ratio == 1
    assert remark35_condition(2, 1, 1)


def test_remark35_threshold_value():
    r = remark35_condition(10, 5, 3)
    expected = 10 - math.log2(math.sqrt(math.pi) * 252)
    assert float(r.threshold) == pytest.approx(expected)
    assert r.sufficient == (3 >= expected)


def test_remark35_failing_case():
    r = remark35_condition(10, 5, 0)
    assert r.ratio_condition  # ratio 1
    r = remark35_condition(6, 1, 1)
    # C(5, 1) / C(6, 1) = 5/6, C(5, 0)/6 = 1/6
    assert r.max_ratio == Fraction(5, 6)


def test_remark35_rejects_bad_params():
    with pytest.raises(ParameterError):
        remark35_condition(4, 5, 1)


def test_remark35_ratio_condition_always_holds():
    # C(N, n) >= C(l, k) C(N-l, n-k) >= C(N-l, n-k) term by term in Vandermonde
    for N in range(0, 31):
        for n in range(N + 1):
            for ell in range(N + 1):
                assert remark35_condition(N, n, ell).ratio_condition
