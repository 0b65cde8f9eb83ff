from fractions import Fraction
from math import comb, sqrt

import mpmath
import pytest

from oracles import balanced_signs, constrained_moment, cube_moment
from zerosum_khintchine.constrained_moments import (
    SignVector,
    classical_khintchine_check,
    colex_rank,
    colex_unrank,
    cube_moment as engine_cube_moment,
    enumerate_zero_sum_signs,
    exact_moment,
    iter_colex_masks,
    khintchine_rhs,
    partition_ranges,
    second_moment_closed_form,
    second_moment_printed_form,
    signed_sum_histogram,
    verify_main_theorem,
    weighted_sum,
)
from zerosum_khintchine.errors import CapacityError, ConstraintInfeasibleError, ParameterError


def test_enumerate_small():
    assert list(enumerate_zero_sum_signs(2)) == [(1, -1), (-1, 1)]
    assert len(list(enumerate_zero_sum_signs(4))) == 6


def test_enumerate_odd_is_infeasible():
    with pytest.raises(ConstraintInfeasibleError):
        list(enumerate_zero_sum_signs(3))


def test_enumerate_above_cap():
    with pytest.raises(CapacityError):
        list(enumerate_zero_sum_signs(26))
    assert len(list(enumerate_zero_sum_signs(6, cap=6))) == 20


@pytest.mark.parametrize("N", [2, 4, 6, 8, 10, 12])
def test_enumeration_matches_oracle_set(N):
    got = list(enumerate_zero_sum_signs(N))
    assert len(got) == len(set(got)) == comb(N, N // 2)
    assert set(got) == set(balanced_signs(N))
    assert all(sum(e) == 0 for e in got)


def test_colex_order():
    # colex: compare largest differing element
    sets = [tuple(i for i in range(6) if m >> i & 1) for m in iter_colex_masks(6, 3)]
    assert sets == sorted(sets, key=lambda s: tuple(reversed(s)))


def test_colex_rank_roundtrip():
    for r, m in enumerate(iter_colex_masks(10, 4)):
        assert colex_rank(m) == r
        assert colex_unrank(r, 4) == m


def test_partitioned_stream_concatenates():
    full = list(enumerate_zero_sum_signs(10))
    pieces = []
    for lo, hi in partition_ranges(len(full), 7):
        pieces.extend(enumerate_zero_sum_signs(10, start=lo, stop=hi))
    assert pieces == full


def test_partitioned_histogram_merges(random_weights):
    a = random_weights(12)
    whole, D = signed_sum_histogram(a)
    merged = None
    for lo, hi in partition_ranges(comb(12, 6), 5):
        part, _ = signed_sum_histogram(a, start=lo, stop=hi)
        merged = part if merged is None else merged + part
    assert merged == whole


def test_parallel_workers_agree(random_weights):
    a = random_weights(10)
    assert exact_moment(a, 4, workers=2) == exact_moment(a, 4)


@pytest.mark.parametrize(
    "a,eps,expected",
    [((1, -1), (1, -1), 2), ((1, 1), (-1, 1), 0), ((1, -1, 0, 0), (1, -1, 1, -1), 2)],
)
def test_weighted_sum(a, eps, expected):
    assert weighted_sum(a, eps) == expected


def test_weighted_sum_length_mismatch():
    with pytest.raises(ParameterError):
        weighted_sum((1, 2), (1, -1, 1, -1))


def test_sign_vector_validation():
    assert SignVector((1, -1)).is_balanced
    with pytest.raises(ParameterError):
        SignVector((1, 0))


def test_exact_moment_examples():
    assert exact_moment((1, -1), 2) == 4
    assert exact_moment((1, -1, 0, 0), 2) == Fraction(8, 3)
    assert exact_moment((1, -1, 0, 0), 4) == Fraction(32, 3)
    assert exact_moment((1, 1, 1, 1), 5) == 0
    assert exact_moment((2, 2, 2, 2, 2, 2), 3.5) == 0


def test_exact_moment_against_oracle(random_weights):
    for N in (2, 4, 6, 8):
        for _ in range(5):
            a = random_weights(N)
            for p in (2, 3, 4, 5):
                assert exact_moment(a, p) == constrained_moment(a, p)


def test_exact_moment_real_order(random_weights):
    a = random_weights(6)
    direct = sum(mpmath.mpf(abs(float(sum(x * e for x, e in zip(a, eps))))) ** 2.5 for eps in balanced_signs(6)) / 20
    assert float(exact_moment(a, 2.5)) == pytest.approx(float(direct), rel=1e-12)


def test_exact_moment_integral_float_order_takes_exact_path():
    assert exact_moment((1, -1, 0, 0), 4.0) == Fraction(32, 3)


def test_exact_moment_rejects_small_order():
    with pytest.raises(ParameterError):
        exact_moment((1, -1), 1)


def test_closed_form_examples():
    assert second_moment_closed_form((1, -1)) == 4
    assert second_moment_closed_form((1, 0, 0, 0)) == 1
    assert second_moment_closed_form((1, -1, 0, 0)) == Fraction(8, 3)


def test_printed_denominator_disagrees():
    assert second_moment_printed_form((1, -1)) == 2
    assert exact_moment((1, -1), 2) == 4


def test_closed_form_against_enumeration(random_weights):
    for N in range(2, 13, 2):
        for _ in range(10):
            a = random_weights(N)
            assert second_moment_closed_form(a) == exact_moment(a, 2)


def test_khintchine_rhs_examples():
    assert float(khintchine_rhs((1, -1), 2)) == pytest.approx(2 * sqrt(2))
    assert khintchine_rhs((3, 3, 3, 3), 7) == 0
    assert float(khintchine_rhs((1, 0, 0, 0), 2)) == pytest.approx(sqrt(3))


def test_verify_main_examples():
    first, second = verify_main_theorem((1, -1), 2)
    assert float(first.lhs) == 2 and float(first.rhs) == pytest.approx(2 * sqrt(2))
    assert float(second.rhs) == pytest.approx(4)
    assert first.satisfied and second.satisfied
    first, second = verify_main_theorem((1, 1), 6)
    assert first.lhs == first.rhs == second.rhs == 0
    assert first.satisfied and second.satisfied
    assert all(r.satisfied for r in verify_main_theorem((3, 1, -2, -2), 4))
    # oracle: E|S|^4 = 1376 over the six balanced vectors, radicand 18
    assert verify_main_theorem((3, 1, -2, -2), 4)[0].extra["moment_exact"] == 1376


def test_verify_main_zero_vector():
    reps = verify_main_theorem((0, 0, 0, 0), 3)
    assert all(r.satisfied and r.slack == 0 for r in reps)


def test_verify_main_real_order(random_weights):
    reps = verify_main_theorem(random_weights(8), 2.5)
    assert all(r.satisfied for r in reps)


def test_verify_main_cap():
    with pytest.raises(CapacityError):
        verify_main_theorem(list(range(26)), 2)


def test_classical_examples():
    r = classical_khintchine_check((1,), 2)
    assert float(r.lhs) == 1 and float(r.rhs) == pytest.approx(sqrt(2)) and r.satisfied
    r = classical_khintchine_check((1, 1), 2)
    assert float(r.lhs) == pytest.approx(sqrt(2)) and float(r.rhs) == pytest.approx(2)
    r = classical_khintchine_check((1, 1, 1, 1), 4)
    # oracle: E S_4^4 = 40 over 16 vectors
    assert cube_moment((1, 1, 1, 1), 4) == 40
    assert float(r.lhs) == pytest.approx(40**0.25) and float(r.rhs) == pytest.approx(4)


def test_cube_moment_against_oracle(random_weights):
    for N in (1, 3, 5, 8):
        a = random_weights(N)
        assert engine_cube_moment(a, 4) == cube_moment(a, 4)


def test_classical_cap():
    with pytest.raises(CapacityError):
        classical_khintchine_check([1] * 21, 2)


def test_enumeration_at_cap_is_exact():
    a = list(range(1, 25))
    m2 = exact_moment(a, 2)
    assert m2 == second_moment_closed_form(a)
