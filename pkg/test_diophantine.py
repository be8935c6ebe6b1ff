"""
Tests for continued fractions, Dirichlet approximation, Cantor nets and N-theta approximates.
"""

import math
from fractions import Fraction

import pytest

from diophantine import (
    approximate_sparsity, bad_approx_constant, box_dimension, cantor_net, cf_expand, cf_periodic,
    convergents, digit_bound_bracket, dirichlet_approx, maximal_net, n_theta_approximate,
    n_theta_candidates, quadratic_net, uniqueness_threshold,
)


GOLDEN = (math.sqrt(5) - 1) / 2


def test_cf_expand_golden_digits():
    cf = cf_expand(GOLDEN)
    assert cf.digits[:10] == (1,) * 10
    assert not cf.terminated


def test_cf_expand_rational_terminates():
    cf = cf_expand(0.375)
    assert cf.digits == (2, 1, 2)
    assert cf.terminated


def test_cf_expand_rejects_out_of_range():
    with pytest.raises(ValueError):
        cf_expand(1.5)


@pytest.mark.parametrize("period, value", [
    ((1,), GOLDEN),
    ((2,), math.sqrt(2) - 1),
])
def test_cf_periodic_value(period, value):
    assert cf_periodic(period).value == pytest.approx(value, abs=1e-15)


def test_convergents_of_golden_are_fibonacci_ratios():
    cf = cf_periodic((1,), max_terms=5)
    assert convergents(cf) == [Fraction(1, 1), Fraction(1, 2), Fraction(2, 3), Fraction(3, 5), Fraction(5, 8)]


@pytest.mark.parametrize("Q", [1, 2, 10, 100, 1000, 10 ** 5])
@pytest.mark.parametrize("alpha", [GOLDEN, math.sqrt(2) - 1, math.pi])
def test_dirichlet_contract(alpha, Q):
    approx = dirichlet_approx(alpha, Q)
    assert approx.denominator <= Q
    assert abs(Fraction(alpha) - approx) <= Fraction(1, approx.denominator * Q)


def test_dirichlet_exact_rational():
    assert dirichlet_approx(Fraction(1, 3), 10) == Fraction(1, 3)


def test_dirichlet_rejects_bad_ceiling():
    with pytest.raises(ValueError):
        dirichlet_approx(GOLDEN, 0)


def test_bad_approx_constant_golden_limit():
    assert bad_approx_constant(GOLDEN, 10 ** 6, q_min=100) == pytest.approx(1 / math.sqrt(5), abs=1e-3)


def test_bad_approx_constant_small_q_dominates():
    # q = 1 gives 1 - golden, below every later convergent term
    assert bad_approx_constant(GOLDEN, 1000) == pytest.approx(1 - GOLDEN, abs=1e-12)


@pytest.mark.parametrize("theta", [GOLDEN, math.sqrt(2) - 1, math.pi - 3, 0.1001])
@pytest.mark.parametrize("q_min", [1, 2, 7, 50])
def test_bad_approx_constant_matches_full_scan(theta, q_min):
    x = Fraction(theta)
    full = min(q * abs(q * x - round(q * x)) for q in range(q_min, 501))
    assert bad_approx_constant(theta, 500, q_min=q_min) == pytest.approx(float(full), rel=1e-12)


def test_bad_approx_constant_rational_hits_zero():
    assert bad_approx_constant(Fraction(1, 2), 10) == 0.0


def test_digit_bound_bracket_keys():
    report = digit_bound_bracket(GOLDEN, 1000)
    assert report['max_digit'] == 1
    assert report['left_bracket'] == pytest.approx(1.0)
    assert report['right_bracket'] == pytest.approx(1 / 12)
    assert report['c_Q'] == pytest.approx(1 - GOLDEN, abs=1e-12)


@pytest.mark.parametrize("depth", [1, 4, 8])
def test_cantor_net_cylinders_are_disjoint(depth):
    intervals = cantor_net([1, 2], depth)
    assert len(intervals) == 2 ** depth
    for lo, hi in intervals:
        assert 0 < lo < hi < 1
    for (_, hi), (lo, _) in zip(intervals, intervals[1:]):
        assert hi <= lo


@pytest.mark.parametrize("digits, depth", [([1, 2], 0), ([1, 2], 13), ([], 3), ([0, 1], 3)])
def test_cantor_net_rejects(digits, depth):
    with pytest.raises(ValueError):
        cantor_net(digits, depth)


def test_maximal_net_is_separated():
    assert maximal_net([0.3, 0.0, 0.15, 0.1], 0.1) == [0.0, 0.1, 0.3]


def test_box_dimension_of_interval_is_one():
    scales = [2.0 ** -k for k in range(4, 11)]
    slope, residual = box_dimension([(Fraction(0), Fraction(1))], scales)
    assert slope == pytest.approx(1.0, abs=0.02)
    assert residual < 0.05


def test_box_dimension_needs_geometric_scales():
    with pytest.raises(ValueError):
        box_dimension([0.5], [0.1, 0.01, 0.001])
    with pytest.raises(ValueError):
        box_dimension([0.5], [0.1, 0.05, 0.01, 0.001])


@pytest.mark.slow
def test_box_dimension_of_cantor_set():
    intervals = cantor_net([1, 2], 12)
    scales = [2.0 ** (-6 - k) for k in range(9)]
    slope, _ = box_dimension(intervals, scales)
    assert slope == pytest.approx(0.531, abs=0.1)


def test_n_theta_exact_rational():
    approx = n_theta_approximate(Fraction(1, 2), 2 ** 10, 0.2, 1)
    assert approx is not None
    assert approx.x_over_y == Fraction(1, 2)
    assert approx.gamma == 0.0


def test_n_theta_golden_has_no_approximate_at_large_n():
    assert n_theta_approximate(GOLDEN, 2 ** 20, 0.05, 1) is None


@pytest.mark.parametrize("N", [2 ** k for k in range(1, 21)])
def test_n_theta_bounds(N):
    approx = n_theta_approximate(GOLDEN, N, 0.05, 1)
    if approx is not None:
        assert approx.x_over_y.denominator <= N ** 0.05 * (1 + 1e-12)
        assert abs(approx.gamma) <= 2 * N ** (0.05 - 1) * (1 + 1e-12)


def test_n_theta_matches_exhaustive_search():
    candidates = n_theta_candidates(Fraction(1, 3), 2 ** 10, 0.2, 1)
    assert candidates == [Fraction(1, 3)]
    assert n_theta_approximate(Fraction(1, 3), 2 ** 10, 0.2, 1).x_over_y == Fraction(1, 3)


@pytest.mark.parametrize("delta", [0.0, 0.5])
def test_n_theta_rejects_delta(delta):
    with pytest.raises(ValueError):
        n_theta_approximate(GOLDEN, 1024, delta, 1)


def test_uniqueness_threshold():
    assert uniqueness_threshold(0.4, 1) == math.inf
    assert uniqueness_threshold(0.05, 1) == pytest.approx(4 ** (1 / 0.85))


def test_approximate_sparsity():
    table = [n_theta_approximate(Fraction(1, 2), 2 ** k, 0.2, 1) for k in range(1, 9)]
    assert table[3] is None
    assert table[4].x_over_y == Fraction(1, 2)
    # first use of 1/2 at N = 32: 32^0.6 / 2
    assert approximate_sparsity(table, 0.2) == pytest.approx(4.0)
    assert approximate_sparsity([None, None], 0.2) == 0.0


def test_quadratic_net_periodic_words():
    net = quadratic_net([2, 1], 4)
    assert len(net) == 16
    assert net[0] == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-15)
    assert net[-1] == pytest.approx(math.sqrt(2) - 1, abs=1e-15)
    assert all(0 < theta < 1 for theta in net)
