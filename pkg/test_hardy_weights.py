"""
Tests for Hardy-field expressions, class certificates and weight averages.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from hardy_weights import (
    ClassWitness, class_check_L, class_check_M, differentiate, evaluate, negative_type_limit,
    parse_expr, running_average_gaps, running_averages, type_of, weight_sequence,
)
from phase_sums import euler_decay_bound
from utils import check_mode


def sqrt_witness(**overrides):
    fields = dict(family='M', delta=0.3, M_const=2.0, m=0, k=0, alpha=0.5, epsilon=0.01)
    fields.update(overrides)
    return ClassWitness(**fields)


def test_parse_expr_terms_sorted_by_growth():
    p = parse_expr("s*log - 3*s^2")
    assert p.terms == ((-3.0, 2.0, 0), (1.0, 1.0, 1))


def test_parse_expr_negative_exponent():
    assert parse_expr("s^(-0.5)").terms == ((1.0, -0.5, 0),)
    assert parse_expr("s^-0.5").terms == ((1.0, -0.5, 0),)


@pytest.mark.parametrize("text", ["s^", "log^0.5", "s + ", "x*s"])
def test_parse_expr_rejects(text):
    with pytest.raises(ValueError):
        parse_expr(text)


def test_like_terms_merge_and_cancel():
    assert parse_expr("s^2 - s^2").is_zero


def test_differentiate_power_and_log():
    assert differentiate(parse_expr("s^2")).terms == ((2.0, 1.0, 0),)
    # d/ds s log s = log s + 1
    assert set(differentiate(parse_expr("s*log")).terms) == {(1.0, 0.0, 1), (1.0, 0.0, 0)}


def test_type_of():
    assert type_of(parse_expr("s^0.5*log^2 + s^0.2")) == 0.5
    with pytest.raises(ValueError):
        type_of(parse_expr("s - s"))


def test_evaluate_honours_shift():
    p = parse_expr("s^2", shift=1.0)
    np.testing.assert_allclose(evaluate(p, [1.0, 2.0]), [4.0, 9.0])
    with pytest.raises(ValueError):
        evaluate(parse_expr("s"), [0.5])


def test_witness_validation():
    with pytest.raises(ValidationError):
        ClassWitness(family='M', delta=0.3, M_const=2.0, m=0, k=0)
    with pytest.raises(ValidationError):
        sqrt_witness(epsilon=0.5)
    with pytest.raises(ValidationError):
        sqrt_witness(k=1)


def test_class_check_M_certifies_square_root():
    certificate = class_check_M(parse_expr("s^0.5"), sqrt_witness())
    assert certificate.passed
    assert certificate.grid_checked and certificate.asymptotic_checked


def test_class_check_M_rejects_linear_phase():
    certificate = class_check_M(parse_expr("s"), sqrt_witness())
    assert not certificate.passed
    assert certificate.reason


def test_class_check_L():
    witness = ClassWitness(family='L', delta=0.5, M_const=1.0, m=0, k=0)
    assert class_check_L(parse_expr("s^-0.5"), witness).passed
    tight = ClassWitness(family='L', delta=0.5, M_const=0.5, m=0, k=0)
    assert not class_check_L(parse_expr("s^-0.5"), tight).passed


def test_class_checks_reject_wrong_family():
    with pytest.raises(ValueError):
        class_check_L(parse_expr("s^0.5"), sqrt_witness())


def test_weight_sequence_is_unit_modulus():
    weights = weight_sequence(parse_expr("s^1.5"), 1000)
    np.testing.assert_allclose(np.abs(weights), 1.0)


def test_running_averages_match_direct_mean():
    p = parse_expr("s^0.5")
    weights = weight_sequence(p, 500)
    averages = running_averages(p, [10, 500])
    assert averages[0] == pytest.approx(np.mean(weights[:10]))
    assert averages[1] == pytest.approx(np.mean(weights))


@pytest.mark.parametrize("N", [2, 100, 1000])
def test_euler_decay_bound_dominates_average(N):
    p = parse_expr("s^0.5")
    bound = euler_decay_bound(p, sqrt_witness(), N)
    assert abs(np.mean(weight_sequence(p, N))) <= bound


def test_euler_decay_bound_check_mode():
    with check_mode(True):
        euler_decay_bound(parse_expr("s^0.5"), sqrt_witness(), 5000)


def test_euler_decay_bound_rejects():
    p = parse_expr("s^0.5")
    with pytest.raises(ValueError):
        euler_decay_bound(p, sqrt_witness(), 1)
    with pytest.raises(ValueError):
        euler_decay_bound(p, ClassWitness(family='L', delta=0.5, M_const=1.0, m=0, k=0), 100)


def test_negative_type_limit_tends_to_one():
    averages = negative_type_limit(parse_expr("s^-0.5"), [10 ** 3, 10 ** 6])
    assert abs(averages[1] - 1) < abs(averages[0] - 1)
    assert abs(averages[1] - 1) < 0.05


def test_negative_type_limit_rejects_growing_phase():
    with pytest.raises(ValueError):
        negative_type_limit(parse_expr("s^0.5"), [10])


def test_log_phase_gaps_stay_large():
    report = running_average_gaps(parse_expr("3*log"), [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6])
    assert report['N'] == [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6]
    assert len(report['consecutive_gaps']) == 3
    assert report['max_gap'] >= max(report['consecutive_gaps'])
    assert min(report['consecutive_gaps']) > 0.01
