"""
Tests for closed-form orbits, observables and twisted ergodic averages.
"""

import cmath
import math

import numpy as np
import pytest
from pydantic import ValidationError

from dynamics import (
    DEFAULT_SEEDS, SurdSeed, SystemSpec, TrigPoly, iterate, orbit, twisted_poly_average,
    weighted_average, ww_sup_experiment,
)
from phase_sums import twisted_average
from utils import BudgetExceededError


def test_system_parse():
    rotation = SystemSpec.parse("rotation:golden")
    assert rotation.beta == pytest.approx((math.sqrt(5) - 1) / 2)
    assert rotation.dimension == 1 and rotation.invertible
    doubling = SystemSpec.parse("doubling")
    assert doubling.beta is None and not doubling.invertible
    assert SystemSpec.parse("skew:1/3").dimension == 2


@pytest.mark.parametrize("text", ["rotation", "skew:1.5", "cat:0.5"])
def test_system_parse_rejects(text):
    with pytest.raises(ValidationError):
        SystemSpec.parse(text)


def test_surd_seed_digits():
    seed = SurdSeed(2, 1, 1)
    assert float(seed) == pytest.approx(math.sqrt(2) - 1)
    assert seed.scaled_floor(10) == math.floor(1024 * (math.sqrt(2) - 1))
    with pytest.raises(ValueError):
        SurdSeed(4)


def test_trig_poly_parse():
    f = TrigPoly.parse("f:e(2x+y)", 2)
    assert f.terms == (((2, 1), 1.0),)
    assert TrigPoly.parse("f:1", 2).zero_coefficient() == 1.0
    assert TrigPoly.parse("f:e(-x)", 1).terms == (((-1,), 1.0),)
    with pytest.raises(ValueError):
        TrigPoly.parse("f:e(y)", 1)
    with pytest.raises(ValueError):
        TrigPoly.parse("f:z", 1)


def test_rotation_iterate():
    system = SystemSpec(kind='rotation', beta=0.25)
    assert iterate(system, 0.125, 3) == pytest.approx(0.875)
    assert iterate(system, 0.125, -1) == pytest.approx(0.875)


def test_skew_compose_matches_iterate():
    system = SystemSpec(kind='skew', beta=0.3)
    f = TrigPoly.parse("f:e(x+y)", 2)
    point = (0.1, 0.2)
    for h in (1, 3, 7):
        moved = iterate(system, point, h)
        direct = f.evaluate([moved])[0]
        composed = f.compose(system, h).evaluate([point])[0]
        assert composed == pytest.approx(direct, abs=1e-9)


def test_doubling_is_not_invertible():
    system = SystemSpec(kind='doubling')
    with pytest.raises(ValueError):
        TrigPoly.character((1,)).compose(system, -1)
    with pytest.raises(ValueError):
        iterate(system, DEFAULT_SEEDS['doubling'], -1)


def test_doubling_float_seed_budget():
    system = SystemSpec(kind='doubling')
    with pytest.raises(BudgetExceededError):
        iterate(system, 0.3, 60)


def test_doubling_orbit_from_exact_seed():
    system = SystemSpec(kind='doubling')
    seed = DEFAULT_SEEDS['doubling']
    points = orbit(system, seed, np.arange(0, 11))
    expected = [(2 ** n * (math.sqrt(2) - 1)) % 1 for n in range(11)]
    np.testing.assert_allclose(points, expected, atol=1e-9)


def test_rotation_orbit_matches_iterate():
    system = SystemSpec(kind='rotation', beta=(math.sqrt(5) - 1) / 2)
    points = orbit(system, 0.1, np.arange(-3, 6))
    expected = [iterate(system, 0.1, n) for n in range(-3, 6)]
    np.testing.assert_allclose(points, expected, atol=1e-12)


def test_skew_orbit_shape():
    system = SystemSpec(kind='skew', beta=0.3)
    points = orbit(system, DEFAULT_SEEDS['skew'], np.arange(1, 5))
    assert points.shape == (4, 2)
    np.testing.assert_allclose(points[2], iterate(system, DEFAULT_SEEDS['skew'], 3), atol=1e-12)


def test_weighted_average_cancels_over_a_period():
    system = SystemSpec(kind='rotation', beta=0.25)
    f = TrigPoly.character((1,))
    assert abs(weighted_average(system, f, 0.0, np.ones(4), 4)) < 1e-12
    constant = TrigPoly.constant(1.0)
    assert weighted_average(system, constant, 0.3, np.ones(10), 10) == pytest.approx(1.0)


def test_weighted_average_rejects_bad_weights():
    system = SystemSpec(kind='rotation', beta=0.25)
    f = TrigPoly.character((1,))
    with pytest.raises(ValueError):
        weighted_average(system, f, 0.0, [2.0, 0.0], 2)
    with pytest.raises(ValueError):
        weighted_average(system, f, 0.0, [1.0], 2)


def test_weighted_average_dimension_mismatch():
    with pytest.raises(ValueError):
        weighted_average(SystemSpec(kind='rotation', beta=0.25), TrigPoly.character((1, 0)), 0.0, [1.0], 1)


def test_twisted_poly_average_negative_iterates_on_doubling():
    system = SystemSpec(kind='doubling')
    with pytest.raises(ValueError):
        twisted_poly_average(system, TrigPoly.character((1,)), DEFAULT_SEEDS['doubling'], 0.0, (1, -2), 4)


def test_ww_sup_finds_resonant_twist():
    system = SystemSpec(kind='rotation', beta=0.25)
    f = TrigPoly.character((1,))
    rows = ww_sup_experiment(system, f, 0.0, [0.0, 0.5, 0.75], (1,), [8, 16])
    assert [row.N for row in rows] == [8, 16]
    for row in rows:
        assert row.sup_abs == pytest.approx(1.0)
        assert row.argmax_theta == 0.75
        assert row.lipschitz_radius == pytest.approx(2 * math.pi * row.N)


def test_ww_sup_rejects_bad_input():
    system = SystemSpec(kind='rotation', beta=0.25)
    f = TrigPoly.character((1,))
    with pytest.raises(ValueError):
        ww_sup_experiment(system, f, 0.0, [], (1,), [8])
    with pytest.raises(ValueError):
        ww_sup_experiment(system, f, 0.0, [0.5], (1,), [16, 8])


@pytest.mark.parametrize("theta", [0.0, 0.5, 0.1234])
@pytest.mark.parametrize("N", [1, 10, 1000, 10 ** 5])
@pytest.mark.parametrize("P", [(1,), (1, 0), (1, 0, 3)])
def test_rotation_character_factorises_through_phase_sums(theta, N, P):
    beta = (math.sqrt(5) - 1) / 2
    x0 = 0.3
    system = SystemSpec(kind='rotation', beta=beta)
    average = twisted_poly_average(system, TrigPoly.character((1,)), x0, theta, P, N)
    expected = cmath.exp(2j * math.pi * x0) * twisted_average(theta, beta, P, N).value
    assert abs(average - expected) <= 1e-10
