"""
Tests for r-variation, twisted convolutions and variation-growth tables.
"""

import itertools
import math

import numpy as np
import pytest

from utils import BudgetExceededError, lacunary_set
from variation import (
    LatticeSignal, VariationSeries, growth_diagnostic, lacunary_means, r_variation, sup_difference,
    twisted_convolution, variation_growth,
)


GOLDEN = (math.sqrt(5) - 1) / 2


def brute_force_variation(values, r):
    best = 0.0
    for size in range(2, len(values) + 1):
        for path in itertools.combinations(range(len(values)), size):
            total = sum(abs(values[b] - values[a]) ** r for a, b in zip(path, path[1:]))
            best = max(best, total)
    return best ** (1 / r)


@pytest.mark.parametrize("K", [2, 5, 9])
def test_alternating_sequence_variation(K):
    values = [k % 2 for k in range(K)]
    assert r_variation(values, 2) == pytest.approx(math.sqrt(K - 1))


def test_monotone_sequence_takes_one_jump():
    assert r_variation([0, 1, 2, 3], 2) == pytest.approx(3.0)


@pytest.mark.parametrize("r", [1.0, 2.0, 2.5, 4.0])
def test_variation_matches_exhaustive_search(r):
    rng = np.random.default_rng(11)
    values = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    assert r_variation(values, r) == pytest.approx(brute_force_variation(values, r))


def test_variation_rejects():
    with pytest.raises(ValueError):
        r_variation([0, 1], 0.5)
    with pytest.raises(ValueError):
        r_variation([], 2)


def test_single_value_has_no_variation():
    assert r_variation([3.0], 2) == 0.0


def test_sup_difference():
    assert sup_difference([0, 1j, 2]) == pytest.approx(math.sqrt(5))


def test_prefix_variations_are_monotone():
    values = np.array([[0.0], [1.0], [0.0], [1.0]])
    series = VariationSeries(np.array([1, 2, 4, 8]), values)
    prefix = series.prefix_variations(2.0)[:, 0]
    np.testing.assert_allclose(prefix, [0.0, 1.0, math.sqrt(2), math.sqrt(3)])


def test_series_requires_increasing_labels():
    with pytest.raises(ValueError):
        VariationSeries(np.array([2, 1]), np.zeros((2, 1)))


def test_convolution_of_delta_is_uniform_shift():
    out = twisted_convolution(LatticeSignal.delta(0), 0, (1,), 4)
    assert out.offset == 1
    np.testing.assert_allclose(out.values, [0.25] * 4)


def test_reflected_convolution_moves_left():
    out = twisted_convolution(LatticeSignal.delta(0), 0, (1,), 4, reflected=True)
    assert out.offset == -4
    assert out.at(-2) == pytest.approx(0.25)
    assert out.at(1) == 0


def test_twist_phases_in_convolution():
    out = twisted_convolution(LatticeSignal.delta(0), 0.25, (1,), 4)
    # K_N delta(n) = e(-n/4) / 4
    assert out.at(1) == pytest.approx(-0.25j)
    assert out.at(2) == pytest.approx(-0.25)


def test_lacunary_means_agree_with_direct_convolution():
    f = LatticeSignal(-2, np.array([1.0, 0.5j, -1.0]))
    scales = [1, 2, 4, 8, 16]
    series = lacunary_means(f, GOLDEN, (1, 0), scales)
    for k, N in enumerate(scales):
        direct = twisted_convolution(f, GOLDEN, (1, 0), N)
        assert np.linalg.norm(series.values[k]) == pytest.approx(direct.l2())
        assert np.sum(series.values[k]) == pytest.approx(np.sum(direct.values))


def test_dense_span_budget():
    with pytest.raises(BudgetExceededError):
        twisted_convolution(LatticeSignal.delta(0), 0, (1, 0, 0), 2 ** 9)


def test_variation_growth_rows():
    rows = variation_growth(LatticeSignal.delta(0), GOLDEN, (1, 0), 2.0, 2.5, 64)
    assert [row['N_max'] for row in rows] == [1, 2, 4, 8, 16, 32, 64]
    ratios = [row['ratio'] for row in rows]
    assert ratios[0] == 0.0
    assert all(b >= a for a, b in zip(ratios, ratios[1:]))


def test_variation_growth_rejects():
    with pytest.raises(ValueError):
        variation_growth(LatticeSignal.delta(0), GOLDEN, (1, 0), 2.0, 2.0, 64)
    with pytest.raises(ValueError):
        variation_growth(LatticeSignal(0, np.zeros(3)), GOLDEN, (1, 0), 2.0, 3.0, 64)


def test_growth_diagnostic():
    table = [{'N_max': N, 'ratio': value} for N, value in zip([1, 2, 4, 8], [0.0, 0.5, 0.8, 1.0])]
    report = growth_diagnostic(table)
    assert report['increment'] == pytest.approx(0.2)
    assert report['final'] == 1.0
    assert growth_diagnostic(table[:1]) == {'increment': 0.0, 'relative': 0.0, 'final': 0.0}


def test_lacunary_set():
    assert lacunary_set(2, 20) == [1, 2, 4, 8, 16]
    assert lacunary_set(1.5, 5) == [1, 2, 3, 5]
    with pytest.raises(ValueError):
        lacunary_set(1.0, 10)
