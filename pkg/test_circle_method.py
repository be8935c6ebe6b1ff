"""
Tests for complete sums, oscillatory integrals and the approximate multiplier.
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import fresnel

from circle_method import (
    MajorBoxSpec, approx_multiplier, build_multiplier, complete_sum, derived_rationals, enumerate_A_N,
    group_by_scale, hua_exponent_fit, khat, khat_many, minor_arc_decay, multiplier_residual, omega,
    omega_variation, residual_exponent, s_sum, scale_cardinality_ok, square_sum_diagnostic,
    subdivision_check, v_integral,
)
from utils import BudgetExceededError, check_mode


GOLDEN = (math.sqrt(5) - 1) / 2


@pytest.mark.parametrize("p", [3, 5, 7, 11, 101])
def test_quadratic_gauss_sum_modulus(p):
    assert abs(complete_sum((Fraction(1, p), Fraction(0)))) == pytest.approx(1 / math.sqrt(p), abs=1e-12)


def test_complete_sum_linear_cancels():
    assert abs(complete_sum((Fraction(1, 2),))) < 1e-15
    assert complete_sum((Fraction(0), Fraction(0))) == pytest.approx(1.0)


def test_complete_sum_budget():
    with pytest.raises(BudgetExceededError):
        complete_sum((Fraction(1, (1 << 20) + 1),))


def test_derived_rationals():
    derived, b_N = derived_rationals(Fraction(1, 3), 1, (2, 1), Fraction(0))
    assert derived == [Fraction(2, 3)]
    assert b_N == 3
    derived, b_N = derived_rationals(Fraction(1, 2), 0, (1, 0), Fraction(1, 4))
    assert derived == [Fraction(3, 4)]
    assert b_N == 4


def test_derived_rationals_rejects():
    with pytest.raises(ValueError):
        derived_rationals(Fraction(1, 2), 1, (1, 0), Fraction(0))
    with pytest.raises(ValueError):
        derived_rationals(Fraction(1, 2), 0, (1,), Fraction(0))


def test_omega():
    assert omega(100, 0.0) == 1.0
    assert abs(omega(1, 1.0)) < 1e-15


def test_v_integral_at_zero_frequency():
    assert v_integral(64, 2, 1, 0.0, 0.0) == pytest.approx(1.0, abs=1e-9)


def test_v_integral_matches_fresnel():
    # int_0^1 e(t^2) dt = (C(2) + i S(2)) / 2
    S, C = fresnel(2.0)
    value = v_integral(10, 2, 1, 0.01, 0.0)
    assert value == pytest.approx(complex(C / 2, S / 2), abs=1e-8)


def test_v_integral_bounds_hold_in_check_mode():
    with check_mode(True):
        for beta in (1e-5, -3e-4, 2e-3):
            v_integral(32, 2, 1, beta, 0.001)


def test_v_integral_oscillation_budget():
    with pytest.raises(BudgetExceededError):
        v_integral(2 ** 12, 2, 1, 0.25, 0.0)


def test_khat_many_matches_khat():
    alphas = [0.0, 0.1, 0.37, GOLDEN]
    values = khat_many(GOLDEN, (1, 0), 50, alphas)
    for alpha, value in zip(alphas, values):
        assert value == pytest.approx(khat(GOLDEN, (1, 0), 50, alpha), abs=1e-9)


def test_multiplier_at_rational_twist_has_zero_atom():
    model = build_multiplier(0, (1, 0), 2 ** 10, 0.05)
    assert model.approx is not None
    assert len(model.windows) == 1
    zero = model.windows[0]
    assert zero.box.center == 0.0
    assert zero.S == pytest.approx(1.0)
    assert model.disjoint
    assert model.in_major([0.0, 0.5]).tolist() == [True, False]


def test_multiplier_without_approximate_is_empty():
    model = build_multiplier(GOLDEN, (1, 0), 2 ** 10, 0.05)
    assert model.approx is None
    assert model.windows == []
    assert scale_cardinality_ok(model.atoms, 1)


def test_multiplier_residual_rows():
    rows = multiplier_residual(0, (1, 0), [2 ** 6, 2 ** 8], 0.05, samples_per_window=8)
    assert [row['N'] for row in rows] == [64, 256]
    for row in rows:
        assert row['samples'] == 8
        assert 0 <= row['max_residual'] < 0.5
        assert row['bound_scale'] == pytest.approx(row['N'] ** (0.1 - 1))


def test_multiplier_residual_without_windows():
    rows = multiplier_residual(GOLDEN, (1, 0), [2 ** 10, 2 ** 12], 0.05)
    assert all(row['samples'] == 0 and math.isnan(row['max_residual']) for row in rows)
    assert math.isnan(residual_exponent(rows))


def test_minor_arc_decay_single_scale_is_degenerate():
    report = minor_arc_decay(GOLDEN, (1, 0), [2 ** 6], 0.05, samples=1000, seed=1)
    assert report['degenerate']
    assert math.isnan(report['kappa'])
    assert 0 <= report['rows'][0]['max_minor'] <= 1


def test_minor_arc_decay_needs_samples():
    with pytest.raises(ValueError):
        minor_arc_decay(GOLDEN, (1, 0), [64], 0.05, samples=10)


def test_subdivision_report():
    report = subdivision_check(GOLDEN, (1, 0), 0.05, 2.0, 2 ** 12)
    assert report['passed']
    assert report['scales_checked'] == 12
    assert report['violations'] == []


def test_major_box_validation():
    with pytest.raises(ValueError):
        MajorBoxSpec(j=-1, a_over_b=Fraction(0), center=0.0, half_width=0.1, N=4, delta=0.05)
    box = MajorBoxSpec(j=0, a_over_b=Fraction(0), center=0.0, half_width=0.1, N=4, delta=0.05)
    assert box.contains(np.array([0.95, 0.5])).tolist() == [True, False]


def test_s_sum_reproduces_atom_weights():
    model = build_multiplier(0, (1, 0), 2 ** 14, 0.2)
    assert len(model.atoms) > 0
    for atom in model.windows:
        assert s_sum(atom, model.P) == atom.S


def test_approx_multiplier_at_and_away_from_zero_atom():
    assert approx_multiplier(0, (1, 0), 2 ** 10, 0.05, 0.0) == pytest.approx(1.0, abs=1e-9)
    assert approx_multiplier(0, (1, 0), 2 ** 10, 0.05, 0.5) == 0


def test_omega_variation():
    report = omega_variation([(8, 0.1), (4, 0.0)])
    assert report['v1'] == pytest.approx(abs(omega(8, 0.1) - 1))
    assert report['block_bound_sum'] == 0.0
    assert [step['N'] for step in report['steps']] == [4]


def test_hua_exponent_fit_on_gauss_sums():
    model = build_multiplier(0, (1, 0), 2 ** 14, 0.2)
    fit = hua_exponent_fit(model.atoms, 2)
    assert fit['reference'] == 0.25
    assert fit['points'] > 0
    assert fit['nu'] > 0


def test_square_sum_diagnostic_report():
    report = square_sum_diagnostic(0, (1, 0), 0.05, 2.0, 2 ** 8, [1e-6, 1e-3, 0.25])
    assert report['scales'] == 8
    assert report['samples'] == 3
    assert report['sup'] >= 0
    assert report['argmax_alpha'] in (1e-6, 1e-3, 0.25)


def test_enumerate_atoms_at_rational_twist():
    atoms = enumerate_A_N(0, (1, 0), 2 ** 10, 0.2)
    assert sorted(atom.box.a_over_b for atom in atoms) == [
        Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4)]
    assert all(atom.box.j == 0 and atom.b_N_j == atom.box.a_over_b.denominator for atom in atoms)
    groups = group_by_scale(atoms)
    assert {t: len(group) for t, group in groups.items()} == {1: 3, 2: 2}
    assert enumerate_A_N(GOLDEN, (1, 0), 2 ** 10, 0.05) == []


def test_multiplier_residual_keeps_window_edges_at_large_N():
    rows = multiplier_residual(0, (1, 0), [2 ** 13, 2 ** 14], 0.05)
    assert all(row['samples'] == 16 for row in rows)
    assert rows[1]['max_residual'] < rows[0]['max_residual'] < 1e-3
