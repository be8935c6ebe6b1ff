"""
Tests for the self-test property suites.
"""

import io

import pytest

import property_suites
from property_suites import SUITES, CheckResult, print_summary, run_suites


@pytest.mark.parametrize("name", ['vdc', 'gowers', 'variation'])
def test_quick_suite_passes(name):
    results = run_suites([name], seed=1, quick=True)
    assert results
    failed = [r for r in results if not r.passed]
    assert failed == []


@pytest.mark.slow
@pytest.mark.parametrize("name", ['euler', 'weighted', 'ghk', 'weyl', 'ww-sup', 'box', 'circle', 'multiplier'])
def test_heavier_suite_passes(name):
    results = run_suites([name], seed=1, quick=True)
    assert all(r.passed for r in results), [r for r in results if not r.passed]


@pytest.mark.slow
def test_full_multiplier_suite_passes():
    results = run_suites(['multiplier'], seed=1, quick=False)
    assert all(r.passed for r in results), [r for r in results if not r.passed]
    residual = {r.check: r for r in results if r.check.startswith('circle.residual_exponent')}
    assert not residual['circle.residual_exponent[0]'].skipped
    assert residual['circle.residual_exponent[golden]'].skipped


def test_rows_follow_suite_order():
    results = run_suites(['variation', 'vdc'], seed=3, quick=True)
    assert results[0].check == 'vdc.inequality'
    assert results[-1].check.startswith('variation.')


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suites(['vdc', 'nope'], seed=1)


def test_raising_suite_becomes_failed_row(monkeypatch):
    def broken(rng, quick):
        raise RuntimeError("no luck")

    monkeypatch.setitem(SUITES, 'vdc', broken)
    results = run_suites(['vdc'], seed=1, quick=True)
    assert len(results) == 1
    assert results[0].check == 'vdc.suite'
    assert not results[0].passed
    assert 'no luck' in results[0].detail


def test_suites_are_seeded():
    first = run_suites(['vdc', 'variation'], seed=42, quick=True)
    second = run_suites(['vdc', 'variation'], seed=42, quick=True)
    assert first == second


def test_summary_without_colour_off_a_terminal():
    stream = io.StringIO()
    print_summary([CheckResult('a.ok', True, 'fine'), CheckResult('b.bad', False, 'broken')], stream)
    text = stream.getvalue()
    assert 'SELF-TEST SUMMARY' in text
    assert 'PASS a.ok: fine' in text
    assert 'FAIL b.bad: broken' in text
    assert '1/2 checks passed' in text
    assert '\x1b[' not in text


def test_every_suite_registered():
    assert list(property_suites.SUITES) == [
        'vdc', 'euler', 'weighted', 'gowers', 'ghk', 'weyl', 'ww-sup', 'box', 'circle', 'multiplier',
        'variation',
    ]


def test_summary_marks_skipped_checks():
    stream = io.StringIO()
    print_summary([CheckResult('c.none', True, 'skipped, nothing to fit', skipped=True)], stream)
    text = stream.getvalue()
    assert 'SKIP c.none: skipped, nothing to fit' in text
    assert '1/1 checks passed' in text
