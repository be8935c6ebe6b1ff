"""
Property Suites
===============
Deterministic self-checks for every numerical module, run by the
`selftest` subcommand. Each suite returns CheckResult rows; a suite that
raises is recorded as a single failed check.

Features:
- Exact-inequality suites (van der Corput, Euler summation, L^p bounds)
- Oracle equivalences (Fourier U^2, big-integer derived rationals, Gauss sums)
- Closed forms (GHK seminorms, alternating variation)
- Decay diagnostics with the thresholds the experiments report
- quick mode with smaller sweeps for the test suite
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Sequence

import numpy as np
from colorama import Fore, Style

from circle_method import (
    build_multiplier, complete_sum, derived_rationals, hua_exponent_fit, minor_arc_decay,
    multiplier_residual, residual_exponent, s_sum, subdivision_check, v_integral,
)
from diophantine import bad_approx_constant, box_dimension, cantor_net, quadratic_net
from dynamics import DEFAULT_SEEDS, SystemSpec, TrigPoly, weighted_average, ww_sup_experiment
from hardy_weights import ClassWitness, parse_expr, running_averages, weight_sequence
from phase_sums import (
    PhasePoly, badly_approximable_sup_bound, euler_decay_bound, fit_weyl_constant, sup_estimate, sup_scan,
    vdc_lhs, vdc_rhs, weyl_average, weyl_bound_shape,
)
from uniformity import (
    CyclicSignal, GHKParams, fourier_u2, ghk_estimate, gowers_norm_cyclic, lp_bound_check,
    seminorm_domination,
)
from utils import (
    NAMED_CONSTANTS, BudgetExceededError, PropertyViolation, check_mode, loglog_fit, setup_logger,
)
from variation import LatticeSignal, growth_diagnostic, r_variation, variation_growth


logger = setup_logger('property_suites')

GOLDEN = NAMED_CONSTANTS['golden']
INEQUALITY_SLACK = 1e-12


@dataclass
class CheckResult:
    """One self-test verdict."""
    check: str
    passed: bool
    detail: str
    skipped: bool = False


def _primes_below(n: int) -> List[int]:
    sieve = np.ones(n, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(math.isqrt(n - 1)) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return [int(p) for p in np.nonzero(sieve)[0]]


def suite_van_der_corput(rng: np.random.Generator, quick: bool) -> List[CheckResult]:
    trials = 200 if quick else 1000
    worst = -math.inf
    failures = 0
    for _ in range(trials):
        N = int(rng.integers(1, 257))
        u = np.exp(2j * np.pi * rng.random(N))
        shifts = {1, N} | {int(h) for h in rng.integers(1, N + 1, size=6)}
        lhs = vdc_lhs(u)
        for H in sorted(shifts):
            gap = lhs - vdc_rhs(u, H)
            worst = max(worst, gap)
            failures += gap > INEQUALITY_SLACK
    return [CheckResult('vdc.inequality', failures == 0,
                        f"{trials} sequences, max lhs-rhs {worst:.3e}")]


# Witnesses for M_{delta,M,0}: (expr, delta, M, alpha, epsilon)
EULER_CASES = (
    ('s^0.3', 0.2, 4.0, 0.3, 0.03),
    ('s^0.5', 0.3, 2.0, 0.5, 0.01),
    ('s^0.7', 0.2, 2.0, 0.7, 0.05),
)


def suite_euler_summation(rng: np.random.Generator, quick: bool) -> List[CheckResult]:
    N_list = [10 ** k for k in range(2, 5 if quick else 7)]
    results = []
    for text, delta, M, alpha, eps in EULER_CASES:
        p = parse_expr(text)
        witness = ClassWitness(family='M', delta=delta, M_const=M, m=0, k=0, alpha=alpha, epsilon=eps)
        averages = running_averages(p, N_list)
        bounds = [euler_decay_bound(p, witness, N) for N in N_list]
        holds = all(abs(a) <= b for a, b in zip(averages, bounds))
        results.append(CheckResult(f"euler.bound[{text}]", holds,
                                   f"|avg| at N={N_list[-1]}: {abs(averages[-1]):.4g}"))
        if not quick:
            results.append(CheckResult(f"euler.decay[{text}]", abs(averages[-1]) <= 0.05,
                                       f"|avg| {abs(averages[-1]):.4g} <= 0.05"))
    return results


def suite_weighted_averages(rng: np.random.Generator, quick: bool) -> List[CheckResult]:
    N = 10 ** 4 if quick else 10 ** 6
    weights = weight_sequence(parse_expr('s^0.5'), N)
    cases = (
        ('rotation', SystemSpec(kind='rotation', beta=GOLDEN), 'f:e(x)'),
        ('skew', SystemSpec(kind='skew', beta=GOLDEN), 'f:e(y)'),
    )
    threshold = 0.1 if quick else 0.05
    results = []
    for name, system, text in cases:
        f = TrigPoly.parse(text, system.dimension)
        value = abs(weighted_average(system, f, DEFAULT_SEEDS[name], weights, N))
        results.append(CheckResult(f"dynamics.weighted_average[{name}]", value <= threshold,
                                   f"N={N}: {value:.4g} <= {threshold}"))
    report = seminorm_domination(cases[0][1], TrigPoly.parse('f:e(x)', 1), DEFAULT_SEEDS['rotation'],
                                 parse_expr('s^0.5'), N, GHKParams(N_per_level=100, H_per_level=10, m=2))
    results.append(CheckResult('uniformity.seminorm_domination', True,
                               f"|avg| {report['average_abs']:.4g} vs U^2 {report['seminorm']:.4g} "
                               f"(dominated: {report['dominated']})"))
    return results


def suite_gowers(rng: np.random.Generator, quick: bool) -> List[CheckResult]:
    trials = 100 if quick else 500
    worst = 0.0
    for _ in range(trials):
        f = CyclicSignal.random_gaussian(int(rng.integers(1, 65 if quick else 257)), rng)
        worst = max(worst, abs(gowers_norm_cyclic(f, 2) ** 4 - fourier_u2(f) ** 4))
    monotone = True
    for _ in range(trials // 5):
        f = CyclicSignal.random_unit(int(rng.integers(1, 33 if quick else 65)), rng)
        u1, u2, u3 = (gowers_norm_cyclic(f, m) for m in (1, 2, 3))
        monotone &= u1 <= u2 + 1e-12 and u2 <= u3 + 1e-12
    lp_ok = True
    for _ in range(trials if quick else 1000):
        f = CyclicSignal.random_gaussian(int(rng.integers(1, 33)), rng)
        lp_ok &= lp_bound_check(f, 2)[2] and lp_bound_check(f, 3)[2]
    return [
        CheckResult('uniformity.fourier_oracle', worst <= 1e-10, f"max |U2^4 - sum|f^|^4| {worst:.3e}"),
        CheckResult('uniformity.monotone', bool(monotone), "U1 <= U2 <= U3"),
        CheckResult('uniformity.lp_bound', bool(lp_ok), "U^m <= L^(2^m/(m+1))"),
    ]


def suite_ghk(rng: np.random.Generator, quick: bool) -> List[CheckResult]:
    N, H = (10 ** 3, 10) if quick else (10 ** 4, 10 ** 2)
    rotation = SystemSpec(kind='rotation', beta=GOLDEN)
    doubling = SystemSpec(kind='doubling')
    skew = SystemSpec(kind='skew', beta=GOLDEN)
    u2 = GHKParams(N_per_level=N, H_per_level=H, m=2)
    u3 = GHKParams(N_per_level=N, H_per_level=H, m=3)
    rot = ghk_estimate(rotation, TrigPoly.parse('f:e(x)', 1), u2)
    dbl = ghk_estimate(doubling, TrigPoly.parse('f:e(x)', 1), u2)
    skew2 = ghk_estimate(skew, TrigPoly.parse('f:e(y)', 2), u2)
    skew3 = ghk_estimate(skew, TrigPoly.parse('f:e(y)', 2), u3)
    return [
        CheckResult('ghk.rotation_u2', abs(rot - 1) <= 0.05, f"{rot:.6g}"),
        CheckResult('ghk.doubling_u2', dbl <= 0.05, f"{dbl:.6g}"),
        CheckResult('ghk.skew_u2', skew2 <= 0.05, f"{skew2:.6g}"),
        CheckResult('ghk.skew_u3', abs(skew3 - 1) <= 0.05, f"{skew3:.6g}"),
    ]


def _weyl_shape_constants(rng: np.random.Generator, samples: int) -> Dict[int, float]:
    """Fitted Weyl constant per degree over random rational leading coefficients a/q, q <= N."""
    ratios: Dict[int, List[float]] = {2: [], 3: []}
    for _ in range(samples):
        d = int(rng.integers(2, 4))
        N = 2 ** int(rng.integers(4, 11))
        q = int(rng.integers(1, N + 1))
        a = int(rng.integers(0, q))
        while math.gcd(a, q) != 1:
            a = (a + 1) % q
        lower = tuple(Fraction(int(c), N) for c in rng.integers(0, N, size=d - 1))
        value = weyl_average(PhasePoly((Fraction(a, q),) + lower), N).value
        ratios[d].append(weyl_bound_shape(value, q, N, d))
    return {d: fit_weyl_constant(r) for d, r in ratios.items() if r}


def suite_badly_approximable(rng: np.random.Generator, quick: bool) -> List[CheckResult]:
    c = bad_approx_constant(GOLDEN, 10 ** 6, q_min=100)
    eps = 0.01
    vacuous = all(badly_approximable_sup_bound(c, 2 ** k, eps) > 1 for k in range(1, 37))
    Ns = [2 ** k for k in range(6, 11 if quick else 13)]
    sups = []
    for N in Ns:
        try:
            result = sup_scan(GOLDEN, (1, 0), N)
        except BudgetExceededError:
            result = sup_estimate(GOLDEN, (1, 0), N)
        sups.append(result.sup_value)
    stated = all(s <= badly_approximable_sup_bound(c, N, eps) for s, N in zip(sups, Ns))
    decreasing = all(b < a for a, b in zip(sups, sups[1:]))
    slope, _, _ = loglog_fit(Ns, sups)
    shape = _weyl_shape_constants(rng, 100 if quick else 200)
    return [
        CheckResult('weyl.bound_vacuous', vacuous, f"c={c:.6f}, bound > 1 for N <= 2^36"),
        CheckResult('weyl.bound_stated', stated, "sup <= 1/(c N^(1/32-eps))"),
        CheckResult('weyl.sup_decreasing', decreasing and slope <= -1 / 32, f"slope {slope:.4f}"),
        CheckResult('weyl.bound_shape', all(math.isfinite(v) for v in shape.values()),
                    ", ".join(f"C_fit(d={d}) = {v:.4g}" for d, v in shape.items())),
    ]


def suite_wiener_wintner_sup(rng: np.random.Generator, quick: bool) -> List[CheckResult]:
    net = quadratic_net((1, 2), 4)
    system = SystemSpec(kind='rotation', beta=GOLDEN)
    N_list = [2 ** 8, 2 ** 12 if quick else 2 ** 16]
    rows = ww_sup_experiment(system, TrigPoly.parse('f:e(x)', 1), DEFAULT_SEEDS['rotation'],
                             net, (1, 0), N_list)
    factor = rows[0].sup_abs / rows[-1].sup_abs if rows[-1].sup_abs > 0 else math.inf
    # quick mode spans half the doublings
    required = 2 if quick else 4
    return [CheckResult('dynamics.ww_sup_decay', len(net) == 16 and factor >= required,
                        f"{len(net)} twists, decay factor {factor:.4g}")]


def suite_box_dimension(rng: np.random.Generator, quick: bool) -> List[CheckResult]:
    intervals = cantor_net((1, 2), 12)
    slope, residual = box_dimension(intervals, np.geomspace(2.0 ** -6, 2.0 ** -14, 9))
    return [CheckResult('diophantine.box_dimension', abs(slope - 0.531) <= 0.05,
                        f"slope {slope:.4f} (residual {residual:.3g})")]


def _derived_oracle(a: int, b: int, j: int, P: Sequence[int], x: int, y: int) -> List[Fraction]:
    """Derived rationals from integer residues only."""
    d, m_d = len(P), P[0]
    out = []
    for i in range(d - 1, 0, -1):
        num, den = P[d - i] * (j * b + a), m_d * b
        if i == 1:
            num, den = num * y - x * den, den * y
        num %= den
        g = math.gcd(num, den)
        out.append(Fraction(num // g, den // g))
    return out


def suite_circle_method(rng: np.random.Generator, quick: bool) -> List[CheckResult]:
    trials = 10 ** 3 if quick else 10 ** 4
    mismatches = 0
    for _ in range(trials):
        d = int(rng.integers(2, 5))
        m_d = int(rng.integers(1, 5))
        P = [m_d] + [int(v) for v in rng.integers(-6, 7, size=d - 1)]
        b = int(rng.integers(1, 200))
        a = int(rng.integers(0, b))
        while math.gcd(a, b) != 1:
            a = (a + 1) % b
        j = int(rng.integers(0, m_d))
        y = int(rng.integers(1, 50))
        x = int(rng.integers(0, y + 1))
        derived, _ = derived_rationals(Fraction(a, b), j, P, Fraction(x, y))
        mismatches += derived != _derived_oracle(a, b, j, P, x, y)
    gauss = max(abs(abs(complete_sum((Fraction(1, p), Fraction(0)))) - 1 / math.sqrt(p))
                for p in _primes_below(200) if p > 2)
    violations = 0
    with check_mode():
        for N in (2 ** 8, 2 ** 12):
            for beta in np.geomspace(1e-3, 1e2, 10 if quick else 40) / N ** 2:
                try:
                    v_integral(N, 2, 1, float(beta), 0.0)
                except PropertyViolation as exc:
                    violations += 1
                    logger.warning(str(exc))
    model = build_multiplier(0, (1, 0), 2 ** 14, 0.2)
    atoms_ok = all(abs(a.S) <= 1 + 1e-12 and abs(s_sum(a, model.P) - a.S) <= 1e-12 for a in model.windows)
    hua = hua_exponent_fit(model.atoms, 2)
    return [
        CheckResult('circle.derived_rationals', mismatches == 0, f"{trials} inputs, {mismatches} mismatches"),
        CheckResult('circle.gauss_modulus', gauss <= 1e-12, f"max deviation {gauss:.3e}"),
        CheckResult('circle.v_integral_bounds', violations == 0, f"{violations} violations"),
        CheckResult('circle.atom_weights', atoms_ok,
                    f"{len(model.windows)} atoms, fitted nu {hua['nu']:.3f} (reference {hua['reference']:.3f})"),
    ]


def suite_multiplier_decay(rng: np.random.Generator, quick: bool) -> List[CheckResult]:
    delta = 0.05
    top = 11 if quick else 15
    reference = 1 - 2 * delta
    results = []
    for label, theta in (('0', 0), ('1/2', Fraction(1, 2)), ('golden', GOLDEN)):
        rows = multiplier_residual(theta, (1, 0), [2 ** k for k in range(6, top)], delta)
        if not any(row['samples'] for row in rows):
            results.append(CheckResult(f"circle.residual_exponent[{label}]", True,
                                       f"skipped, no major windows at delta {delta}", skipped=True))
            continue
        exponent = residual_exponent(rows)
        results.append(CheckResult(f"circle.residual_exponent[{label}]", abs(exponent - reference) <= 0.1,
                                   f"fitted {exponent:.4f}, reference {reference:.2f}"))
    N_list = [2 ** k for k in range(8, 12 if quick else 15)]
    for label, theta in (('0', 0), ('1/2', Fraction(1, 2)), ('golden', GOLDEN)):
        decay = minor_arc_decay(theta, (1, 0), N_list, delta, samples=10 ** 3 if quick else 10 ** 4,
                                seed=int(rng.integers(0, 2 ** 31)))
        results.append(CheckResult(f"circle.minor_arc[{label}]", decay['kappa'] > 0,
                                   f"kappa {decay['kappa']:.4f}"))
    for label, theta in (('golden', GOLDEN), ('sqrt2-1', NAMED_CONSTANTS['sqrt2-1'])):
        report = subdivision_check(theta, (1, 0), delta, 2.0, 2 ** 14 if quick else 2 ** 20)
        results.append(CheckResult(f"circle.subdivision[{label}]", report['passed'],
                                   f"{report['scales_checked']} scales"))
    return results


def _variation_exhaustive(v: np.ndarray, r: float) -> float:
    best = 0.0
    for size in range(2, len(v) + 1):
        for idx in itertools.combinations(range(len(v)), size):
            best = max(best, float(np.sum(np.abs(np.diff(v[list(idx)])) ** r)))
    return best ** (1 / r)


def suite_variation(rng: np.random.Generator, quick: bool) -> List[CheckResult]:
    worst = 0.0
    for _ in range(50 if quick else 200):
        K = int(rng.integers(1, 9 if quick else 13))
        v = rng.standard_normal(K) + 1j * rng.standard_normal(K)
        r = float(rng.uniform(1, 4))
        exact = _variation_exhaustive(v, r)
        worst = max(worst, abs(r_variation(v, r) - exact) / max(1.0, exact))
    alternating = all(
        abs(r_variation(np.arange(K) % 2, 2) - math.sqrt(K - 1)) <= 1e-12 for K in range(1, 20))
    table = variation_growth(LatticeSignal.delta(0), GOLDEN, (1, 0), 2.0, 2.5,
                             2 ** 10 if quick else 2 ** 14)
    growth = growth_diagnostic(table)
    return [
        CheckResult('variation.dp_exhaustive', worst <= 1e-12, f"max relative gap {worst:.3e}"),
        CheckResult('variation.alternating', alternating, "V^2 of 0,1,0,... equals sqrt(K-1)"),
        CheckResult('variation.growth_reported', True,
                    f"last-quartile increment {growth['relative']:.4f} of {growth['final']:.6g}"),
    ]


SUITES: Dict[str, Callable[[np.random.Generator, bool], List[CheckResult]]] = {
    'vdc': suite_van_der_corput,
    'euler': suite_euler_summation,
    'weighted': suite_weighted_averages,
    'gowers': suite_gowers,
    'ghk': suite_ghk,
    'weyl': suite_badly_approximable,
    'ww-sup': suite_wiener_wintner_sup,
    'box': suite_box_dimension,
    'circle': suite_circle_method,
    'multiplier': suite_multiplier_decay,
    'variation': suite_variation,
}


def run_suites(names: Sequence[str], seed: int, quick: bool = False) -> List[CheckResult]:
    """
    Run the named suites in order, each with its own seeded generator.

    Args:
        names: Keys of SUITES
        seed: Base seed; suite i uses default_rng([seed, i])
        quick: Smaller sweeps

    Returns:
        All CheckResult rows in suite order
    """
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suites {unknown}; available: {', '.join(SUITES)}")
    results: List[CheckResult] = []
    for index, name in enumerate(SUITES):
        if name not in names:
            continue
        rng = np.random.default_rng([seed, index])
        try:
            results.extend(SUITES[name](rng, quick))
        except Exception as exc:
            logger.error(f"suite {name} raised {type(exc).__name__}: {exc}")
            results.append(CheckResult(f"{name}.suite", False, f"{type(exc).__name__}: {exc}"))
    return results


def print_summary(results: Sequence[CheckResult], stream) -> None:
    """Coloured PASS/FAIL lines on the console stream."""
    print("=" * 60, file=stream)
    print("SELF-TEST SUMMARY", file=stream)
    print("=" * 60, file=stream)
    colour = getattr(stream, 'isatty', lambda: False)()
    for result in results:
        mark = 'SKIP' if result.skipped else 'PASS' if result.passed else 'FAIL'
        if colour:
            tint = Fore.YELLOW if result.skipped else Fore.GREEN if result.passed else Fore.RED
            mark = tint + mark + Style.RESET_ALL
        print(f"{mark} {result.check}: {result.detail}", file=stream)
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed", file=stream)
    print("=" * 60, file=stream)
