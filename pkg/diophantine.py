"""
Diophantine Approximation
=========================
Exact continued-fraction arithmetic over Python integers (rationals are
fractions.Fraction, always gcd-reduced), Dirichlet approximants,
badly-approximable constants, continued-fraction Cantor sets E_A with
box-counting dimension, and the N-theta rational approximates of the
circle-method decomposition.

Features:
- Expansions of the exact binary value of a double, with resolution
  truncation and rational termination flagged
- Exact periodic (quadratic irrational) constructor
- Best approximations from convergents and intermediate fractions
- Cylinder nets with rational endpoints and grid box counting
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from mpmath import mp

from utils import loglog_fit, setup_logger


logger = setup_logger('diophantine')

MAX_CANTOR_DEPTH = 12
Interval = Tuple[Fraction, Fraction]


@dataclass(frozen=True)
class CFExpansion:
    """Leading continued-fraction digits of theta = [0; a_1, a_2, ...]."""
    digits: Tuple[int, ...]
    value: float
    terminated: bool = False
    truncated: bool = False

    def __post_init__(self):
        if any(int(a) != a or a < 1 for a in self.digits):
            raise ValueError("continued-fraction digits must be integers >= 1")


@dataclass(frozen=True)
class NThetaApprox:
    """N-theta rational approximate x_N/y_N with gamma_N = x_N/y_N - theta."""
    N: int
    x_over_y: Fraction
    gamma: float
    delta: float
    m_d: int

    def __post_init__(self):
        y = self.x_over_y.denominator
        if y > self.m_d * self.N ** self.delta * (1 + 1e-12):
            raise ValueError("denominator exceeds m_d N^delta")
        if abs(self.gamma) > 2 * self.N ** (self.delta - 1) * (1 + 1e-12):
            raise ValueError("|gamma| exceeds 2 N^(delta-1)")


def _expansion(x: Fraction) -> Iterator[Tuple[int, int, int]]:
    """Yield (a_k, p_k, q_k) for the exact rational x, starting with a_0 = floor(x)."""
    a = math.floor(x)
    p_prev, q_prev, p, q = 1, 0, a, 1
    yield a, p, q
    rem = x - a
    while rem:
        inv = 1 / rem
        a = math.floor(inv)
        rem = inv - a
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        yield a, p, q


def cf_expand(theta: float, max_terms: int = 64) -> CFExpansion:
    """
    Continued-fraction digits of theta in (0, 1).

    Stops with terminated=True when theta equals a convergent to within float
    resolution, and with truncated=True once further digits are no longer
    determined by the double.

    Args:
        theta: Real in (0, 1)
        max_terms: Largest number of digits returned

    Returns:
        CFExpansion
    """
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    if max_terms < 1:
        raise ValueError("max_terms must be >= 1")
    x = Fraction(theta)
    ulp = math.ulp(float(theta))
    digits: List[int] = []
    terminated = truncated = False
    stream = _expansion(x)
    next(stream)
    for a, p, q in stream:
        digits.append(a)
        err = abs(x - Fraction(p, q))
        if err == 0 or (err <= 8 * ulp and err * q * q < 1e-6):
            terminated = True
            break
        if 8 * q * q * ulp > 1:
            truncated = True
            break
        if len(digits) >= max_terms:
            break
    return CFExpansion(tuple(digits), float(theta), terminated, truncated)


def _matrix(digits: Sequence[int]) -> Tuple[int, int, int, int]:
    """(p_k, q_k, p_{k-1}, q_{k-1}) of [0; digits]."""
    p_prev, q_prev, p, q = 1, 0, 0, 1
    for a in digits:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    return p, q, p_prev, q_prev


def cf_periodic(period: Sequence[int], preperiod: Sequence[int] = (), max_terms: int = 40) -> CFExpansion:
    """
    Exact quadratic irrational [0; preperiod, period, period, ...].

    The periodic tail y solves q_{k-1} y^2 + (q_k - p_{k-1}) y - p_k = 0; the
    value is evaluated at 50 digits before rounding to a double.
    """
    period = tuple(int(a) for a in period)
    preperiod = tuple(int(a) for a in preperiod)
    if not period:
        raise ValueError("period must be nonempty")
    p, q, p_prev, q_prev = _matrix(period)
    with mp.workdps(50):
        b = mp.mpf(q - p_prev)
        y = (-b + mp.sqrt(b * b + 4 * q_prev * p)) / (2 * q_prev)
        pp, qq, pp_prev, qq_prev = _matrix(preperiod)
        x = (pp + pp_prev * y) / (qq + qq_prev * y)
        value = float(x)
    digits = list(preperiod)
    while len(digits) < max_terms:
        digits.extend(period)
    return CFExpansion(tuple(digits[:max_terms]), value)


def convergents(cf: CFExpansion) -> List[Fraction]:
    """Convergents p_k/q_k of [0; a_1, ..., a_n] by the standard recurrence."""
    if not cf.digits:
        raise ValueError("empty expansion")
    result = []
    p_prev, q_prev, p, q = 1, 0, 0, 1
    for a in cf.digits:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        result.append(Fraction(p, q))
    return result


def _best_candidates(x: Fraction, Q: int) -> Tuple[Fraction, Optional[Fraction]]:
    """Last convergent with q <= Q and the largest intermediate fraction with q <= Q."""
    p_prev, q_prev = 1, 0
    last = None
    for _, p, q in _expansion(x):
        if q > Q:
            t = (Q - q_prev) // last.denominator
            if t >= 1:
                return last, Fraction(p_prev + t * last.numerator, q_prev + t * last.denominator)
            return last, None
        if last is not None:
            p_prev, q_prev = last.numerator, last.denominator
        last = Fraction(p, q)
    return last, None


def best_approximation(alpha: Any, Q: int) -> Fraction:
    """Closest rational to alpha with denominator <= Q (ties: the convergent)."""
    if Q < 1:
        raise ValueError("Q must be >= 1")
    x = Fraction(alpha)
    convergent, intermediate = _best_candidates(x, int(Q))
    if intermediate is not None and abs(x - intermediate) < abs(x - convergent):
        return intermediate
    return convergent


def dirichlet_approx(alpha: Any, Q: int) -> Fraction:
    """
    Rational p/q with q <= Q and |alpha - p/q| <= 1/(qQ).

    Args:
        alpha: Real number (taken at its exact binary value)
        Q: Denominator ceiling

    Returns:
        The closer of the last convergent and the largest intermediate fraction
        that still meets the contract
    """
    if Q < 1:
        raise ValueError("Q must be >= 1")
    x = Fraction(alpha)
    convergent, intermediate = _best_candidates(x, int(Q))
    if intermediate is not None:
        err = abs(x - intermediate)
        if err < abs(x - convergent) and err <= Fraction(1, intermediate.denominator * int(Q)):
            return intermediate
    return convergent


def _dist_to_integer(value: Fraction) -> Fraction:
    return abs(value - round(value))


def bad_approx_constant(theta: Any, Q: int, q_min: int = 1) -> float:
    """
    c_Q(theta) = min_{q_min <= q <= Q} q * dist(q theta, Z).

    For q_k <= q < q_{k+1}, dist(q theta, Z) >= dist(q_k theta, Z), so past the
    first convergent denominator >= q_min only convergents are scanned. The
    stretch from q_min up to that convergent holds no such bound and is
    scanned in full.
    """
    if Q < 1 or q_min < 1:
        raise ValueError("Q and q_min must be >= 1")
    x = Fraction(theta)
    values = []
    first = None
    for _, _, q in _expansion(x):
        if q > Q:
            break
        if q >= q_min:
            first = q if first is None else first
            values.append(q * _dist_to_integer(q * x))
    gap_end = first - 1 if first is not None else int(Q)
    values.extend(q * _dist_to_integer(q * x) for q in range(q_min, gap_end + 1))
    return float(min(values)) if values else float('inf')


def digit_bound_bracket(theta: float, Q: int, max_terms: int = 64) -> Dict[str, Any]:
    """
    Empirical c_Q next to both printed digit brackets.

    Returns:
        Dictionary with c_Q, max digit M, the left bracket 1/inf a_j,
        the right bracket 1/((M+2)(M+1)^2) and whether each side holds
    """
    cf = cf_expand(theta, max_terms)
    c = bad_approx_constant(theta, Q)
    big = max(cf.digits)
    left = 1.0 / min(cf.digits)
    right = 1.0 / ((big + 2) * (big + 1) ** 2)
    return {
        'theta': theta,
        'Q': Q,
        'c_Q': c,
        'max_digit': big,
        'left_bracket': left,
        'right_bracket': right,
        'left_holds': left <= c,
        'right_holds': c <= right,
        'bracket_consistent': left <= right,
    }


def cantor_net(A: Sequence[int], depth: int) -> List[Interval]:
    """
    Cylinder intervals of E_A = {[0; a_1, a_2, ...] : a_j in A} to the given depth.

    Each word a_1..a_k gives the image of t under t -> (p_k + p_{k-1} t)/(q_k + q_{k-1} t)
    with t restricted to the tail range [1/(max A + 1), 1/min A], which keeps
    sibling cylinders disjoint.

    Args:
        A: Finite digit set, min(A) >= 1
        depth: Word length, 1..12

    Returns:
        Sorted list of (lo, hi) exact rational endpoints
    """
    digits = sorted(set(int(a) for a in A))
    if not digits:
        raise ValueError("digit set A must be nonempty")
    if digits[0] < 1:
        raise ValueError("digits must be >= 1")
    if not 1 <= depth <= MAX_CANTOR_DEPTH:
        raise ValueError(f"depth must lie in [1, {MAX_CANTOR_DEPTH}]")
    t_lo = Fraction(1, digits[-1] + 1)
    t_hi = Fraction(1, digits[0])
    intervals = []
    for word in itertools.product(digits, repeat=depth):
        p, q, p_prev, q_prev = _matrix(word)
        ends = [Fraction(p + p_prev * t, q + q_prev * t) for t in (t_lo, t_hi)]
        intervals.append((min(ends), max(ends)))
    intervals.sort()
    return intervals


def quadratic_net(A: Sequence[int], period_length: int) -> List[float]:
    """All purely periodic continued fractions with the given period length over A."""
    digits = sorted(set(int(a) for a in A))
    return [cf_periodic(word).value for word in itertools.product(digits, repeat=period_length)]


def maximal_net(points: Sequence[float], eps: float) -> List[float]:
    """Greedy maximal eps-separated subset of a set of reals."""
    kept: List[float] = []
    for x in sorted(points):
        if not kept or x - kept[-1] >= eps:
            kept.append(x)
    return kept


def _cover_count(lo: np.ndarray, hi: np.ndarray, eps: float) -> int:
    """Number of half-open eps-grid cells meeting a union of closed intervals."""
    start = np.floor(lo / eps).astype(np.int64)
    end = np.floor(hi / eps).astype(np.int64)
    order = np.argsort(start, kind='stable')
    start, end = start[order], end[order]
    reach = np.maximum.accumulate(end)
    previous = np.concatenate(([start[0] - 1], reach[:-1]))
    return int(np.sum(np.maximum(0, end - np.maximum(start, previous + 1) + 1)))


def box_dimension(data: Union[Sequence[Interval], Sequence[float], np.ndarray],
                  eps_range: Sequence[float]) -> Tuple[float, float]:
    """
    Box-counting slope of log N(eps) against log(1/eps).

    Args:
        data: Closed intervals (pairs) or a point set
        eps_range: At least 4 geometrically spaced scales

    Returns:
        Tuple of (slope, rms fit residual)
    """
    eps = np.asarray(sorted(eps_range, reverse=True), dtype=np.float64)
    if len(eps) < 4:
        raise ValueError("box counting needs at least 4 scales")
    steps = np.diff(np.log(eps))
    if not np.allclose(steps, steps[0], rtol=1e-6, atol=1e-12):
        raise ValueError("scales must be geometrically spaced")
    items = list(data)
    if items and isinstance(items[0], (tuple, list)):
        lo = np.array([float(a) for a, _ in items])
        hi = np.array([float(b) for _, b in items])
    else:
        lo = hi = np.asarray(items, dtype=np.float64)
    if len(lo) == 0:
        raise ValueError("box counting needs a nonempty set")
    counts = [_cover_count(lo, hi, e) for e in eps]
    slope, _, residual = loglog_fit(1.0 / eps, counts)
    return slope, residual


def _theta_search_bounds(N: int, delta: float, m_d: int) -> Tuple[int, float]:
    if not 0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    if int(N) != N or N < 2:
        raise ValueError("N must be an integer >= 2")
    if m_d < 1:
        raise ValueError("m_d must be >= 1")
    y_max = math.floor(m_d * N ** delta * (1 + 1e-15))
    return max(1, y_max), 2 * N ** (delta - 1)


def n_theta_approximate(theta: Any, N: int, delta: float, m_d: int) -> Optional[NThetaApprox]:
    """
    The N-theta rational approximate: reduced x/y with y <= m_d N^delta and
    |x/y - theta| <= 2 N^(delta-1), or None.

    The closest rational with admissible denominator (a convergent or an
    intermediate fraction) is the only candidate worth testing.
    """
    y_max, bound = _theta_search_bounds(N, delta, m_d)
    x = Fraction(theta)
    best = best_approximation(x, y_max)
    gamma = float(best - x)
    if abs(gamma) > bound:
        return None
    return NThetaApprox(int(N), best, gamma, delta, int(m_d))


def n_theta_candidates(theta: Any, N: int, delta: float, m_d: int) -> List[Fraction]:
    """Every reduced x/y meeting the N-theta conditions, by exhaustive search."""
    y_max, bound = _theta_search_bounds(N, delta, m_d)
    x = Fraction(theta)
    window = Fraction(bound)
    found = set()
    for y in range(1, y_max + 1):
        for num in range(math.ceil((x - window) * y), math.floor((x + window) * y) + 1):
            found.add(Fraction(num, y))
    return sorted(found)


def uniqueness_threshold(delta: float, m_d: int) -> float:
    """N_0 = (4 m_d^2)^{1/(1-3 delta)}; beyond it two approximates would be too close."""
    if delta >= 1 / 3:
        return float('inf')
    return (4 * m_d * m_d) ** (1 / (1 - 3 * delta))


def approximate_sparsity(table: Sequence[Optional[NThetaApprox]], delta: float) -> float:
    """max over distinct approximates of N_j^{1-2 delta} / y_{N_j}, N_j the first N using it."""
    ratios = []
    seen = set()
    for entry in table:
        if entry is None or entry.x_over_y in seen:
            continue
        seen.add(entry.x_over_y)
        ratios.append(entry.N ** (1 - 2 * delta) / entry.x_over_y.denominator)
    return max(ratios) if ratios else 0.0
