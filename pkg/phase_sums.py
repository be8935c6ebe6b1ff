"""
Polynomial Phase Sums
=====================
Exact-phase evaluation of normalized exponential sums

    (1/N) sum_{n=1..N} e(alpha_d n^d + ... + alpha_1 n),

sup-over-frequency scans of twisted quadratic (and higher) sums, the van der
Corput inequality and the Euler-summation majorant for Hardy-field phases.

Features:
- Mod-1 finite-difference tables in exact integer arithmetic
  (modular for rational coefficients, wrapping uint64 Q0.64 otherwise)
- Correctly rounded accumulation with a reported error bound
- Certified sup scans on derivative-bound grids evaluated by chunked FFTs
- Golden-section refinement around the best grid points
"""

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from typing import Any, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from utils import (
    MEAN_ERROR, TWO64, BudgetExceededError, is_check_mode, next_power_of_two, q64_to_unit,
    require, setup_logger, to_q64, uint64_scalar,
)


logger = setup_logger('phase_sums')

MAX_TERMS = 1 << 31
TABLE_CHUNK = 1 << 20
EXACT_DENOMINATOR_LIMIT = 1 << 31
DEFAULT_GRID_CAP = 1 << 28
DEFAULT_FFT_CHUNK = 1 << 22
REFINE_CANDIDATES = 4


@dataclass(frozen=True)
class PhasePoly:
    """Phase polynomial alpha_d n^d + ... + alpha_1 n, coefficients read mod 1."""
    coeffs: Tuple[Any, ...]
    skeleton: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        coeffs = tuple(self.coeffs)
        if len(coeffs) < 1:
            raise ValueError("phase polynomial needs degree >= 1")
        for c in coeffs:
            if isinstance(c, float) and not math.isfinite(c):
                raise ValueError(f"non-finite phase coefficient: {c}")
        object.__setattr__(self, 'coeffs', coeffs)
        if self.skeleton is not None:
            skeleton = tuple(int(m) for m in self.skeleton)
            if len(skeleton) != len(coeffs):
                raise ValueError("skeleton length must equal the degree")
            if skeleton[0] < 1:
                raise ValueError("leading skeleton coefficient m_d must be >= 1")
            object.__setattr__(self, 'skeleton', skeleton)

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    @classmethod
    def from_skeleton(cls, alpha: Any, skeleton: Sequence[int], theta: Any = 0,
                      sign: int = 1) -> 'PhasePoly':
        """
        Build (m_d alpha, ..., m_2 alpha, m_1 alpha + sign*theta) exactly.

        Args:
            alpha: Frequency scalar (float or Fraction)
            skeleton: Integer vector (m_d, ..., m_1)
            theta: Linear twist
            sign: +1 for e(n theta + P(n) alpha), -1 for e(P(n) alpha - n theta)

        Returns:
            PhasePoly carrying the skeleton
        """
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        for value in (alpha, theta):
            if isinstance(value, float) and not math.isfinite(value):
                raise ValueError(f"non-finite phase parameter: {value}")
        a = Fraction(alpha)
        coeffs = [int(m) * a for m in skeleton]
        coeffs[-1] += sign * Fraction(theta)
        return cls(tuple(coeffs), tuple(int(m) for m in skeleton))


@dataclass
class SumResult:
    """Normalized exponential sum with its accumulated error bound."""
    value: complex
    n_terms: int
    accumulated_error_bound: float


@dataclass
class SupScanResult:
    """Outcome of a sup-over-alpha scan."""
    sup_value: float
    argmax_alpha: float
    rigorous_upper: float
    grid_size: int
    certified: bool
    lipschitz: float


def _exact_denominator(coeffs: Sequence[Any]) -> Optional[int]:
    """Common denominator of the coefficients when small enough for int64 modular tables."""
    den = 1
    for c in coeffs:
        den = math.lcm(den, Fraction(c).denominator)
        if den >= EXACT_DENOMINATOR_LIMIT:
            return None
    return den


def _initial_differences(values: List[int], modulus: int) -> List[int]:
    """Forward differences Delta^k P(1), k = 0..d, from P(1..d+1)."""
    diffs = []
    row = list(values)
    while row:
        diffs.append(row[0] % modulus)
        row = [b - a for a, b in zip(row, row[1:])]
    return diffs


def _advance(state: List[int], length: int, dtype, modulus: Optional[int]) -> Tuple[np.ndarray, List[int]]:
    """Unroll the difference table for `length` steps; returns P values and the next state."""
    d = len(state) - 1
    level = np.full(length, state[d], dtype=dtype)
    new_state = list(state)
    wrap = TWO64 if modulus is None else modulus
    for k in range(d - 1, -1, -1):
        shifted = np.zeros(length, dtype=dtype)
        if length > 1:
            np.cumsum(level[:-1], out=shifted[1:])
        shifted += dtype(state[k])
        if modulus is not None:
            shifted %= modulus
        new_state[k] = (int(shifted[-1]) + int(level[-1])) % wrap
        level = shifted
    return level, new_state


def _phase_chunks(p: PhasePoly, N: int, as_unit: bool) -> Iterator[np.ndarray]:
    """Yield P(n) mod 1 (or e(P(n))) for n = 1..N in chunks."""
    den = _exact_denominator(p.coeffs)
    degree = p.degree
    if den is not None:
        ints = [int(Fraction(c) * den) % den for c in p.coeffs]
        modulus: Optional[int] = den
        dtype = np.int64
        scale = 1.0 / den
    else:
        ints = [to_q64(c) for c in p.coeffs]
        modulus = None
        dtype = np.uint64
        scale = 2.0 ** -64
    wrap = TWO64 if modulus is None else modulus

    def poly_at(n: int) -> int:
        return sum(a * n ** (degree - i) for i, a in enumerate(ints)) % wrap

    state = _initial_differences([poly_at(n) for n in range(1, degree + 2)], wrap)
    done = 0
    while done < N:
        length = min(TABLE_CHUNK, N - done)
        values, state = _advance(state, length, dtype, modulus)
        done += length
        if not as_unit:
            yield values.astype(np.float64) * scale
        elif modulus is None:
            yield q64_to_unit(values)
        else:
            angle = values.astype(np.float64) * (2.0 * math.pi / den)
            yield np.cos(angle) + 1j * np.sin(angle)


def _check_terms(N: int) -> None:
    if int(N) != N or N < 1:
        raise ValueError(f"number of terms must be a positive integer, got {N}")
    if N > MAX_TERMS:
        raise BudgetExceededError('phase_sums.terms', f"N={N} exceeds 2^31 terms")


def phase_table(p: PhasePoly, N: int) -> np.ndarray:
    """
    Values P(n) mod 1 for n = 1..N from the incremental difference table.

    Args:
        p: Phase polynomial
        N: Number of terms

    Returns:
        Float array of length N with entries in [0, 1]
    """
    _check_terms(N)
    return np.concatenate(list(_phase_chunks(p, int(N), as_unit=False)))


def weyl_average(p: PhasePoly, N: int) -> SumResult:
    """
    Normalized Weyl sum (1/N) sum_{n<=N} e(P(n)).

    Args:
        p: Phase polynomial
        N: Number of terms (1 <= N <= 2^31)

    Returns:
        SumResult with the correctly rounded mean and its error bound
    """
    _check_terms(N)
    N = int(N)
    re_parts = []
    im_parts = []
    for chunk in _phase_chunks(p, N, as_unit=True):
        re_parts.append(math.fsum(chunk.real.tolist()))
        im_parts.append(math.fsum(chunk.imag.tolist()))
    value = complex(math.fsum(re_parts), math.fsum(im_parts)) / N
    result = SumResult(value=value, n_terms=N, accumulated_error_bound=MEAN_ERROR)
    require(abs(value) <= 1 + MEAN_ERROR, "normalized average exceeds 1", value=value, N=N)
    return result


def twisted_average(theta: Any, alpha: Any, p_skeleton: Sequence[int], N: int,
                    sign: int = 1) -> SumResult:
    """(1/N) sum e(sign * n theta + P(n) alpha) for the integer skeleton of P."""
    return weyl_average(PhasePoly.from_skeleton(alpha, p_skeleton, theta, sign), N)


_MONOMIAL = re.compile(r"^([+-]?\d*)\*?(n(?:\^(\d+))?)?$")


def parse_skeleton(text: str) -> Tuple[int, ...]:
    """
    Parse an integer polynomial without constant term into (m_d, ..., m_1).

    Accepts "n^2", "2n^3+n", "n^2-n", "n" or a comma list "1,0".

    Raises:
        ValueError: on malformed input, constant terms or m_d < 1
    """
    raw = text.replace(' ', '')
    if ',' in raw:
        skeleton = tuple(int(part) for part in raw.split(','))
    else:
        powers = {}
        for piece in re.findall(r"[+-]?[^+-]+", raw):
            match = _MONOMIAL.match(piece)
            if not match or not match.group(2):
                raise ValueError(f"invalid polynomial term {piece!r} in {text!r}")
            coeff_text = match.group(1)
            coeff = int(coeff_text + '1') if coeff_text in ('', '+', '-') else int(coeff_text)
            power = int(match.group(3) or 1)
            if power < 1:
                raise ValueError(f"constant terms are not allowed: {text!r}")
            powers[power] = powers.get(power, 0) + coeff
        if not powers:
            raise ValueError(f"empty polynomial: {text!r}")
        degree = max(powers)
        skeleton = tuple(powers.get(i, 0) for i in range(degree, 0, -1))
    if not skeleton or skeleton[0] < 1:
        raise ValueError(f"leading coefficient must be >= 1: {text!r}")
    return skeleton


def skeleton_u64(skeleton: Sequence[int], n: np.ndarray) -> np.ndarray:
    """P(n) mod 2^64 by wrapping Horner evaluation (no constant term)."""
    acc = np.zeros(len(n), dtype=np.uint64)
    for m in skeleton:
        acc = (acc + uint64_scalar(m)) * n
    return acc


def _skeleton_bound(skeleton: Sequence[int], N: int) -> float:
    """Upper bound for max_{n<=N} |P(n)|."""
    d = len(skeleton)
    return float(sum(abs(m) * float(N) ** (d - i) for i, m in enumerate(skeleton)))


def _lipschitz(skeleton: Sequence[int], N: int) -> float:
    """Bound for |d/d alpha| of the twisted average: (2 pi / N) sum_n |P(n)|."""
    d = len(skeleton)
    total = 0.0
    for i, m in enumerate(skeleton):
        power = d - i
        # sum_{n<=N} n^k <= N^{k+1}/(k+1) + N^k
        total += abs(m) * (float(N) ** (power + 1) / (power + 1) + float(N) ** power)
    return 2 * math.pi * total / N


def _scan_residue(residue: int, *, theta_q: int, skeleton: Tuple[int, ...], N: int,
                  grid: int, chunk: int, keep: int) -> List[Tuple[float, float]]:
    """Grid values |f((residue + R j)/G)| for one residue class, via an FFT of length `chunk`."""
    n = np.arange(1, N + 1, dtype=np.uint64)
    freq = skeleton_u64(skeleton, n) & np.uint64(grid - 1)
    shift = np.uint64(64 - (grid.bit_length() - 1))
    twist = n * np.uint64(theta_q)
    offset = (freq * np.uint64(residue)) << shift
    weights = q64_to_unit(twist + offset)
    idx = (freq & np.uint64(chunk - 1)).astype(np.int64)
    coeff = (np.bincount(idx, weights=weights.real, minlength=chunk)
             + 1j * np.bincount(idx, weights=weights.imag, minlength=chunk))
    values = np.abs(np.fft.ifft(coeff)) * (chunk / N)
    stride = grid // chunk
    top = np.argpartition(values, -keep)[-keep:] if keep < chunk else np.arange(chunk)
    return [(float(values[j]), (residue + stride * int(j)) / grid) for j in top]


def _grid_candidates(theta: Any, skeleton: Tuple[int, ...], N: int, grid: int,
                     workers: int, fft_chunk: int) -> List[Tuple[float, float]]:
    """Top grid points (value, alpha), sorted by decreasing value then increasing alpha."""
    from progress_tracker import run_cells

    chunk = min(grid, fft_chunk)
    worker = partial(_scan_residue, theta_q=to_q64(theta), skeleton=skeleton, N=N,
                     grid=grid, chunk=chunk, keep=min(chunk, REFINE_CANDIDATES))
    per_residue = run_cells(worker, list(range(grid // chunk)), workers=workers,
                            desc=f"grid scan N={N}")
    merged = [item for block in per_residue for item in block]
    merged.sort(key=lambda item: (-item[0], item[1]))
    return merged[:REFINE_CANDIDATES]


def _direct_value(theta_q: int, skeleton: Tuple[int, ...], N: int, alpha: float) -> float:
    n = np.arange(1, N + 1, dtype=np.uint64)
    phases = skeleton_u64(skeleton, n) * np.uint64(to_q64(alpha % 1.0)) + n * np.uint64(theta_q)
    return float(abs(np.mean(q64_to_unit(phases))))


def _refine(theta: Any, skeleton: Tuple[int, ...], N: int, grid: int,
            candidates: List[Tuple[float, float]]) -> Tuple[float, float]:
    """Golden-section ascent around each candidate; returns (best value, alpha)."""
    theta_q = to_q64(theta)
    best_value, best_alpha = candidates[0]
    h = 1.0 / grid

    def objective(a: float) -> float:
        return -_direct_value(theta_q, skeleton, N, a)

    for value, alpha in candidates:
        try:
            res = optimize.minimize_scalar(objective, bracket=(alpha - h, alpha, alpha + h),
                                           method='golden', options={'xtol': 1e-12})
        except ValueError:
            continue
        if -res.fun > best_value:
            best_value, best_alpha = float(-res.fun), float(res.x) % 1.0
    return best_value, best_alpha


def _fft_error(grid: int) -> float:
    return MEAN_ERROR + 5 * math.log2(max(grid, 2)) * 2.0 ** -53


def sup_scan(theta: Any, p_skeleton: Sequence[int], N: int, target_abs_error: float = 1e-3,
             grid_cap: int = DEFAULT_GRID_CAP, workers: int = 1,
             fft_chunk: int = DEFAULT_FFT_CHUNK) -> SupScanResult:
    """
    Certified estimate of sup_alpha |(1/N) sum e(n theta + P(n) alpha)|.

    The grid spacing 1/G satisfies L/(2G) <= target_abs_error with L the
    derivative bound (2 pi / N) sum |P(n)|, so every alpha lies within
    target_abs_error of a grid value.

    Args:
        theta: Linear twist
        p_skeleton: Integer vector (m_d, ..., m_1)
        N: Number of terms
        target_abs_error: Certified slack between sup_value and rigorous_upper
        grid_cap: Largest admissible power-of-two grid
        workers: Parallel workers for the residue classes
        fft_chunk: Largest FFT length held in memory

    Returns:
        SupScanResult with certified=True

    Raises:
        BudgetExceededError: if the required grid exceeds grid_cap
    """
    if target_abs_error <= 0:
        raise ValueError("target_abs_error must be positive")
    _check_terms(N)
    skeleton = PhasePoly.from_skeleton(0, p_skeleton).skeleton
    lipschitz = _lipschitz(skeleton, N)
    needed = math.ceil(lipschitz / (2 * target_abs_error))
    if needed > grid_cap:
        minimal = lipschitz / (2 * grid_cap)
        raise BudgetExceededError(
            'sup_scan.grid',
            f"grid of {needed} points exceeds cap {grid_cap} for N={N}; "
            f"minimal reachable target_abs_error is {minimal:.6g}",
            minimal=minimal,
        )
    grid = next_power_of_two(max(needed, 2))
    logger.info(f"sup_scan N={N}: grid {grid}, Lipschitz bound {lipschitz:.4g}")
    candidates = _grid_candidates(theta, skeleton, int(N), grid, workers, fft_chunk)
    sup_value, argmax = _refine(theta, skeleton, int(N), grid, candidates)
    return SupScanResult(
        sup_value=sup_value,
        argmax_alpha=argmax,
        rigorous_upper=sup_value + target_abs_error + _fft_error(grid),
        grid_size=grid,
        certified=True,
        lipschitz=lipschitz,
    )


def sup_estimate(theta: Any, p_skeleton: Sequence[int], N: int, oversample: int = 2,
                 grid_cap: int = DEFAULT_GRID_CAP, workers: int = 1,
                 fft_chunk: int = DEFAULT_FFT_CHUNK) -> SupScanResult:
    """
    Uncertified sup estimate on a grid `oversample` times finer than the phase degree.

    rigorous_upper comes from Bernstein's inequality, ||f|| <= max_grid / (1 - pi D / G)
    with D the half-width of the frequency span, and is NaN when pi D >= G.
    """
    _check_terms(N)
    skeleton = PhasePoly.from_skeleton(0, p_skeleton).skeleton
    span = _skeleton_bound(skeleton, N)
    if any(m < 0 for m in skeleton):
        span *= 2
    grid = next_power_of_two(max(int(oversample * (span + 1)), 2))
    if grid > grid_cap:
        raise BudgetExceededError('sup_estimate.grid',
                                  f"grid of {grid} points exceeds cap {grid_cap} for N={N}")
    candidates = _grid_candidates(theta, skeleton, int(N), grid, workers, fft_chunk)
    grid_max = candidates[0][0]
    sup_value, argmax = _refine(theta, skeleton, int(N), grid, candidates)
    ratio = math.pi * math.ceil(span / 2) / grid
    upper = (grid_max + _fft_error(grid)) / (1 - ratio) if ratio < 1 else float('nan')
    return SupScanResult(
        sup_value=sup_value,
        argmax_alpha=argmax,
        rigorous_upper=max(upper, sup_value) if not math.isnan(upper) else upper,
        grid_size=grid,
        certified=False,
        lipschitz=_lipschitz(skeleton, N),
    )


def vdc_lhs(u: Sequence[complex]) -> float:
    """|avg u|^2."""
    values = np.asarray(u, dtype=np.complex128)
    return abs(complex(np.mean(values))) ** 2


def vdc_rhs(u: Sequence[complex], H: int) -> float:
    """
    Right-hand side of van der Corput's inequality.

    2(N+H)/(N^2 (H+1)) sum_{h=1}^{H} (1 - h/(H+1)) |sum_{n=1}^{N-h} u_{n+h} conj(u_n)|
    + (N+H)/(N(H+1)).

    Args:
        u: Complex sequence with |u_n| <= 1
        H: Shift range, 1 <= H <= N

    Returns:
        The right-hand side as a float
    """
    values = np.asarray(u, dtype=np.complex128)
    N = len(values)
    if H < 1 or H > N:
        raise ValueError(f"H must lie in [1, {N}], got {H}")
    if np.any(np.abs(values) > 1 + 1e-9):
        raise ValueError("sequence entries must have modulus at most 1")
    terms = []
    for h in range(1, H + 1):
        corr = abs(complex(np.vdot(values[:N - h], values[h:]))) if h < N else 0.0
        terms.append((1 - h / (H + 1)) * corr)
    rhs = (2 * (N + H) / (N * N * (H + 1))) * math.fsum(terms) + (N + H) / (N * (H + 1))
    require(vdc_lhs(values) <= rhs + 1e-12, "van der Corput inequality violated",
            N=N, H=H, lhs=vdc_lhs(values), rhs=rhs)
    return rhs


def euler_decay_bound(p: Any, class_witness: Any, N: int) -> float:
    """
    Euler-summation majorant for |(1/N) sum e(p(n))| with p in M_{delta,M,0}.

    B(N) = (1/(2 pi N)) (1/p'(N) + 1/p'(1))
           + (M^3/(2 pi N)) int_1^N t^{-delta} dt
           + (2 pi M / N) int_1^N t^{delta+eps-1} dt + 1/N

    Args:
        p: HardyExpr
        class_witness: ClassWitness of family M with k = m = 0
        N: Number of terms (>= 2)

    Returns:
        B(N)
    """
    from hardy_weights import class_check_M, differentiate, evaluate, weight_sequence

    if int(N) != N or N < 2:
        raise ValueError(f"euler_decay_bound needs N >= 2, got {N}")
    if class_witness.family != 'M' or class_witness.m != 0:
        raise ValueError("euler_decay_bound needs a witness for M_{delta,M,0}")
    certificate = class_check_M(p, class_witness)
    if not certificate.passed:
        raise ValueError(f"phase is not certified in the class: {certificate.reason}")
    derivative = differentiate(p)
    d1, dN = (float(v) for v in evaluate(derivative, np.array([1.0, float(N)])))
    if d1 <= 0 or dN <= 0:
        raise ValueError("p' must be positive on [1, N]")
    delta = class_witness.delta
    eps = class_witness.epsilon
    M = class_witness.M_const
    int_delta = (N ** (1 - delta) - 1) / (1 - delta)
    int_eps = (N ** (delta + eps) - 1) / (delta + eps)
    bound = ((1 / dN + 1 / d1) / (2 * math.pi * N)
             + M ** 3 * int_delta / (2 * math.pi * N)
             + 2 * math.pi * M * int_eps / N
             + 1 / N)
    if is_check_mode():
        require(abs(complex(np.mean(weight_sequence(p, int(N))))) <= bound,
                "Euler-summation bound violated", N=N, bound=bound)
    return bound


def weyl_bound_shape(value: complex, q: int, N: int, d: int, eps: float = 0.1) -> float:
    """|value| / (N^eps (1/q + 1/N + q/N^d)^{1/2^{d-1}}), the ratio whose sup is the Weyl constant."""
    shape = N ** eps * (1 / q + 1 / N + q / N ** d) ** (1 / 2 ** (d - 1))
    return abs(value) / shape


def fit_weyl_constant(ratios: Sequence[float]) -> float:
    """Smallest constant dominating every measured shape ratio."""
    return float(max(ratios))


def badly_approximable_sup_bound(c: float, N: int, eps: float) -> float:
    """The badly-approximable bound 1/(c N^{1/32 - eps})."""
    return 1.0 / (c * N ** (1 / 32 - eps))
