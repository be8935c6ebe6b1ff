"""
Twisted Multiplier Anatomy
==========================
Major boxes, exact rational bookkeeping and the approximate multiplier of

    K^_N(alpha) = (1/N) sum_{n<=N} e(P(n) alpha - n theta),
    P(n) = m_d n^d + ... + m_1 n   (integer skeleton (m_d, ..., m_1), d >= 2).

Near alpha = (j + a/b)/m_d the multiplier factors as S_N^j(a/b) V_N(beta), a
complete rational sum times an oscillatory integral, up to O(N^{2 delta - 1}).

Features:
- Exact big-integer derived rationals and lcm denominators b_N^j
- Enumeration of A_N grouped into dyadic denominator scales A_{N,t}
- Complete sums over exact root-of-unity phases
- V_N by adaptive Gauss-Kronrod quadrature seeded with the oscillation count,
  omega_N in closed form
- Residual, minor-arc, subdivision and square-sum diagnostics
"""

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad_vec

from diophantine import NThetaApprox, n_theta_approximate
from phase_sums import skeleton_u64, twisted_average
from utils import (
    BudgetExceededError, QuadratureError, compensated_sum, lacunary_set, loglog_fit,
    q64_to_unit, require, setup_logger, to_q64, uint64_scalar,
)


logger = setup_logger('circle_method')

DENOMINATOR_BUDGET = 1 << 20
QUAD_TOL = 1e-9
MAX_OSCILLATIONS = 10 ** 6
KHAT_BLOCK = 1 << 22
SCALE_CONSTANT_FACTOR = 2


class MultiplierOverlapWarning(UserWarning):
    """Cutoff windows of two atoms intersect (small-N regime)."""


@dataclass(frozen=True)
class MajorBoxSpec:
    """The N-major box around (j + a/b)/m_d."""
    j: int
    a_over_b: Fraction
    center: float
    half_width: float
    N: int
    delta: float

    def __post_init__(self):
        if self.j < 0:
            raise ValueError("j must be non-negative")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    def contains(self, alpha: Any, width: Optional[float] = None) -> np.ndarray:
        """chi(|alpha - center| / width) on the circle, width defaulting to the box."""
        w = self.half_width if width is None else width
        return np.abs(circle_distance(alpha, self.center)) <= w


@dataclass(frozen=True)
class MultiplierAtom:
    """One term S_N^j(a/b) V_N(alpha - center) of the approximate multiplier."""
    box: MajorBoxSpec
    S: complex
    b_N_j: int
    gamma_N: float
    derived: Tuple[Fraction, ...] = ()

    def __post_init__(self):
        if self.b_N_j < 1:
            raise ValueError("b_N_j must be >= 1")
        if abs(self.S) > 1 + 1e-12:
            raise ValueError("|S| exceeds 1")

    @property
    def scale(self) -> int:
        """t with 2^t <= b_N^j < 2^(t+1)."""
        return self.b_N_j.bit_length() - 1


def circle_distance(alpha: Any, center: float) -> np.ndarray:
    """Signed representative of alpha - center in [-1/2, 1/2)."""
    diff = np.asarray(alpha, dtype=np.float64) - center
    return diff - np.floor(diff + 0.5)


def _check_skeleton(P: Sequence[int]) -> Tuple[int, ...]:
    P = tuple(int(m) for m in P)
    if len(P) < 2:
        raise ValueError("multiplier anatomy needs degree d >= 2")
    if P[0] < 1:
        raise ValueError("leading coefficient m_d must be >= 1")
    return P


def khat(theta: Any, P: Sequence[int], N: int, alpha: Any) -> complex:
    """K^_N(alpha) = (1/N) sum e(P(n) alpha - n theta)."""
    return twisted_average(theta, alpha, P, N, sign=-1).value


def khat_many(theta: Any, P: Sequence[int], N: int, alphas: Sequence[float]) -> np.ndarray:
    """K^_N at many frequencies with wrapping Q0.64 phases, in row blocks."""
    alphas = np.asarray(alphas, dtype=np.float64)
    n = np.arange(1, N + 1, dtype=np.uint64)
    p_values = skeleton_u64(P, n)
    twist = n * uint64_scalar(to_q64(theta))
    out = np.empty(len(alphas), dtype=np.complex128)
    rows = max(1, KHAT_BLOCK // N)
    for start in range(0, len(alphas), rows):
        block = alphas[start:start + rows]
        alpha_q = np.array([to_q64(float(a)) for a in block], dtype=np.uint64)
        phases = alpha_q[:, None] * p_values[None, :] - twist[None, :]
        out[start:start + rows] = q64_to_unit(phases).mean(axis=1)
    return out


def _frac(x: Fraction) -> Fraction:
    return x - math.floor(x)


def derived_rationals(a_over_b: Fraction, j: int, P: Sequence[int],
                      n_theta: Any) -> Tuple[List[Fraction], int]:
    """
    The derived rationals of the box (j, a/b) and the lcm denominator b_N^j.

    a^_i/b^_i = (m_i/m_d)(j + a/b) mod 1 for d-1 >= i >= 2 and
    a^_{1,N}/b^_{1,N} = (m_1/m_d)(j + a/b) - x_N/y_N mod 1.

    Args:
        a_over_b: Reduced a/b
        j: Branch index in [0, m_d)
        P: Integer skeleton (m_d, ..., m_1)
        n_theta: NThetaApprox or the rational x_N/y_N itself

    Returns:
        Tuple of ([a^_{d-1}/b^_{d-1}, ..., a^_{1,N}/b^_{1,N}] in [0, 1), b_N^j)
    """
    P = _check_skeleton(P)
    d, m_d = len(P), P[0]
    if not 0 <= j < m_d:
        raise ValueError(f"j must lie in [0, {m_d}), got {j}")
    x_over_y = n_theta.x_over_y if isinstance(n_theta, NThetaApprox) else Fraction(n_theta)
    base = j + Fraction(a_over_b)
    derived = []
    for i in range(d - 1, 0, -1):
        value = Fraction(P[d - i], m_d) * base
        if i == 1:
            value -= x_over_y
        derived.append(_frac(value))
    b_N = Fraction(a_over_b).denominator
    for value in derived:
        b_N = math.lcm(b_N, value.denominator)
    return derived, b_N


def complete_sum(phases: Sequence[Fraction]) -> complex:
    """
    (1/b) sum_{r=1..b} e(c_d r^d + ... + c_1 r), b the lcm of the denominators.

    Phases are reduced exactly mod 1 in integers before the cosine/sine, so
    the error is a few ulps per term.
    """
    coeffs = [Fraction(c) for c in phases]
    b = 1
    for c in coeffs:
        b = math.lcm(b, c.denominator)
    if b > DENOMINATOR_BUDGET:
        raise BudgetExceededError('circle_method.complete_sum', f"denominator {b} exceeds 2^20")
    numerators = [int(c * b) % b for c in coeffs]
    r = np.arange(1, b + 1, dtype=np.int64)
    acc = np.zeros(b, dtype=np.int64)
    for num in numerators:
        acc = (acc + num) * r % b
    angle = acc.astype(np.float64) * (2 * math.pi / b)
    return compensated_sum(np.cos(angle) + 1j * np.sin(angle)) / b


def s_sum(atom: MultiplierAtom, P: Sequence[int]) -> complex:
    """S_N^j(a/b) for an atom (phases a/b, then the derived rationals)."""
    _check_skeleton(P)
    return complete_sum((atom.box.a_over_b,) + tuple(atom.derived))


def omega(N: int, gamma_N: float) -> complex:
    """omega_N = int_0^1 e(N t gamma_N) dt = e(x/2) sinc(x), x = N gamma_N."""
    x = N * gamma_N
    if x == 0:
        return 1.0 + 0j
    return complex(np.exp(1j * math.pi * x) * np.sinc(x))


def vdc_envelope_constant(d: int) -> float:
    """C with |V_N(beta)| <= C / (N m_d^{1/d} |beta|^{1/d}), from the k-th derivative test."""
    c_k = 5 * 2 ** (d - 1) - 2
    return c_k * (2 * math.pi * math.factorial(d)) ** (-1.0 / d)


def v_integral(N: int, d: int, m_d: int, beta: float, gamma_N: float) -> complex:
    """
    V_N(beta) = int_0^1 e(N^d m_d t^d beta + N t gamma_N) dt.

    Adaptive GK15 quadrature with absolute tolerance 1e-9, the initial
    partition seeded with one point per expected oscillation.

    Raises:
        QuadratureError: when the tolerance is not reached
        BudgetExceededError: beyond 10^6 oscillations
    """
    A = float(N) ** d * m_d * beta
    B = N * gamma_N
    if not (math.isfinite(A) and math.isfinite(B)):
        raise ValueError("non-finite oscillatory integral parameters")
    oscillations = abs(A) * d + abs(B)
    if oscillations > MAX_OSCILLATIONS:
        raise BudgetExceededError('circle_method.v_integral',
                                  f"{oscillations:.3g} oscillations exceed 10^6")
    pieces = int(math.ceil(oscillations)) + 1
    points = np.linspace(0.0, 1.0, pieces + 1)[1:-1] if pieces > 1 else None

    def integrand(t: float) -> np.ndarray:
        phase = 2 * math.pi * (A * t ** d + B * t)
        return np.array([math.cos(phase), math.sin(phase)])

    value, err, info = quad_vec(integrand, 0.0, 1.0, epsabs=QUAD_TOL, epsrel=1e-12,
                                limit=max(10000, 4 * pieces), points=points,
                                quadrature='gk15', full_output=True)
    if not info.success or err > QUAD_TOL:
        raise QuadratureError(f"V_N quadrature reached {err:.3g} > {QUAD_TOL:g}", float(err))
    result = complex(value[0], value[1])
    if beta != 0:
        w = omega(N, gamma_N)
        require(abs(result - w) <= 2 * math.pi * float(N) ** d * m_d * abs(beta) / (d + 1) + QUAD_TOL,
                "mean-value bound |V_N - omega_N| violated", N=N, beta=beta, gamma=gamma_N)
        envelope = vdc_envelope_constant(d) / (N * m_d ** (1 / d) * abs(beta) ** (1 / d))
        require(abs(result) <= envelope + QUAD_TOL, "oscillatory envelope violated",
                N=N, beta=beta, value=abs(result), envelope=envelope)
    return result


def _box(j: int, a_over_b: Fraction, P: Tuple[int, ...], N: int, delta: float) -> MajorBoxSpec:
    d, m_d = len(P), P[0]
    return MajorBoxSpec(j=j, a_over_b=a_over_b, center=float((j + a_over_b) / m_d),
                        half_width=float(N) ** (delta - d) / m_d, N=int(N), delta=delta)


def _atom(j: int, a_over_b: Fraction, P: Tuple[int, ...], N: int, delta: float,
          approx: NThetaApprox) -> MultiplierAtom:
    derived, b_N = derived_rationals(a_over_b, j, P, approx)
    return MultiplierAtom(box=_box(j, a_over_b, P, N, delta), S=complete_sum((a_over_b,) + tuple(derived)),
                          b_N_j=b_N, gamma_N=approx.gamma, derived=tuple(derived))


def _denominator_limit(N: int, delta: float) -> int:
    limit = N ** delta
    if limit > DENOMINATOR_BUDGET:
        raise BudgetExceededError('circle_method.enumerate', f"N^delta = {limit:.3g} exceeds 2^20",
                                  DENOMINATOR_BUDGET ** (1 / delta))
    return math.floor(limit * (1 + 1e-12))


def enumerate_A_N(theta: Any, P: Sequence[int], N: int, delta: float) -> List[MultiplierAtom]:
    """
    All atoms a/b in A_N^j (b_N^j <= N^delta), j = 0..m_d-1, excluding the
    zero atom (j, a/b) = (0, 0/1).

    Returns:
        Atoms in (j, b, a) order; empty when no N-theta approximate exists
    """
    P = _check_skeleton(P)
    B = _denominator_limit(N, delta)
    approx = n_theta_approximate(theta, N, delta, P[0])
    if approx is None:
        return []
    atoms = []
    for j in range(P[0]):
        for b in range(1, B + 1):
            for a in range(b):
                if math.gcd(a, b) != 1 or (j == 0 and a == 0):
                    continue
                a_over_b = Fraction(a, b)
                _, b_N = derived_rationals(a_over_b, j, P, approx)
                if b_N <= B:
                    atoms.append(_atom(j, a_over_b, P, N, delta, approx))
    return atoms


def group_by_scale(atoms: Sequence[MultiplierAtom]) -> Dict[int, List[MultiplierAtom]]:
    """A_{N,t}: atoms keyed by t = floor(log2 b_N^j)."""
    groups: Dict[int, List[MultiplierAtom]] = {}
    for atom in atoms:
        groups.setdefault(atom.scale, []).append(atom)
    return dict(sorted(groups.items()))


def scale_cardinality_ok(atoms: Sequence[MultiplierAtom], m_d: int) -> bool:
    """|A_{N,t}| <= 2 m_d 4^t for every t (at most b < 2^(t+1) numerators per denominator)."""
    return all(len(group) <= SCALE_CONSTANT_FACTOR * m_d * 4 ** t
               for t, group in group_by_scale(atoms).items())


@dataclass
class MajorArcModel:
    """The approximate multiplier ^0R^_N + R^_N at one scale N."""
    theta: Any
    P: Tuple[int, ...]
    N: int
    delta: float
    approx: Optional[NThetaApprox]
    zero_atom: Optional[MultiplierAtom]
    atoms: List[MultiplierAtom]
    overlaps: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def windows(self) -> List[MultiplierAtom]:
        return ([self.zero_atom] if self.zero_atom is not None else []) + list(self.atoms)

    @property
    def disjoint(self) -> bool:
        return not self.overlaps

    def in_major(self, alphas: Any) -> np.ndarray:
        alphas = np.atleast_1d(np.asarray(alphas, dtype=np.float64))
        mask = np.zeros(len(alphas), dtype=bool)
        for atom in self.windows:
            mask |= atom.box.contains(alphas)
        return mask

    def r_hat(self, alpha: float) -> complex:
        """sum over windows containing alpha of S V_N(alpha - center)."""
        d, m_d = len(self.P), self.P[0]
        total = 0j
        for atom in self.windows:
            beta = float(circle_distance(alpha, atom.box.center))
            if abs(beta) <= atom.box.half_width:
                total += atom.S * v_integral(self.N, d, m_d, beta, atom.gamma_N)
        return total

    def t_hat(self, alpha: float) -> complex:
        """sum of S omega_N chi(N^d m_d (alpha - center))."""
        d, m_d = len(self.P), self.P[0]
        width = float(self.N) ** (-d) / m_d
        total = 0j
        for atom in self.windows:
            if abs(float(circle_distance(alpha, atom.box.center))) <= width:
                total += atom.S * omega(self.N, atom.gamma_N)
        return total


def _find_overlaps(windows: Sequence[MultiplierAtom]) -> List[Tuple[int, int]]:
    order = sorted(range(len(windows)), key=lambda i: windows[i].box.center)
    pairs = []
    for k, i in enumerate(order):
        neighbour = order[(k + 1) % len(order)]
        if neighbour == i:
            continue
        a, b = windows[i].box, windows[neighbour].box
        gap = abs(float(circle_distance(b.center, a.center)))
        if gap <= a.half_width + b.half_width:
            pairs.append((min(i, neighbour), max(i, neighbour)))
    return sorted(set(pairs))


def build_multiplier(theta: Any, P: Sequence[int], N: int, delta: float) -> MajorArcModel:
    """
    Assemble the zero atom, the atoms of A_N and the window overlap report.

    Overlapping windows are reported with a MultiplierOverlapWarning.
    """
    P = _check_skeleton(P)
    approx = n_theta_approximate(theta, N, delta, P[0])
    zero_atom = None
    atoms: List[MultiplierAtom] = []
    if approx is not None:
        zero_atom = _atom(0, Fraction(0), P, N, delta, approx)
        atoms = enumerate_A_N(theta, P, N, delta)
    model = MajorArcModel(theta=theta, P=P, N=int(N), delta=delta, approx=approx,
                          zero_atom=zero_atom, atoms=atoms)
    model.overlaps = _find_overlaps(model.windows)
    if model.overlaps:
        message = f"N={N}: {len(model.overlaps)} overlapping major-box windows"
        logger.warning(message)
        warnings.warn(message, MultiplierOverlapWarning, stacklevel=2)
    return model


def approx_multiplier(theta: Any, P: Sequence[int], N: int, delta: float, alpha: float) -> complex:
    """^0R^_N(alpha) + R^_N(alpha); zero off every window."""
    return build_multiplier(theta, P, N, delta).r_hat(alpha)


def _window_samples(model: MajorArcModel, per_window: int) -> np.ndarray:
    samples = []
    for atom in model.windows:
        # unwrapped, with an absolute margin of a few ulps at 1.0 inside the window edge
        reach = max(0.0, min(atom.box.half_width * (1 - 1e-9), atom.box.half_width - 8 * np.spacing(1.0)))
        samples.append(atom.box.center + np.linspace(-1.0, 1.0, per_window) * reach)
    return np.concatenate(samples) if samples else np.zeros(0)


def multiplier_residual(theta: Any, P: Sequence[int], N_list: Sequence[int], delta: float,
                        samples_per_window: int = 16) -> List[Dict[str, Any]]:
    """
    max |K^_N - (^0R^_N + R^_N)| over samples inside the major windows.

    Rows carry bound_scale = N^{2 delta - 1}; scales without windows report
    zero samples and a NaN residual.
    """
    rows = []
    for N in N_list:
        model = build_multiplier(theta, P, N, delta)
        alphas = _window_samples(model, samples_per_window)
        if len(alphas):
            exact = khat_many(theta, model.P, model.N, alphas)
            approx = np.array([model.r_hat(a) for a in alphas])
            residual = float(np.max(np.abs(exact - approx)))
        else:
            residual = float('nan')
        rows.append({'N': int(N), 'max_residual': residual,
                     'bound_scale': float(N) ** (2 * delta - 1), 'samples': int(len(alphas))})
    return rows


def residual_exponent(rows: Sequence[Dict[str, Any]]) -> float:
    """Fitted decay exponent of max_residual against N (NaN with fewer than two rows)."""
    usable = [(r['N'], r['max_residual']) for r in rows
              if math.isfinite(r['max_residual']) and r['max_residual'] > 0]
    if len(usable) < 2:
        return float('nan')
    slope, _, _ = loglog_fit([u[0] for u in usable], [u[1] for u in usable])
    return -slope


def minor_arc_decay(theta: Any, P: Sequence[int], N_list: Sequence[int], delta: float,
                    samples: int = 10 ** 4, seed: int = 0) -> Dict[str, Any]:
    """
    max |K^_N(alpha)| over random alpha outside every window, and over window samples.

    Returns:
        Dict with rows (N, max_minor, max_major), the fitted kappa and a
        degenerate flag for single-row tables
    """
    if samples < 10 ** 3:
        raise ValueError("minor-arc sweeps need at least 10^3 samples")
    P = _check_skeleton(P)
    rng = np.random.default_rng(seed)
    rows = []
    for N in N_list:
        model = build_multiplier(theta, P, N, delta)
        alphas = rng.random(samples)
        minor = alphas[~model.in_major(alphas)]
        max_minor = float(np.max(np.abs(khat_many(theta, P, int(N), minor)))) if len(minor) else float('nan')
        major = _window_samples(model, 9)
        max_major = float(np.max(np.abs(khat_many(theta, P, int(N), major)))) if len(major) else float('nan')
        rows.append({'N': int(N), 'max_minor': max_minor, 'max_major': max_major})
    degenerate = len(rows) < 2
    kappa = float('nan')
    if not degenerate:
        slope, _, _ = loglog_fit([r['N'] for r in rows], [r['max_minor'] for r in rows])
        kappa = -slope
    return {'rows': rows, 'kappa': kappa, 'degenerate': degenerate}


def subdivision_check(theta: Any, P: Sequence[int], delta: float, rho: float,
                      N_max: int) -> Dict[str, Any]:
    """
    For each t, the scales N in I_rho with A_{N,t} non-empty must share one
    approximate x_N/y_N, i.e. lie between consecutive change points.

    Returns:
        Report with passed, the scale index l(t) per t and violation witnesses
    """
    P = _check_skeleton(P)
    scales = [N for N in lacunary_set(rho, N_max) if N >= 2]
    change_points: List[int] = []
    previous = object()
    scale_index: Dict[int, int] = {}
    approximates: Dict[int, Optional[str]] = {}
    occupied: Dict[int, List[int]] = {}
    for N in scales:
        approx = n_theta_approximate(theta, N, delta, P[0])
        key = approx.x_over_y if approx is not None else None
        if key != previous:
            change_points.append(N)
            previous = key
        scale_index[N] = len(change_points) - 1
        approximates[N] = str(key) if key is not None else None
        for t in group_by_scale(enumerate_A_N(theta, P, N, delta)):
            occupied.setdefault(t, []).append(N)
    violations = []
    l_of_t = {}
    for t, Ns in occupied.items():
        indices = sorted({scale_index[N] for N in Ns})
        l_of_t[str(t)] = indices[0]
        if len(indices) > 1:
            violations.append({'t': t, 'N': Ns, 'scale_indices': indices,
                               'approximates': [approximates[N] for N in Ns]})
    if violations:
        logger.warning(f"subdivision check: {len(violations)} scales span several approximates")
    return {
        'passed': not violations,
        'theta': float(theta),
        'delta': delta,
        'rho': rho,
        'N_max': int(N_max),
        'scales_checked': len(scales),
        'change_points': change_points,
        'l_of_t': l_of_t,
        'violations': violations,
    }


def square_sum_diagnostic(theta: Any, P: Sequence[int], delta: float, rho: float, N_max: int,
                          alphas: Sequence[float]) -> Dict[str, Any]:
    """sup over alpha of sum_{N in I_rho} |R^_N(alpha) - T^_N(alpha)|^2."""
    models = [build_multiplier(theta, P, N, delta) for N in lacunary_set(rho, N_max) if N >= 2]
    best, best_alpha = 0.0, None
    for alpha in alphas:
        total = math.fsum(abs(m.r_hat(alpha) - m.t_hat(alpha)) ** 2 for m in models)
        if total > best or best_alpha is None:
            best, best_alpha = total, float(alpha)
    return {'sup': best, 'argmax_alpha': best_alpha, 'scales': len(models), 'samples': len(alphas)}


def omega_variation(gamma_table: Sequence[Tuple[int, float]]) -> Dict[str, Any]:
    """
    V^1 of omega_N along increasing N, with the block bounds
    min{1/(N|gamma|), N|gamma|} summed alongside.
    """
    table = sorted((int(N), float(g)) for N, g in gamma_table)
    steps = []
    for (N, g), (M, h) in zip(table, table[1:]):
        x = N * abs(g)
        block = min(1 / x, x) if x > 0 else 0.0
        steps.append({'N': N, 'M': M, 'jump': abs(omega(M, h) - omega(N, g)), 'block_bound': block})
    return {
        'v1': math.fsum(s['jump'] for s in steps),
        'block_bound_sum': math.fsum(s['block_bound'] for s in steps),
        'steps': steps,
    }


def hua_exponent_fit(atoms: Sequence[MultiplierAtom], d: int) -> Dict[str, Any]:
    """Fit |S| ~ b^{-nu} over atoms with b_N^j > 1; the reference exponent is 1/(2d)."""
    points = [(a.b_N_j, abs(a.S)) for a in atoms if a.b_N_j > 1 and abs(a.S) > 1e-14]
    distinct = {b for b, _ in points}
    nu = float('nan')
    residual = float('nan')
    if len(distinct) >= 2:
        slope, _, residual = loglog_fit([p[0] for p in points], [p[1] for p in points])
        nu = -slope
    return {'nu': nu, 'reference': 1 / (2 * d), 'points': len(points), 'residual': residual}
