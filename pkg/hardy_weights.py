"""
Hardy-Field Weights
===================
Symbolic calculus on finite sums of terms c * s^alpha * (log s)^k, class
certificates for the uniformity classes M_{delta,M,m} and L_{delta,M,m}, and
weight sequences e(p(n)).

Expression grammar (also used by the CLI):

    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := NUMBER | 's' ['^' EXP] | 'log' ['^' INT]
    EXP    := ['-'] NUMBER | '(' ['-'] NUMBER ')'

e.g. "5*s^3.14159 + 1*s^1*log^1", "s^0.5", "2*log^2", "s^(-1)".
An optional left translation s -> s + shift applies at evaluation.

Features:
- Exact symbolic derivatives, terms merged on equal (alpha, k)
- Type of an expression from its exponents
- Grid plus leading-term certificates for both classes
- Extended-precision weight sequences (long double, mpmath fallback)
"""

import math
import re
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Literal, Optional, Sequence, Tuple

import numpy as np
from mpmath import mp
from pydantic import BaseModel, ConfigDict, Field, model_validator

from utils import setup_logger


logger = setup_logger('hardy_weights')

Term = Tuple[float, float, int]
WEIGHT_CHUNK = 1 << 20
EXPONENT_TOL = 1e-12
BOUND_TOL = 1e-12


@dataclass(frozen=True)
class HardyExpr:
    """Finite sum of c * (s + shift)^alpha * log(s + shift)^k."""
    terms: Tuple[Term, ...] = ()
    shift: float = 0.0

    def __post_init__(self):
        merged: Dict[Tuple[float, int], float] = {}
        for c, alpha, k in self.terms:
            if int(k) != k or k < 0:
                raise ValueError(f"log power must be a non-negative integer, got {k}")
            if not (math.isfinite(c) and math.isfinite(alpha)):
                raise ValueError("non-finite term")
            key = (float(alpha), int(k))
            merged[key] = merged.get(key, 0.0) + float(c)
        terms = tuple(sorted(((c, a, k) for (a, k), c in merged.items() if c != 0.0),
                             key=lambda t: (t[1], t[2]), reverse=True))
        object.__setattr__(self, 'terms', terms)
        if self.shift < 0:
            raise ValueError("left translation must be non-negative")

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def shifted(self, s0: float) -> 'HardyExpr':
        """The same expression evaluated at s + s0."""
        return HardyExpr(self.terms, self.shift + s0)

    def leading(self) -> Optional[Term]:
        """Dominant term as s -> infinity (largest (alpha, k))."""
        return self.terms[0] if self.terms else None

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for c, alpha, k in self.terms:
            piece = f"{c!r}*s^{alpha!r}"
            if k:
                piece += f"*log^{k}"
            parts.append(piece)
        text = " + ".join(parts)
        return f"{text} @ s+{self.shift!r}" if self.shift else text


_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)|(log|s)|(.))")


def _tokenize(text: str) -> List[str]:
    tokens = []
    for number, word, other in _TOKEN.findall(text):
        token = number or word or other
        if token.strip():
            tokens.append(token)
    return tokens


def parse_expr(text: str, shift: float = 0.0) -> HardyExpr:
    """
    Parse an expression literal (grammar in the module docstring).

    Raises:
        ValueError: on malformed input
    """
    tokens = _tokenize(text)
    pos = 0

    def peek() -> Optional[str]:
        return tokens[pos] if pos < len(tokens) else None

    def take(expected: Optional[str] = None) -> str:
        nonlocal pos
        token = peek()
        if token is None or (expected is not None and token != expected):
            raise ValueError(f"malformed expression {text!r} near token {pos}")
        pos += 1
        return token

    def number() -> float:
        wrapped = peek() == '('
        if wrapped:
            take('(')
        sign = 1.0
        if peek() in ('-', '+'):
            sign = -1.0 if take() == '-' else 1.0
        value = sign * float(take())
        if wrapped:
            take(')')
        return value

    terms: List[Term] = []
    sign = 1.0
    if peek() in ('-', '+'):
        sign = -1.0 if take() == '-' else 1.0
    while True:
        coeff, alpha, k = 1.0, 0.0, 0
        while True:
            token = take()
            if token == 's':
                alpha += number() if peek() == '^' and take('^') else 1.0
            elif token == 'log':
                power = number() if peek() == '^' and take('^') else 1.0
                if power != int(power) or power < 0:
                    raise ValueError(f"log power must be a non-negative integer in {text!r}")
                k += int(power)
            else:
                try:
                    coeff *= float(token)
                except ValueError:
                    raise ValueError(f"unexpected token {token!r} in {text!r}") from None
            if peek() != '*':
                break
            take('*')
        terms.append((sign * coeff, alpha, k))
        if peek() is None:
            break
        sign = -1.0 if take() == '-' else 1.0
    return HardyExpr(tuple(terms), shift)


def differentiate(p: HardyExpr) -> HardyExpr:
    """d/ds [c s^a log^k s] = c a s^(a-1) log^k s + c k s^(a-1) log^(k-1) s."""
    terms: List[Term] = []
    for c, alpha, k in p.terms:
        if alpha != 0:
            terms.append((c * alpha, alpha - 1, k))
        if k > 0:
            terms.append((c * k, alpha - 1, k - 1))
    return HardyExpr(tuple(terms), p.shift)


def derivatives(p: HardyExpr, order: int) -> List[HardyExpr]:
    """[p, p', ..., p^(order)]."""
    result = [p]
    for _ in range(order):
        result.append(differentiate(result[-1]))
    return result


def type_of(p: HardyExpr) -> float:
    """Type t(p): the largest exponent; log factors do not change it."""
    if p.is_zero:
        raise ValueError("the zero expression has no type")
    return max(alpha for _, alpha, _ in p.terms)


def evaluate(p: HardyExpr, s: Any) -> np.ndarray:
    """Vectorised evaluation at s >= 1 (double precision)."""
    u = np.asarray(s, dtype=np.float64) + p.shift
    if np.any(u < 1):
        raise ValueError("Hardy expressions are evaluated at s >= 1")
    total = np.zeros_like(u)
    log_u = np.log(u)
    for c, alpha, k in p.terms:
        total += c * u ** alpha * log_u ** k
    return total


class ClassWitness(BaseModel):
    """Parameters certifying membership in M_{delta,M,m} or L_{delta,M,m}."""
    model_config = ConfigDict(frozen=True, extra='forbid')

    family: Literal['M', 'L'] = Field(..., description="Class family")
    delta: float = Field(..., gt=0, description="Class parameter delta")
    M_const: float = Field(..., gt=0, description="Two-sided (M) or upper (L) constant")
    m: int = Field(..., ge=0, description="Class index m")
    k: int = Field(..., ge=0, description="Integer part of the type")
    alpha: Optional[float] = Field(None, description="Fractional part of the type (M only)")
    epsilon: Optional[float] = Field(None, ge=0, description="Exponent slack (M only)")
    s_max: float = Field(1e6, gt=1, description="Grid ceiling used in verification")

    @model_validator(mode='after')
    def check_family(self) -> 'ClassWitness':
        if self.k > self.m:
            raise ValueError("witness needs k <= m")
        if self.family == 'M':
            if self.alpha is None or self.epsilon is None:
                raise ValueError("M witnesses need alpha and epsilon")
            if not self.delta < 0.5:
                raise ValueError("M witnesses need delta < 1/2")
            if self.M_const < 1:
                raise ValueError("M witnesses need M >= 1")
            if not self.delta <= self.alpha <= 1 - self.delta:
                raise ValueError("M witnesses need alpha in [delta, 1 - delta]")
            if not self.epsilon < min((self.alpha - self.delta) / 3, 1 - self.alpha - self.delta):
                raise ValueError("M witnesses need epsilon < min{(alpha-delta)/3, 1-alpha-delta}")
        return self


@dataclass
class ClassCertificate:
    """Outcome of a class-membership check."""
    passed: bool
    family: str
    grid_checked: bool
    asymptotic_checked: bool
    grid_points: int
    s_max: float
    reason: Optional[str] = None
    violation: Optional[Dict[str, float]] = None
    notes: List[str] = field(default_factory=list)


_TAIL_NOTE = ("the threshold where 'for large s' begins is not fixed by the class "
              "definition; the grid covers [1, s_max] and the leading-term test covers the tail")


def _grid(w: ClassWitness, grid_points: int) -> np.ndarray:
    if grid_points < 64:
        raise ValueError("grid_points must be >= 64")
    return np.geomspace(1.0, w.s_max, grid_points)


def _leading_within(lead: Optional[Term], exponent: float, M: float, upper: bool) -> bool:
    """Compare the leading term c s^a log^l s with the power bound M^(+-1) s^exponent."""
    if lead is None:
        return upper
    c, a, l = lead
    if upper:
        c = abs(c)
        if a < exponent - EXPONENT_TOL:
            return True
        return abs(a - exponent) <= EXPONENT_TOL and l == 0 and c <= M * (1 + BOUND_TOL)
    if c <= 0:
        return False
    if a > exponent + EXPONENT_TOL:
        return True
    return abs(a - exponent) <= EXPONENT_TOL and (l > 0 or c >= (1 - BOUND_TOL) / M)


def class_check_M(p: HardyExpr, w: ClassWitness, grid_points: int = 512) -> ClassCertificate:
    """
    Certify (1/M) s^{k+alpha-eps-j} <= p^(j)(s) <= M s^{k+alpha+eps-j}, j = 0..k+1.

    Args:
        p: Expression (its shift is honoured)
        w: Witness of family M
        grid_points: Geometric grid size on [1, s_max]

    Returns:
        ClassCertificate recording the grid and leading-term checks
    """
    if w.family != 'M':
        raise ValueError("class_check_M needs an M witness")
    s = _grid(w, grid_points)
    base = w.k + w.alpha
    grid_ok = True
    violation = None
    for j, pj in enumerate(derivatives(p, w.k + 1)):
        values = evaluate(pj, s)
        lower = s ** (base - w.epsilon - j) / w.M_const
        upper = w.M_const * s ** (base + w.epsilon - j)
        bad = np.nonzero((values < lower * (1 - BOUND_TOL)) | (values > upper * (1 + BOUND_TOL)))[0]
        if len(bad):
            i = int(bad[0])
            grid_ok = False
            violation = {'j': j, 's': float(s[i]), 'value': float(values[i]),
                         'lower': float(lower[i]), 'upper': float(upper[i])}
            break
    asymptotic_ok = True
    reason = None
    if grid_ok:
        for j, pj in enumerate(derivatives(p, w.k + 1)):
            lead = pj.leading()
            if not (_leading_within(lead, base - w.epsilon - j, w.M_const, upper=False)
                    and _leading_within(lead, base + w.epsilon - j, w.M_const, upper=True)):
                asymptotic_ok = False
                reason = f"leading term of derivative {j} escapes the bounds as s -> infinity"
                break
    else:
        reason = f"grid violation at derivative {violation['j']}, s={violation['s']:.6g}"
    certificate = ClassCertificate(
        passed=grid_ok and asymptotic_ok, family='M', grid_checked=grid_ok,
        asymptotic_checked=asymptotic_ok and grid_ok, grid_points=grid_points,
        s_max=w.s_max, reason=reason, violation=violation, notes=[_TAIL_NOTE],
    )
    logger.debug(f"class_check_M({p}) -> {certificate.passed}")
    return certificate


def class_check_L(p: HardyExpr, w: ClassWitness, grid_points: int = 512) -> ClassCertificate:
    """Certify |p^(j)(s)| <= M s^{k-delta-j} for j = 0..k on the grid and in the tail."""
    if w.family != 'L':
        raise ValueError("class_check_L needs an L witness")
    s = _grid(w, grid_points)
    grid_ok = True
    asymptotic_ok = True
    violation = None
    reason = None
    for j, pj in enumerate(derivatives(p, w.k)):
        values = np.abs(evaluate(pj, s))
        upper = w.M_const * s ** (w.k - w.delta - j)
        bad = np.nonzero(values > upper * (1 + BOUND_TOL))[0]
        if len(bad):
            i = int(bad[0])
            grid_ok = False
            violation = {'j': j, 's': float(s[i]), 'value': float(values[i]), 'upper': float(upper[i])}
            reason = f"grid violation at derivative {j}, s={s[i]:.6g}"
            break
        if not _leading_within(pj.leading(), w.k - w.delta - j, w.M_const, upper=True):
            asymptotic_ok = False
            reason = f"leading term of derivative {j} escapes the bound as s -> infinity"
            break
    return ClassCertificate(
        passed=grid_ok and asymptotic_ok, family='L', grid_checked=grid_ok,
        asymptotic_checked=asymptotic_ok and grid_ok, grid_points=grid_points,
        s_max=w.s_max, reason=reason, violation=violation, notes=[_TAIL_NOTE],
    )


def _fractional_parts(p: HardyExpr, n: np.ndarray) -> np.ndarray:
    """p(n) mod 1 evaluated in long double, or with mpmath when that is too coarse."""
    u = n.astype(np.longdouble) + np.longdouble(p.shift)
    total = np.zeros(len(u), dtype=np.longdouble)
    log_u = np.log(u)
    for c, alpha, k in p.terms:
        total += np.longdouble(c) * u ** np.longdouble(alpha) * log_u ** k
    magnitude = float(np.max(np.abs(total))) if len(total) else 0.0
    if magnitude * float(np.finfo(np.longdouble).eps) <= 1e-10:
        return (total - np.floor(total)).astype(np.float64)
    digits = int(math.log10(magnitude)) + 20
    logger.info(f"evaluating {p} with mpmath at {digits} digits (|p| up to {magnitude:.3g})")
    out = np.empty(len(n), dtype=np.float64)
    with mp.workdps(digits):
        for i, value in enumerate(n.tolist()):
            x = mp.mpf(value) + mp.mpf(p.shift)
            acc = mp.mpf(0)
            for c, alpha, k in p.terms:
                acc += mp.mpf(c) * x ** mp.mpf(alpha) * mp.log(x) ** k
            out[i] = float(acc - mp.floor(acc))
    return out


def _weight_chunks(p: HardyExpr, N: int) -> Iterator[np.ndarray]:
    for start in range(1, N + 1, WEIGHT_CHUNK):
        n = np.arange(start, min(N, start + WEIGHT_CHUNK - 1) + 1, dtype=np.int64)
        angle = 2 * math.pi * _fractional_parts(p, n)
        yield np.cos(angle) + 1j * np.sin(angle)


def weight_sequence(p: HardyExpr, N: int) -> np.ndarray:
    """
    The weights (e(p(n)))_{n=1..N}.

    Args:
        p: Expression
        N: Length (>= 1)

    Returns:
        Unit-modulus complex array
    """
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    return np.concatenate(list(_weight_chunks(p, int(N))))


def running_averages(p: HardyExpr, N_list: Sequence[int]) -> List[complex]:
    """(1/N) sum_{n<=N} e(p(n)) for every N in N_list, from one pass."""
    targets = sorted(set(int(N) for N in N_list))
    if not targets or targets[0] < 1:
        raise ValueError("N_list must hold positive integers")
    found: Dict[int, complex] = {}
    total = 0j
    seen = 0
    for chunk in _weight_chunks(p, targets[-1]):
        partial = np.cumsum(chunk)
        for N in targets:
            if seen < N <= seen + len(chunk):
                found[N] = (total + complex(partial[N - seen - 1])) / N
        total += complex(partial[-1])
        seen += len(chunk)
    return [found[int(N)] for N in N_list]


def max_pairwise_gap(averages: Sequence[complex]) -> float:
    """Largest |A_N - A_M| over the listed running averages (Cauchy gap)."""
    values = np.asarray(averages, dtype=np.complex128)
    return float(np.max(np.abs(values[:, None] - values[None, :]))) if len(values) else 0.0


def running_average_gaps(p: HardyExpr, N_list: Sequence[int]) -> Dict[str, Any]:
    """
    Cauchy-gap diagnostic for running averages of e(p(n)).

    Phases like c*log(s) make the averages rotate slowly without
    converging; the gap between consecutive listed N stays bounded away
    from zero instead of shrinking.

    Returns:
        Dict with the averages, consecutive gaps and the largest pairwise gap
    """
    averages = running_averages(p, N_list)
    gaps = [abs(b - a) for a, b in zip(averages, averages[1:])]
    return {
        'expr': str(p),
        'N': [int(N) for N in N_list],
        'averages': averages,
        'consecutive_gaps': gaps,
        'max_gap': max_pairwise_gap(averages),
    }


def negative_type_limit(p: HardyExpr, N_list: Sequence[int]) -> List[complex]:
    """Running averages for a phase of negative type; they tend to 1."""
    if p.is_zero or type_of(p) >= 0:
        raise ValueError(f"{p} is not of negative type")
    return running_averages(p, N_list)
