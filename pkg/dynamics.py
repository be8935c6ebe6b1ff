"""
Measure-Preserving Systems
==========================
Concrete systems on the torus, trigonometric polynomials as observables,
closed-form orbits and the ergodic averages built from them.

Systems (CLI literals in brackets):
- rotation x -> x + beta              ["rotation:0.6180339887", "rotation:golden"]
- skew product (x, y) -> (x + beta, y + x)   ["skew:golden"]
- doubling map x -> 2x                ["doubling"]

Observables: "f:1", "f:e(x)", "f:e(y)", "f:e(2x+y)", "f:e(-x)".

Features:
- Exact n-step maps: orbits are computed as Q0.64 phases with wrapping
  uint64 arithmetic (rotation, skew) or from explicit binary expansions
  (doubling)
- Symbolic composition f o T^h on trigonometric polynomials
- Weighted, twisted-polynomial and sup-over-net averages
"""

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from phase_sums import skeleton_u64
from utils import (
    MASK64, NAMED_CONSTANTS, TWO64, BudgetExceededError, compensated_mean, parse_real,
    q64_to_unit, setup_logger, to_q64, uint64_scalar,
)


logger = setup_logger('dynamics')

FLOAT_DOUBLING_LIMIT = 50
EXACT_DOUBLING_LIMIT = 1 << 22
ITERATE_LIMIT = 1 << 62


class SystemSpec(BaseModel):
    """A concrete measure-preserving system."""
    model_config = ConfigDict(frozen=True, extra='forbid')

    kind: Literal['rotation', 'doubling', 'skew'] = Field(..., description="System family")
    beta: Optional[float] = Field(None, description="Rotation number in (0, 1)")

    @model_validator(mode='after')
    def check_beta(self) -> 'SystemSpec':
        if self.kind == 'doubling':
            if self.beta is not None:
                raise ValueError("the doubling map takes no rotation number")
        elif self.beta is None or not 0 < self.beta < 1:
            raise ValueError(f"{self.kind} needs beta in (0, 1)")
        return self

    @property
    def dimension(self) -> int:
        return 2 if self.kind == 'skew' else 1

    @property
    def invertible(self) -> bool:
        return self.kind != 'doubling'

    @classmethod
    def parse(cls, text: str) -> 'SystemSpec':
        """Parse "rotation:<beta>", "skew:<beta>" or "doubling"."""
        kind, _, value = text.strip().partition(':')
        if kind == 'doubling':
            return cls(kind='doubling')
        return cls(kind=kind, beta=float(parse_real(value)) if value else None)


@dataclass(frozen=True)
class SurdSeed:
    """
    The quadratic surd (sqrt(r) - o) / d with exactly computable binary digits.

    floor(2^P x) = (isqrt(r * 4^P) - o * 2^P) // d, so doubling-map orbits
    are exact for any length.
    """
    r: int
    o: int = 0
    d: int = 1

    def __post_init__(self):
        if self.r < 1 or math.isqrt(self.r) ** 2 == self.r:
            raise ValueError("r must be a positive non-square")
        if self.d < 1:
            raise ValueError("d must be positive")
        if not 0 < float(self) < 1:
            raise ValueError("seed must lie in (0, 1)")

    def __float__(self) -> float:
        return (math.sqrt(self.r) - self.o) / self.d

    def scaled_floor(self, bits: int) -> int:
        """floor(2^bits * x)."""
        return (math.isqrt(self.r << (2 * bits)) - (self.o << bits)) // self.d


DEFAULT_SEEDS: Dict[str, Any] = {
    'rotation': NAMED_CONSTANTS['sqrt2-1'],
    'doubling': SurdSeed(2, 1, 1),
    'skew': (NAMED_CONSTANTS['sqrt2-1'], NAMED_CONSTANTS['sqrt3-1/2']),
}

Frequency = Tuple[int, ...]


@dataclass(frozen=True)
class TrigPoly:
    """Finite sum of c_k e(k . x) on the torus of the given dimension."""
    terms: Tuple[Tuple[Frequency, complex], ...]
    dim: int = 1

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        merged: Dict[Frequency, complex] = {}
        for freq, coeff in self.terms:
            freq = tuple(int(k) for k in freq)
            if len(freq) != self.dim:
                raise ValueError(f"frequency {freq} does not match dimension {self.dim}")
            if not (math.isfinite(complex(coeff).real) and math.isfinite(complex(coeff).imag)):
                raise ValueError("non-finite coefficient")
            merged[freq] = merged.get(freq, 0j) + complex(coeff)
        terms = tuple(sorted((f, c) for f, c in merged.items() if c != 0))
        object.__setattr__(self, 'terms', terms)

    @classmethod
    def constant(cls, value: complex = 1.0, dim: int = 1) -> 'TrigPoly':
        return cls((((0,) * dim, value),), dim)

    @classmethod
    def character(cls, freq: Sequence[int]) -> 'TrigPoly':
        return cls(((tuple(freq), 1.0),), len(freq))

    @classmethod
    def parse(cls, text: str, dim: int) -> 'TrigPoly':
        """Parse "f:1", "f:e(x)", "f:e(y)", "f:e(2x+y)" for a system of dimension dim."""
        body = text.strip()
        if body.startswith('f:'):
            body = body[2:]
        body = body.replace(' ', '')
        if body == '1':
            return cls.constant(1.0, dim)
        match = re.fullmatch(r"e\((.+)\)", body)
        if not match:
            raise ValueError(f"invalid observable literal: {text!r}")
        freq = [0] * dim
        for sign, count, var in re.findall(r"([+-]?)(\d*)([xy])", match.group(1)):
            index = 'xy'.index(var)
            if index >= dim:
                raise ValueError(f"observable {text!r} uses y on a one-dimensional system")
            freq[index] += (-1 if sign == '-' else 1) * (int(count) if count else 1)
        if re.sub(r"[+-]?\d*[xy]", '', match.group(1)):
            raise ValueError(f"invalid observable literal: {text!r}")
        return cls.character(freq)

    def __mul__(self, other: 'TrigPoly') -> 'TrigPoly':
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        terms = [(tuple(a + b for a, b in zip(f, g)), c * d)
                 for f, c in self.terms for g, d in other.terms]
        return TrigPoly(tuple(terms), self.dim)

    def conjugate(self) -> 'TrigPoly':
        return TrigPoly(tuple((tuple(-k for k in f), c.conjugate()) for f, c in self.terms), self.dim)

    def zero_coefficient(self) -> complex:
        """Integral against Haar measure."""
        zero = (0,) * self.dim
        return next((c for f, c in self.terms if f == zero), 0j)

    def compose(self, system: SystemSpec, h: int) -> 'TrigPoly':
        """
        The observable f o T^h.

        rotation: e(k(x + h beta)) = e(k h beta) e(k x)
        skew:     e(k1 x' + k2 y') with T^h(x, y) = (x + h beta, y + h x + h(h-1)/2 beta)
        doubling: e(k 2^h x), h >= 0
        """
        _check_dimension(system, self)
        if system.kind == 'doubling':
            if h < 0:
                raise ValueError("the doubling map is not invertible")
            return TrigPoly(tuple(((f[0] << h,), c) for f, c in self.terms), 1)
        beta = Fraction(system.beta)
        terms = []
        for f, c in self.terms:
            if system.kind == 'rotation':
                shift = f[0] * h * beta
                new_f = f
            else:
                k1, k2 = f
                shift = k1 * h * beta + k2 * Fraction(h * (h - 1), 2) * beta
                new_f = (k1 + h * k2, k2)
            angle = 2 * math.pi * float(shift % 1)
            terms.append((new_f, c * complex(math.cos(angle), math.sin(angle))))
        return TrigPoly(tuple(terms), self.dim)

    def evaluate_phases(self, phases: Sequence[np.ndarray]) -> np.ndarray:
        """f at points given as uint64 Q0.64 coordinate arrays (one per dimension)."""
        out = np.zeros(len(phases[0]), dtype=np.complex128)
        for f, c in self.terms:
            acc = np.zeros(len(phases[0]), dtype=np.uint64)
            for k, coord in zip(f, phases):
                if k:
                    acc += uint64_scalar(k) * coord
            out += c * q64_to_unit(acc)
        return out

    def evaluate(self, points: Any) -> np.ndarray:
        """f at real points (array of shape (n,) or (n, dim))."""
        pts = np.atleast_1d(np.asarray(points, dtype=np.float64))
        pts = pts.reshape(-1, self.dim)
        out = np.zeros(len(pts), dtype=np.complex128)
        for f, c in self.terms:
            angle = 2 * math.pi * (pts @ np.asarray(f, dtype=np.float64))
            out += c * (np.cos(angle) + 1j * np.sin(angle))
        return out


State = Union[float, Fraction, SurdSeed, Tuple[float, float]]


def _check_dimension(system: SystemSpec, f: TrigPoly) -> None:
    if f.dim != system.dimension:
        raise ValueError(f"observable of dimension {f.dim} on a {system.kind} system")


def _coords(system: SystemSpec, state: State) -> Tuple[Any, ...]:
    if system.dimension == 2:
        if not isinstance(state, tuple) or len(state) != 2:
            raise ValueError("skew states are pairs (x, y)")
        return state
    if isinstance(state, tuple):
        raise ValueError(f"{system.kind} states are scalars")
    return (state,)


def _doubling_bits(x0: Any, n_max: int) -> int:
    """floor(2^(n_max + 64) x0) for the supported seed types."""
    if n_max < 0:
        raise ValueError("the doubling map is not invertible")
    if isinstance(x0, SurdSeed):
        if n_max > EXACT_DOUBLING_LIMIT:
            raise BudgetExceededError('dynamics.doubling', f"orbit length {n_max} exceeds 2^22",
                                      EXACT_DOUBLING_LIMIT)
        return x0.scaled_floor(n_max + 64)
    if isinstance(x0, float) and n_max > FLOAT_DOUBLING_LIMIT:
        raise BudgetExceededError(
            'dynamics.doubling',
            f"float seeds carry 53 bits; {n_max} doublings exceed the {FLOAT_DOUBLING_LIMIT}-step limit "
            "(use an exact SurdSeed or rational seed)", FLOAT_DOUBLING_LIMIT)
    return math.floor(Fraction(x0) % 1 * (1 << (n_max + 64)))


def iterate(system: SystemSpec, state: State, n: int) -> State:
    """
    Exact closed-form n-step map T^n.

    Args:
        system: The system
        state: Scalar point (rotation, doubling) or pair (skew)
        n: Number of steps; negative only for invertible systems

    Returns:
        The image point, coordinates reduced mod 1
    """
    n = int(n)
    if abs(n) > ITERATE_LIMIT:
        raise BudgetExceededError('dynamics.iterate', f"|n|={n} exceeds 2^62")
    coords = _coords(system, state)
    if system.kind == 'doubling':
        bits = _doubling_bits(coords[0], n)
        return float(Fraction(bits & MASK64, TWO64))
    beta = Fraction(system.beta)
    x = Fraction(coords[0])
    if system.kind == 'rotation':
        return float((x + n * beta) % 1)
    y = Fraction(coords[1])
    return (float((x + n * beta) % 1), float((y + n * x + Fraction(n * (n - 1), 2) * beta) % 1))


def _halved_triangle(m: np.ndarray) -> np.ndarray:
    """m(m-1)/2 mod 2^64 from exact int64 m (halving the even factor first)."""
    even = (m % 2) == 0
    t = np.where(even, (m // 2) * (m - 1), m * ((m - 1) // 2))
    return t.view(np.uint64)


def _orbit_phases(system: SystemSpec, state: State, m: np.ndarray) -> List[np.ndarray]:
    """Q0.64 coordinates of T^m x0 for an int64 array m."""
    coords = _coords(system, state)
    if system.kind == 'doubling':
        if len(m) and int(m.min()) < 0:
            raise ValueError("the doubling map is not invertible")
        n_max = int(m.max()) if len(m) else 0
        bits = _doubling_bits(coords[0], n_max)
        width = n_max + 64
        digits = np.frombuffer(bits.to_bytes((width + 7) // 8, 'big'), dtype=np.uint8)
        bit_array = np.unpackbits(digits)[-width:] if width else np.zeros(0, dtype=np.uint8)
        acc = np.zeros(len(m), dtype=np.uint64)
        for i in range(64):
            acc = (acc << np.uint64(1)) | bit_array[m + i].astype(np.uint64)
        return [acc]
    mu = m.view(np.uint64)
    b = uint64_scalar(to_q64(system.beta))
    x = uint64_scalar(to_q64(coords[0]))
    xs = x + mu * b
    if system.kind == 'rotation':
        return [xs]
    y = uint64_scalar(to_q64(coords[1]))
    ys = y + mu * x + _halved_triangle(m) * b
    return [xs, ys]


def orbit(system: SystemSpec, x0: State, n_array: Any) -> np.ndarray:
    """
    Vectorised closed-form orbit T^n x0.

    Returns:
        Array of shape (len(n_array),) or (len(n_array), 2) with coordinates in [0, 1)
    """
    m = np.asarray(n_array, dtype=np.int64)
    phases = _orbit_phases(system, x0, m)
    values = [p.astype(np.float64) * 2.0 ** -64 for p in phases]
    return values[0] if len(values) == 1 else np.stack(values, axis=1)


def _observable_along(system: SystemSpec, f: TrigPoly, x0: State, m: np.ndarray) -> np.ndarray:
    _check_dimension(system, f)
    return f.evaluate_phases(_orbit_phases(system, x0, m))


def weighted_average(system: SystemSpec, f: TrigPoly, x0: State, weights: Any, N: int) -> complex:
    """
    (1/N) sum_{n=1..N} a_n f(T^n x0).

    Args:
        system: The system
        f: Observable
        x0: Starting point
        weights: Complex weights a_1, a_2, ... with |a_n| <= 1
        N: Number of terms (<= len(weights))

    Returns:
        Correctly rounded complex average
    """
    a = np.asarray(weights, dtype=np.complex128)
    if int(N) != N or N < 1 or N > len(a):
        raise ValueError(f"N must lie in [1, {len(a)}], got {N}")
    a = a[:int(N)]
    if np.any(np.abs(a) > 1 + 1e-12):
        raise ValueError("weights must satisfy |a_n| <= 1")
    values = _observable_along(system, f, x0, np.arange(1, int(N) + 1, dtype=np.int64))
    return compensated_mean(a * values)


def _polynomial_iterates(system: SystemSpec, P: Sequence[int], N: int) -> np.ndarray:
    """P(n) for n = 1..N as exact int64."""
    bound = sum(abs(c) * float(N) ** (len(P) - i) for i, c in enumerate(P))
    if bound >= 2.0 ** 62:
        raise BudgetExceededError('dynamics.iterates', f"|P(n)| up to {bound:.3g} exceeds 2^62")
    n = np.arange(1, N + 1, dtype=np.uint64)
    m = skeleton_u64(P, n).view(np.int64)
    if not system.invertible and len(m) and int(m.min()) < 0:
        raise ValueError("negative iterate on the non-invertible doubling map")
    return m


def _twist(theta: Any, N: int) -> np.ndarray:
    n = np.arange(1, N + 1, dtype=np.uint64)
    return q64_to_unit(n * uint64_scalar(to_q64(theta)))


def twisted_poly_average(system: SystemSpec, f: TrigPoly, x0: State, theta: Any,
                         P: Sequence[int], N: int) -> complex:
    """(1/N) sum_{n=1..N} e(n theta) f(T^{P(n)} x0) for the integer polynomial skeleton P."""
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    N = int(N)
    values = _observable_along(system, f, x0, _polynomial_iterates(system, P, N))
    return compensated_mean(_twist(theta, N) * values)


@dataclass
class WWSupRow:
    """One row of a sup-over-net table."""
    N: int
    sup_abs: float
    argmax_theta: float
    lipschitz_radius: float


def ww_sup_experiment(system: SystemSpec, f: TrigPoly, x0: State, E_net: Sequence[Any],
                      P: Sequence[int], N_list: Sequence[int]) -> List[WWSupRow]:
    """
    max over theta in E_net of |twisted_poly_average| for every N.

    The Lipschitz radius 2 pi N bounds the theta-derivative of the average, so
    a net value extends to its neighbourhood.
    """
    if not E_net:
        raise ValueError("empty net")
    if list(N_list) != sorted(set(N_list)):
        raise ValueError("N_list must be strictly increasing")
    rows = []
    for N in N_list:
        N = int(N)
        values = _observable_along(system, f, x0, _polynomial_iterates(system, P, N))
        best, best_theta = -1.0, None
        for theta in E_net:
            value = abs(compensated_mean(_twist(theta, N) * values))
            if value > best:
                best, best_theta = value, theta
        rows.append(WWSupRow(N=N, sup_abs=best, argmax_theta=float(best_theta),
                             lipschitz_radius=2 * math.pi * N))
        logger.debug(f"ww_sup N={N}: {best:.6g} at theta={float(best_theta):.6g}")
    return rows
