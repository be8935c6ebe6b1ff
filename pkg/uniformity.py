"""
Uniformity Seminorms
====================
Gowers norms on cyclic groups Z_N with a Fourier oracle, and truncated
Gowers-Host-Kra seminorm estimates for the systems of `dynamics`.

Features:
- Direct 2^m-fold multiplicative averages for m <= 3
- Fourier identity ||f||_{U^2}^4 = sum |f^(xi)|^4 as an independent oracle
- ||f||_{U^m} <= ||f||_{L^{p_m}}, p_m = 2^m/(m+1), checks
- Symbolic GHK recursion on trigonometric polynomials: the base integral is
  the exact zero-frequency coefficient
"""

import math
from dataclasses import dataclass
from functools import partial
from typing import Any, Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from dynamics import State, SystemSpec, TrigPoly, weighted_average
from hardy_weights import HardyExpr, weight_sequence
from progress_tracker import run_cells
from utils import BudgetExceededError, setup_logger


logger = setup_logger('uniformity')

CYCLIC_BUDGET = 10 ** 8
GHK_LEAF_BUDGET = 10 ** 7
GHK_TERM_BUDGET = 4096
GHK_CELL = 256
LP_SLACK = 1e-10


@dataclass(frozen=True)
class CyclicSignal:
    """A complex function on Z_N."""
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128).ravel()
        if len(values) < 1:
            raise ValueError("signal needs N >= 1")
        if not np.all(np.isfinite(values)):
            raise ValueError("signal entries must be finite")
        object.__setattr__(self, 'values', values)

    @property
    def N(self) -> int:
        return len(self.values)

    @classmethod
    def random_sign(cls, N: int, rng: np.random.Generator) -> 'CyclicSignal':
        return cls(rng.choice([-1.0, 1.0], size=N))

    @classmethod
    def random_unit(cls, N: int, rng: np.random.Generator) -> 'CyclicSignal':
        return cls(np.exp(2j * math.pi * rng.random(N)))

    @classmethod
    def random_gaussian(cls, N: int, rng: np.random.Generator) -> 'CyclicSignal':
        return cls(rng.standard_normal(N) + 1j * rng.standard_normal(N))


class GHKParams(BaseModel):
    """Truncation of the limsup averages in the seminorm recursion."""
    model_config = ConfigDict(frozen=True, extra='forbid')

    N_per_level: int = Field(10 ** 4, gt=0, description="Shifts averaged at the top level")
    H_per_level: int = Field(10 ** 2, gt=0, description="Shifts averaged at deeper levels")
    m: int = Field(2, ge=1, le=4, description="Seminorm degree")


def _multiplicative_derivatives(F: np.ndarray) -> np.ndarray:
    """Rows F(x) -> rows F(x + h) conj(F(x)) for every h, shape (K, N) -> (K N, N)."""
    K, N = F.shape
    shifted = np.stack([np.roll(F, -h, axis=1) for h in range(N)], axis=1)
    return (shifted * np.conj(F)[:, None, :]).reshape(K * N, N)


def gowers_norm_cyclic(f: CyclicSignal, m: int) -> float:
    """
    ||f||_{U^m} on Z_N by the 2^m-fold multiplicative average.

    Args:
        f: Signal
        m: Degree in {1, 2, 3}

    Returns:
        Non-negative norm

    Raises:
        BudgetExceededError: when N^(m+1) > 10^8
    """
    if m not in (1, 2, 3):
        raise ValueError(f"m must be 1, 2 or 3, got {m}")
    N = f.N
    if N ** (m + 1) > CYCLIC_BUDGET:
        raise BudgetExceededError('uniformity.cyclic', f"N^(m+1) = {N ** (m + 1)} exceeds 10^8",
                                  math.floor(CYCLIC_BUDGET ** (1 / (m + 1))))
    F = f.values[None, :]
    for _ in range(m - 1):
        F = _multiplicative_derivatives(F)
    power = float(np.mean(np.abs(F.mean(axis=1)) ** 2))
    return power ** (1.0 / 2 ** m)


def fourier_u2(f: CyclicSignal) -> float:
    """(sum_xi |f^(xi)|^4)^(1/4) with f^(xi) = (1/N) sum_x f(x) e(-x xi / N)."""
    coeffs = np.fft.fft(f.values) / f.N
    return float(np.sum(np.abs(coeffs) ** 4)) ** 0.25


def lp_bound_check(f: CyclicSignal, m: int) -> Tuple[float, float, bool]:
    """
    Compare ||f||_{U^m} with ||f||_{L^{p_m}}, p_m = 2^m / (m + 1).

    Returns:
        Tuple of (u_norm, lp_norm, ok)
    """
    if m not in (2, 3):
        raise ValueError(f"m must be 2 or 3, got {m}")
    p = 2 ** m / (m + 1)
    u_norm = gowers_norm_cyclic(f, m)
    lp_norm = float(np.mean(np.abs(f.values) ** p)) ** (1.0 / p)
    return u_norm, lp_norm, u_norm <= lp_norm + LP_SLACK


def _ghk_power(system: SystemSpec, g: TrigPoly, level: int, params: GHKParams) -> float:
    """||g||_{U^level}^(2^level) with deeper shifts averaged over H_per_level."""
    if level == 1:
        return abs(g.zero_coefficient()) ** 2
    total = [_ghk_power(system, _derivative(system, g, h), level - 1, params)
             for h in range(1, params.H_per_level + 1)]
    return math.fsum(total) / params.H_per_level


def _derivative(system: SystemSpec, g: TrigPoly, h: int) -> TrigPoly:
    """T^h g . conj(g)."""
    result = g.compose(system, h) * g.conjugate()
    if len(result.terms) > GHK_TERM_BUDGET:
        raise BudgetExceededError('uniformity.ghk_terms',
                                  f"derivative has {len(result.terms)} terms (> {GHK_TERM_BUDGET})")
    return result


def _top_level_cell(bounds: Tuple[int, int], system: SystemSpec, f: TrigPoly, params: GHKParams) -> float:
    start, stop = bounds
    return math.fsum(_ghk_power(system, _derivative(system, f, h), params.m - 1, params)
                     for h in range(start, stop))


def ghk_estimate(system: SystemSpec, f: TrigPoly, params: GHKParams, workers: int = 1) -> float:
    """
    Truncated Gowers-Host-Kra seminorm ||f||_{U^m}.

    ||f||_{U^1} = |integral of f| (zero-frequency coefficient); for m >= 2
    ||f||_{U^m}^(2^m) = avg_{h<=L} ||T^h f . conj(f)||_{U^(m-1)}^(2^(m-1)) with
    L = N_per_level at the top level and H_per_level below.

    Args:
        system: System supporting symbolic composition
        f: Trigonometric polynomial observable
        params: Truncation parameters and degree m
        workers: Processes for the top-level shift average

    Returns:
        Non-negative estimate
    """
    if f.dim != system.dimension:
        raise ValueError(f"observable of dimension {f.dim} on a {system.kind} system")
    m = params.m
    if m == 1:
        return abs(f.zero_coefficient())
    leaves = params.N_per_level * params.H_per_level ** (m - 2)
    if leaves > GHK_LEAF_BUDGET:
        raise BudgetExceededError('uniformity.ghk', f"{leaves} leaf integrals exceed 10^7")
    L = params.N_per_level
    cells = [(start, min(L, start + GHK_CELL - 1) + 1) for start in range(1, L + 1, GHK_CELL)]
    partials = run_cells(partial(_top_level_cell, system=system, f=f, params=params),
                         cells, workers=workers, desc=f"ghk U^{m}")
    power = math.fsum(partials) / L
    estimate = max(power, 0.0) ** (1.0 / 2 ** m)
    logger.debug(f"ghk_estimate m={m} on {system.kind}: {estimate:.6g}")
    return estimate


def seminorm_domination(system: SystemSpec, f: TrigPoly, x0: State, p: HardyExpr, N: int,
                        params: GHKParams) -> Dict[str, Any]:
    """
    Compare |avg e(p(n)) f(T^n x0)| with the U^m estimate of f.

    Reported, never asserted: the uniform bound holds only asymptotically.
    """
    average = weighted_average(system, f, x0, weight_sequence(p, N), N)
    seminorm = ghk_estimate(system, f, params)
    return {
        'N': int(N),
        'm': params.m,
        'average_abs': abs(average),
        'seminorm': seminorm,
        'dominated': abs(average) <= seminorm + 1e-12,
        'expr': str(p),
    }


def gowers_table(signals: List[CyclicSignal], m: int) -> List[Dict[str, Any]]:
    """Rows (N, m, u_norm, fourier_u2, lp_norm, lp_ok) for a batch of signals."""
    rows = []
    for trial, f in enumerate(signals):
        u_norm, lp_norm, ok = lp_bound_check(f, m) if m in (2, 3) else (gowers_norm_cyclic(f, m), float('nan'), True)
        rows.append({'trial': trial, 'N': f.N, 'm': m, 'u_norm': u_norm,
                     'fourier_u2': fourier_u2(f), 'lp_norm': lp_norm, 'lp_ok': ok})
    return rows
