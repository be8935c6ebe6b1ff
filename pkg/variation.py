"""
Variation Seminorms
===================
Exact r-variation of finite sequences, the twisted discrete convolution

    K_N f(x) = (1/N) sum_{n<=N} e(-n theta) f(x - P(n)),

and l^2 variation-growth tables over lacunary scales.

Features:
- O(K^2) dynamic programme for the supremum over increasing subsequences,
  vectorised across lattice points
- Sparse point-by-scale accumulation so quadratic supports stay small
- Growth diagnostics (reported, not asserted)
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from phase_sums import skeleton_u64
from utils import BudgetExceededError, lacunary_set, q64_to_unit, setup_logger, to_q64, uint64_scalar


logger = setup_logger('variation')

DENSE_SPAN_LIMIT = 1 << 24
SPARSE_ENTRY_LIMIT = 1 << 26


def _variation_dp(values: np.ndarray, r: float) -> np.ndarray:
    """dp[..., i] = best sum of |jumps|^r over increasing paths ending at i (last axis)."""
    K = values.shape[-1]
    dp = np.zeros(values.shape, dtype=np.float64)
    for i in range(1, K):
        jumps = np.abs(values[..., i:i + 1] - values[..., :i]) ** r
        dp[..., i] = np.max(dp[..., :i] + jumps, axis=-1)
    return dp


def r_variation(values: Sequence[complex], r: float) -> float:
    """
    V^r = sup over increasing index sequences of (sum |v_{t_{k+1}} - v_{t_k}|^r)^{1/r}.

    Args:
        values: Complex sequence of length K >= 1
        r: Exponent, r >= 1

    Returns:
        The exact optimum
    """
    if r < 1:
        raise ValueError(f"r-variation needs r >= 1, got {r}")
    v = np.asarray(values, dtype=np.complex128)
    if v.ndim != 1 or len(v) < 1:
        raise ValueError("values must be a non-empty vector")
    return float(np.max(_variation_dp(v, r))) ** (1.0 / r)


def sup_difference(values: Sequence[complex]) -> float:
    """V^infinity: max |v_i - v_j|."""
    v = np.asarray(values, dtype=np.complex128)
    return float(np.max(np.abs(v[:, None] - v[None, :]))) if len(v) else 0.0


@dataclass
class VariationSeries:
    """Means indexed by increasing scales, one column per lattice point."""
    index_labels: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.index_labels = np.asarray(self.index_labels, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.complex128)
        if len(self.index_labels) and np.any(np.diff(self.index_labels) <= 0):
            raise ValueError("index labels must be strictly increasing")
        if self.values.shape[0] != len(self.index_labels):
            raise ValueError("value rows must align with index labels")

    def prefix_variations(self, r: float) -> np.ndarray:
        """V^r over the first k scales, for every k (rows) and point (columns)."""
        columns = self.values.reshape(len(self.index_labels), -1).T
        dp = _variation_dp(columns, r)
        best = np.maximum.accumulate(dp, axis=1)
        return (best ** (1.0 / r)).T


@dataclass
class LatticeSignal:
    """Finitely supported map on Z stored densely from `offset`."""
    offset: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128).ravel()
        if not np.all(np.isfinite(self.values)):
            raise ValueError("lattice values must be finite")

    @classmethod
    def delta(cls, x: int = 0) -> 'LatticeSignal':
        return cls(x, np.ones(1))

    def support(self) -> np.ndarray:
        return self.offset + np.nonzero(self.values)[0]

    def at(self, x: int) -> complex:
        i = x - self.offset
        return complex(self.values[i]) if 0 <= i < len(self.values) else 0j

    def l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2)))


def _shifts_and_weights(theta: Any, P: Sequence[int], N: int, reflected: bool):
    bound = sum(abs(m) * float(N) ** (len(P) - i) for i, m in enumerate(P))
    if bound >= 2.0 ** 62:
        raise BudgetExceededError('variation.shifts', f"|P(n)| up to {bound:.3g} exceeds 2^62")
    n = np.arange(1, N + 1, dtype=np.uint64)
    shifts = skeleton_u64(P, n).view(np.int64)
    twist = q64_to_unit(n * uint64_scalar(to_q64(theta)))
    if reflected:
        return -shifts, twist
    return shifts, np.conj(twist)


def twisted_convolution(f: LatticeSignal, theta: Any, P: Sequence[int], N: int,
                        reflected: bool = False) -> LatticeSignal:
    """
    K_N f(x) = (1/N) sum e(-n theta) f(x - P(n)), or with reflected=True the
    conjugate operator (1/N) sum e(n theta) f(x + P(n)).

    Direct O(N |supp f|) evaluation into the minimal enclosing interval.
    """
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    shifts, weights = _shifts_and_weights(theta, P, int(N), reflected)
    support = f.support()
    if len(support) == 0:
        return LatticeSignal(f.offset, np.zeros(1))
    lo = int(support.min() + shifts.min())
    hi = int(support.max() + shifts.max())
    if hi - lo + 1 > DENSE_SPAN_LIMIT:
        raise BudgetExceededError('variation.dense_span', f"output span {hi - lo + 1} exceeds 2^24")
    out = np.zeros(hi - lo + 1, dtype=np.complex128)
    for y in support:
        np.add.at(out, y + shifts - lo, weights * f.values[y - f.offset])
    return LatticeSignal(lo, out / N)


def lacunary_means(f: LatticeSignal, theta: Any, P: Sequence[int], scales: Sequence[int],
                   reflected: bool = False) -> VariationSeries:
    """
    K_N f at every point reached, for all N in `scales`, as a sparse
    point-by-scale accumulation of the pairs (n, y) grouped by x = y + P(n).
    """
    scales = np.asarray(sorted(set(int(N) for N in scales)), dtype=np.int64)
    N_max = int(scales[-1])
    support = f.support()
    if len(support) * N_max > SPARSE_ENTRY_LIMIT:
        raise BudgetExceededError('variation.sparse', f"{len(support) * N_max} contributions exceed 2^26")
    shifts, weights = _shifts_and_weights(theta, P, N_max, reflected)
    n = np.arange(1, N_max + 1)
    scale_of_n = np.searchsorted(scales, n)
    points = (support[:, None] + shifts[None, :]).ravel()
    contrib = (f.values[support - f.offset][:, None] * weights[None, :]).ravel()
    column = np.tile(scale_of_n, len(support))
    unique_points, row = np.unique(points, return_inverse=True)
    partial = np.zeros((len(unique_points), len(scales)), dtype=np.complex128)
    np.add.at(partial, (row, column), contrib)
    sums = np.cumsum(partial, axis=1)
    return VariationSeries(scales, (sums / scales[None, :]).T)


def variation_growth(f: LatticeSignal, theta: Any, P: Sequence[int], rho: float, r: float,
                     N_max: int, reflected: bool = False) -> List[Dict[str, float]]:
    """
    Rows (N_max', ||V^r(K_N f : N in I_rho, N <= N_max')||_2 / ||f||_2).

    Raises:
        ValueError: for r <= 2 (the variational bound needs r > 2)
    """
    if not r > 2:
        raise ValueError(f"variation_growth needs r > 2 (the l^2 variational bound requires it), got r={r}")
    norm = f.l2()
    if norm == 0:
        raise ValueError("f must be non-zero")
    scales = lacunary_set(rho, N_max)
    series = lacunary_means(f, theta, P, scales, reflected)
    prefix = series.prefix_variations(r)
    ratios = np.sqrt(np.sum(prefix ** 2, axis=1)) / norm
    rows = [{'N_max': int(N), 'ratio': float(value)} for N, value in zip(scales, ratios)]
    logger.debug(f"variation_growth: {len(rows)} scales, final ratio {rows[-1]['ratio']:.6g}")
    return rows


def growth_diagnostic(table: Sequence[Dict[str, float]]) -> Dict[str, Optional[float]]:
    """Increment of the ratio over the last quarter of the table, relative to its final value."""
    ratios = [row['ratio'] for row in table]
    if len(ratios) < 2:
        return {'increment': 0.0, 'relative': 0.0, 'final': ratios[-1] if ratios else None}
    span = max(1, math.ceil(len(ratios) / 4))
    increment = ratios[-1] - ratios[-1 - span]
    final = ratios[-1]
    return {'increment': increment, 'relative': increment / final if final else 0.0, 'final': final}
