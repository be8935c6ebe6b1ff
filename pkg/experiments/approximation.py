"""
Diophantine experiments: dirichlet, badc, cantor-dim, ntheta.
"""

from fractions import Fraction
from typing import Type

import numpy as np
from pydantic import Field, model_validator

from diophantine import (
    MAX_CANTOR_DEPTH, bad_approx_constant, box_dimension, cantor_net, digit_bound_bracket,
    dirichlet_approx, n_theta_approximate, uniqueness_threshold,
)
from utils import setup_logger

from .base_experiment import Experiment, RunContext
from .params import Count, CountList, Digits, ExperimentParams, Real


logger = setup_logger('experiments.approximation')


class DirichletParams(ExperimentParams):
    alpha: Real = Field('golden', description="Real number to approximate")
    q: CountList = Field('2^1..2^16', description="Denominator ceilings Q")


class DirichletExperiment(Experiment):
    """Dirichlet approximants p/q with q <= Q and |alpha - p/q| <= 1/(qQ)."""

    def get_name(self) -> str:
        return 'dirichlet'

    def get_params_model(self) -> Type[ExperimentParams]:
        return DirichletParams

    def run(self, params: DirichletParams, context: RunContext):
        alpha = Fraction(params.alpha)
        table = self.table(['alpha', 'Q', 'p_over_q', 'error', 'bound'])
        for Q in params.q:
            approx = dirichlet_approx(alpha, Q)
            table.add_row({'alpha': float(alpha), 'Q': Q, 'p_over_q': approx,
                           'error': float(abs(alpha - approx)),
                           'bound': float(Fraction(1, approx.denominator * Q))})
        return table


class BadcParams(ExperimentParams):
    theta: Real = Field('golden', description="Real number")
    q: CountList = Field('2^4..2^20', description="Denominator ceilings Q")
    q_min: Count = Field(1, ge=1, description="Smallest denominator scanned")
    bracket: bool = Field(False, description="Emit a JSON report with the digit brackets")


class BadcExperiment(Experiment):
    """Empirical badly-approximable constant c_Q = min q ||q theta||."""

    def get_name(self) -> str:
        return 'badc'

    def get_params_model(self) -> Type[ExperimentParams]:
        return BadcParams

    def run(self, params: BadcParams, context: RunContext):
        table = self.table(['Q', 'c_Q'])
        for Q in params.q:
            table.add_row({'Q': Q, 'c_Q': bad_approx_constant(params.theta, Q, params.q_min)})
        if not params.bracket:
            return table
        rows = [dict(zip(table.columns, row)) for row in table.rows]
        return self.report({'rows': rows,
                            'bracket': digit_bound_bracket(float(params.theta), max(params.q))})


class CantorDimParams(ExperimentParams):
    digits: Digits = Field('1,2', description="Digit set A of E_A")
    depth: int = Field(MAX_CANTOR_DEPTH, ge=1, le=MAX_CANTOR_DEPTH, description="Cylinder depth")
    eps_max: float = Field(2.0 ** -6, gt=0, lt=1, description="Coarsest box size")
    eps_min: float = Field(2.0 ** -14, gt=0, description="Finest box size")
    scales: int = Field(9, ge=4, description="Geometrically spaced box sizes")

    @model_validator(mode='after')
    def check_scales(self) -> 'CantorDimParams':
        if self.eps_min >= self.eps_max:
            raise ValueError("eps_min must be smaller than eps_max")
        return self


class CantorDimExperiment(Experiment):
    """Box-counting dimension of the continued-fraction Cantor set E_A."""

    def get_name(self) -> str:
        return 'cantor-dim'

    def get_params_model(self) -> Type[ExperimentParams]:
        return CantorDimParams

    def run(self, params: CantorDimParams, context: RunContext):
        intervals = cantor_net(params.digits, params.depth)
        eps_range = np.geomspace(params.eps_max, params.eps_min, params.scales)
        slope, residual = box_dimension(intervals, eps_range)
        return self.report({
            'slope': slope,
            'residual': residual,
            'intervals': len(intervals),
            'total_length': float(sum(hi - lo for lo, hi in intervals)),
            'eps_range': eps_range.tolist(),
        })


class NThetaParams(ExperimentParams):
    theta: Real = Field('golden', description="Twist theta")
    delta: float = Field(0.05, gt=0, lt=0.5, description="Approximation exponent delta")
    m_d: int = Field(1, ge=1, description="Leading coefficient of P")
    n: CountList = Field('2^1..2^20', description="Values of N (>= 2)")


class NThetaExperiment(Experiment):
    """N-theta rational approximates x/y with y <= m_d N^delta, |x/y - theta| <= 2 N^(delta-1)."""

    def get_name(self) -> str:
        return 'ntheta'

    def get_params_model(self) -> Type[ExperimentParams]:
        return NThetaParams

    def seeded_defaults(self):
        return {'delta': 'delta'}

    def run(self, params: NThetaParams, context: RunContext):
        table = self.table(['N', 'x_over_y', 'gamma', 'y_bound', 'gamma_bound'])
        for N in params.n:
            approx = n_theta_approximate(params.theta, N, params.delta, params.m_d)
            table.add_row({
                'N': N,
                'x_over_y': approx.x_over_y if approx else None,
                'gamma': approx.gamma if approx else None,
                'y_bound': params.m_d * N ** params.delta,
                'gamma_bound': 2 * N ** (params.delta - 1),
            })
        threshold = uniqueness_threshold(params.delta, params.m_d)
        logger.info(f"approximates are unique beyond N_0 = {threshold:.6g}")
        return table
