"""
Exponential-sum experiments: weyl-scan, twisted-avg, vdc-check.
"""

from functools import partial
from typing import Literal, Tuple, Type

import numpy as np
from pydantic import Field, model_validator

from phase_sums import SupScanResult, sup_estimate, sup_scan, twisted_average, vdc_lhs, vdc_rhs
from progress_tracker import run_cells
from utils import BudgetExceededError, setup_logger

from .base_experiment import Experiment, RunContext
from .params import Count, CountList, ExperimentParams, Real, Skeleton


logger = setup_logger('experiments.sums')

VDC_SLACK = 1e-12


class WeylScanParams(ExperimentParams):
    theta: Real = Field('golden', description="Linear twist theta")
    poly: Skeleton = Field('n^2', description="Integer polynomial P without constant term")
    n_min: Count = Field(64, ge=1, description="Smallest N (powers of two up to n_max)")
    n_max: Count = Field(4096, ge=1, description="Largest N")
    abs_err: float = Field(1e-3, gt=0, description="Certified slack of the scan")
    mode: Literal['auto', 'certified', 'estimate'] = Field(
        'auto', description="certified fails over budget; auto falls back to the estimate")
    oversample: int = Field(2, ge=1, description="Grid oversampling of the uncertified estimate")

    @model_validator(mode='after')
    def check_range(self) -> 'WeylScanParams':
        if self.n_max < self.n_min:
            raise ValueError("n_max must be >= n_min")
        return self


def _scan_cell(N: int, theta, skeleton: Tuple[int, ...], mode: str, abs_err: float,
               oversample: int, grid_cap: int, fft_chunk: int) -> SupScanResult:
    if mode != 'estimate':
        try:
            return sup_scan(theta, skeleton, N, abs_err, grid_cap=grid_cap, fft_chunk=fft_chunk)
        except BudgetExceededError as exc:
            if mode == 'certified':
                raise
            logger.info(f"N={N}: certified grid over budget, using estimate ({exc})")
    return sup_estimate(theta, skeleton, N, oversample, grid_cap=grid_cap, fft_chunk=fft_chunk)


class WeylScanExperiment(Experiment):
    """Sup over alpha of the twisted polynomial Weyl average for N in a dyadic range."""

    def get_name(self) -> str:
        return 'weyl-scan'

    def get_params_model(self) -> Type[ExperimentParams]:
        return WeylScanParams

    def seeded_defaults(self):
        return {'abs_err': 'abs_err'}

    def run(self, params: WeylScanParams, context: RunContext):
        Ns = []
        N = params.n_min
        while N <= params.n_max:
            Ns.append(N)
            N *= 2
        cell = partial(_scan_cell, theta=params.theta, skeleton=params.poly, mode=params.mode,
                       abs_err=params.abs_err, oversample=params.oversample,
                       grid_cap=context.grid_cap, fft_chunk=context.fft_chunk)
        results = run_cells(cell, Ns, workers=context.workers, desc='weyl-scan', tracker=context.tracker)
        table = self.table(['N', 'sup_value', 'rigorous_upper', 'argmax_alpha', 'grid_size', 'certified'])
        for N, result in zip(Ns, results):
            table.add_row({'N': N, 'sup_value': result.sup_value, 'rigorous_upper': result.rigorous_upper,
                           'argmax_alpha': result.argmax_alpha, 'grid_size': result.grid_size,
                           'certified': result.certified})
        return table


class TwistedAvgParams(ExperimentParams):
    theta: Real = Field('golden', description="Linear twist theta")
    alpha: Real = Field('sqrt2-1', description="Polynomial frequency alpha")
    poly: Skeleton = Field('n^2', description="Integer polynomial P")
    n: CountList = Field('2^6..2^16', description="Values of N")


class TwistedAvgExperiment(Experiment):
    """(1/N) sum e(n theta + P(n) alpha) with its accumulated error bound."""

    def get_name(self) -> str:
        return 'twisted-avg'

    def get_params_model(self) -> Type[ExperimentParams]:
        return TwistedAvgParams

    def run(self, params: TwistedAvgParams, context: RunContext):
        table = self.table(['N', 're', 'im', 'abs', 'error_bound'])
        for N in params.n:
            result = twisted_average(params.theta, params.alpha, params.poly, N)
            table.add_row({'N': N, 're': result.value.real, 'im': result.value.imag,
                           'abs': abs(result.value), 'error_bound': result.accumulated_error_bound})
        return table


class VdcCheckParams(ExperimentParams):
    trials: int = Field(200, ge=1, description="Random unit-modulus sequences")
    n_max: Count = Field(256, ge=1, le=4096, description="Largest sequence length")


class VdcCheckExperiment(Experiment):
    """Van der Corput's inequality on random unit-modulus sequences."""

    def get_name(self) -> str:
        return 'vdc-check'

    def get_params_model(self) -> Type[ExperimentParams]:
        return VdcCheckParams

    def run(self, params: VdcCheckParams, context: RunContext):
        rng = np.random.default_rng(context.seed)
        table = self.table(['trial', 'N', 'H', 'lhs', 'rhs', 'holds'])
        for trial in range(params.trials):
            N = int(rng.integers(1, params.n_max + 1))
            H = int(rng.integers(1, N + 1))
            u = np.exp(2j * np.pi * rng.random(N))
            lhs, rhs = vdc_lhs(u), vdc_rhs(u, H)
            table.add_row({'trial': trial, 'N': N, 'H': H, 'lhs': lhs, 'rhs': rhs,
                           'holds': lhs <= rhs + VDC_SLACK})
        return table
