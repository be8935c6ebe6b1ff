"""
Uniformity experiments: gowers (cyclic norms) and ghk (ergodic seminorms).
"""

from typing import Literal, Type

import numpy as np
from pydantic import Field, model_validator

from dynamics import TrigPoly
from uniformity import CyclicSignal, GHKParams, ghk_estimate, gowers_table

from .base_experiment import Experiment, RunContext
from .params import Count, ExperimentParams, System


_GENERATORS = {
    'sign': CyclicSignal.random_sign,
    'unit': CyclicSignal.random_unit,
    'gaussian': CyclicSignal.random_gaussian,
}


class GowersParams(ExperimentParams):
    trials: int = Field(50, ge=1, description="Random signals")
    n: Count = Field(64, ge=1, description="Cyclic group order N")
    m: int = Field(2, ge=1, le=3, description="Norm degree")
    signal: Literal['sign', 'unit', 'gaussian'] = Field('unit', description="Signal distribution")


class GowersExperiment(Experiment):
    """Gowers norms on Z_N next to the Fourier and L^p comparisons."""

    def get_name(self) -> str:
        return 'gowers'

    def get_params_model(self) -> Type[ExperimentParams]:
        return GowersParams

    def run(self, params: GowersParams, context: RunContext):
        rng = np.random.default_rng(context.seed)
        make = _GENERATORS[params.signal]
        signals = [make(params.n, rng) for _ in range(params.trials)]
        table = self.table(['trial', 'N', 'm', 'u_norm', 'fourier_u2', 'lp_norm', 'lp_ok'])
        for row in gowers_table(signals, params.m):
            table.add_row(row)
        return table


class GHKRunParams(ExperimentParams):
    system: System = Field('rotation:golden', description="System literal")
    observable: str = Field('f:e(x)', description="Trigonometric polynomial observable")
    m: int = Field(2, ge=1, le=4, description="Largest seminorm degree")
    N_per_level: Count = Field(10 ** 4, ge=1, description="Top-level shifts")
    H_per_level: Count = Field(10 ** 2, ge=1, description="Deeper-level shifts")

    @model_validator(mode='after')
    def check_observable(self) -> 'GHKRunParams':
        TrigPoly.parse(self.observable, self.system.dimension)
        return self


class GHKExperiment(Experiment):
    """Truncated Gowers-Host-Kra seminorms U^1..U^m of an observable."""

    def get_name(self) -> str:
        return 'ghk'

    def get_params_model(self) -> Type[ExperimentParams]:
        return GHKRunParams

    def seeded_defaults(self):
        return {'N_per_level': 'N_per_level', 'H_per_level': 'H_per_level'}

    def run(self, params: GHKRunParams, context: RunContext):
        f = TrigPoly.parse(params.observable, params.system.dimension)
        table = self.table(['m', 'estimate'])
        for m in range(1, params.m + 1):
            truncation = GHKParams(N_per_level=params.N_per_level,
                                   H_per_level=params.H_per_level, m=m)
            table.add_row({'m': m, 'estimate': ghk_estimate(params.system, f, truncation,
                                                            workers=context.workers)})
        return table
