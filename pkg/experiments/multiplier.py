"""
Circle-method experiments: atoms, multiplier-residual, minor-arc, subdivision.
"""

from typing import Type

import numpy as np
from pydantic import Field, field_validator

from circle_method import (
    build_multiplier, minor_arc_decay, multiplier_residual, omega_variation, residual_exponent,
    scale_cardinality_ok, square_sum_diagnostic, subdivision_check,
)
from diophantine import approximate_sparsity, n_theta_approximate
from utils import lacunary_set, setup_logger

from .base_experiment import Experiment, RunContext
from .params import Count, CountList, ExperimentParams, Real, Skeleton


logger = setup_logger('experiments.multiplier')


class MultiplierParams(ExperimentParams):
    theta: Real = Field('golden', description="Twist theta")
    poly: Skeleton = Field('n^2', description="Integer polynomial P of degree >= 2")
    delta: float = Field(0.05, gt=0, le=0.2, description="Major-box exponent delta")

    @field_validator('poly')
    @classmethod
    def validate_degree(cls, v):
        if len(v) < 2:
            raise ValueError("the multiplier needs deg P >= 2")
        return v


class AtomsParams(MultiplierParams):
    n: CountList = Field('2^4..2^16', description="Values of N")


class AtomsExperiment(Experiment):
    """Major-box atoms (zero atom first) with their complete sums S."""

    def get_name(self) -> str:
        return 'atoms'

    def get_params_model(self) -> Type[ExperimentParams]:
        return AtomsParams

    def seeded_defaults(self):
        return {'delta': 'delta'}

    def run(self, params: AtomsParams, context: RunContext):
        table = self.table(['N', 'j', 'a', 'b', 'b_N_j', 're_S', 'im_S', 'center', 'half_width'])
        for N in params.n:
            model = build_multiplier(params.theta, params.poly, N, params.delta)
            if not scale_cardinality_ok(model.atoms, params.poly[0]):
                logger.warning(f"N={N}: scale cardinality bound exceeded")
            for atom in model.windows:
                box = atom.box
                table.add_row({
                    'N': N, 'j': box.j, 'a': box.a_over_b.numerator, 'b': box.a_over_b.denominator,
                    'b_N_j': atom.b_N_j, 're_S': atom.S.real, 'im_S': atom.S.imag,
                    'center': box.center, 'half_width': box.half_width,
                })
        return table


class ResidualParams(MultiplierParams):
    n: CountList = Field('2^6..2^14', description="Values of N")
    samples_per_window: int = Field(16, ge=2, description="Samples per major window")


class MultiplierResidualExperiment(Experiment):
    """Distance between the exact multiplier and its major-arc approximation."""

    def get_name(self) -> str:
        return 'multiplier-residual'

    def get_params_model(self) -> Type[ExperimentParams]:
        return ResidualParams

    def seeded_defaults(self):
        return {'delta': 'delta'}

    def run(self, params: ResidualParams, context: RunContext):
        rows = multiplier_residual(params.theta, params.poly, params.n, params.delta,
                                   params.samples_per_window)
        table = self.table(['N', 'max_residual', 'bound_scale'])
        for row in rows:
            table.add_row(row)
        table.provenance['residual_exponent'] = residual_exponent(rows)
        table.provenance['reference_exponent'] = 1 - 2 * params.delta
        return table


class MinorArcParams(MultiplierParams):
    n: CountList = Field('2^8..2^14', description="Values of N")
    samples: Count = Field(10 ** 4, ge=1000, description="Random frequencies per N")


class MinorArcExperiment(Experiment):
    """Largest multiplier value off the major boxes, with the fitted decay exponent."""

    def get_name(self) -> str:
        return 'minor-arc'

    def get_params_model(self) -> Type[ExperimentParams]:
        return MinorArcParams

    def seeded_defaults(self):
        return {'delta': 'delta'}

    def run(self, params: MinorArcParams, context: RunContext):
        result = minor_arc_decay(params.theta, params.poly, params.n, params.delta,
                                 params.samples, seed=context.seed)
        table = self.table(['N', 'max_minor', 'max_major'])
        for row in result['rows']:
            table.add_row(row)
        table.provenance['kappa'] = result['kappa']
        table.provenance['degenerate'] = result['degenerate']
        return table


class SubdivisionParams(MultiplierParams):
    rho: float = Field(2.0, gt=1, description="Lacunary constant")
    n_max: Count = Field(2 ** 20, ge=2, description="Largest scale")
    square_samples: int = Field(64, ge=0, description="Frequencies for the square-sum diagnostic")


class SubdivisionExperiment(Experiment):
    """Check that each denominator scale t meets one run of scales sharing an approximate."""

    def get_name(self) -> str:
        return 'subdivision'

    def get_params_model(self) -> Type[ExperimentParams]:
        return SubdivisionParams

    def seeded_defaults(self):
        return {'delta': 'delta', 'rho': 'rho'}

    def run(self, params: SubdivisionParams, context: RunContext):
        report = subdivision_check(params.theta, params.poly, params.delta, params.rho, params.n_max)
        scales = [N for N in lacunary_set(params.rho, params.n_max) if N >= 2]
        approximates = [n_theta_approximate(params.theta, N, params.delta, params.poly[0]) for N in scales]
        report['approximate_sparsity'] = approximate_sparsity(approximates, params.delta)
        report['omega_variation'] = omega_variation([(a.N, a.gamma) for a in approximates if a is not None])
        if params.square_samples:
            # log grid around 0 meets the zero-atom window at every scale
            alphas = np.geomspace(float(params.n_max) ** -2, 0.5, params.square_samples)
            report['square_sum'] = square_sum_diagnostic(params.theta, params.poly, params.delta,
                                                         params.rho, params.n_max, alphas)
        return self.report(report)
