"""
Orbit experiments: variation (lattice convolution means) and ww-sup
(twisted ergodic averages over a net of twists).
"""

from typing import Optional, Type

from pydantic import Field, model_validator

from diophantine import maximal_net, quadratic_net
from dynamics import DEFAULT_SEEDS, TrigPoly, ww_sup_experiment
from utils import parse_real
from variation import LatticeSignal, growth_diagnostic, variation_growth

from .base_experiment import Experiment, RunContext
from .params import Count, CountList, Digits, ExperimentParams, Real, Skeleton, System


class VariationParams(ExperimentParams):
    theta: Real = Field('golden', description="Twist theta")
    poly: Skeleton = Field('n^2', description="Integer polynomial P")
    r: float = Field(2.5, gt=2, description="Variation exponent")
    rho: float = Field(2.0, gt=1, description="Lacunary constant")
    nmax: Count = Field(2 ** 14, ge=1, description="Largest scale")
    point: int = Field(0, description="Support of the unit mass f")
    reflected: bool = Field(False, description="Apply the conjugate operator")


class VariationExperiment(Experiment):
    """l^2 norm of the r-variation of twisted means over lacunary scales, relative to ||f||."""

    def get_name(self) -> str:
        return 'variation'

    def get_params_model(self) -> Type[ExperimentParams]:
        return VariationParams

    def seeded_defaults(self):
        return {'rho': 'rho'}

    def run(self, params: VariationParams, context: RunContext):
        rows = variation_growth(LatticeSignal.delta(params.point), params.theta, params.poly,
                                params.rho, params.r, params.nmax, params.reflected)
        table = self.table(['N_max', 'ratio'])
        for row in rows:
            table.add_row(row)
        table.provenance['growth'] = growth_diagnostic(rows)
        return table


class WWSupParams(ExperimentParams):
    system: System = Field('rotation:golden', description="System literal")
    observable: str = Field('f:e(x)', description="Trigonometric polynomial observable")
    x0: Optional[str] = Field(None, description="Initial point, comma separated for skew")
    poly: Skeleton = Field('n^2', description="Integer polynomial P")
    net_digits: Digits = Field('1,2', description="Digits of the quadratic-irrational net")
    net_period: int = Field(4, ge=1, le=10, description="Period length of the net")
    net_eps: float = Field(0.0, ge=0, description="Thin the net to an eps-separated subset")
    n: CountList = Field('2^8..2^16', description="Increasing values of N")

    @model_validator(mode='after')
    def check_observable(self) -> 'WWSupParams':
        TrigPoly.parse(self.observable, self.system.dimension)
        if self.x0 is not None and len(self.x0.split(',')) != self.system.dimension:
            raise ValueError(f"x0 needs {self.system.dimension} coordinates")
        return self


class WWSupExperiment(Experiment):
    """Sup over a net of twists of |(1/N) sum e(n theta) f(T^P(n) x0)|."""

    def get_name(self) -> str:
        return 'ww-sup'

    def get_params_model(self) -> Type[ExperimentParams]:
        return WWSupParams

    def run(self, params: WWSupParams, context: RunContext):
        system = params.system
        f = TrigPoly.parse(params.observable, system.dimension)
        if params.x0 is None:
            x0 = DEFAULT_SEEDS[system.kind]
        else:
            coords = tuple(parse_real(part) for part in params.x0.split(','))
            x0 = coords[0] if system.dimension == 1 else coords
        net = quadratic_net(params.net_digits, params.net_period)
        if params.net_eps > 0:
            net = maximal_net(net, params.net_eps)
        table = self.table(['N', 'sup_abs', 'argmax_theta', 'lipschitz_radius'])
        for row in ww_sup_experiment(system, f, x0, net, params.poly, params.n):
            table.add_row(vars(row))
        table.provenance['net_size'] = len(net)
        return table
