"""
Hardy-field weight experiments: hardy-decay, hardy-class.
"""

from dataclasses import asdict
from typing import Literal, Optional, Type

from pydantic import Field, ValidationError

from hardy_weights import ClassWitness, class_check_L, class_check_M, parse_expr, running_averages
from phase_sums import euler_decay_bound
from utils import ConfigError

from .base_experiment import Experiment, RunContext
from .params import CountList, ExperimentParams, Expression


def _witness(**fields) -> ClassWitness:
    try:
        return ClassWitness(**fields)
    except ValidationError as exc:
        first = exc.errors()[0]
        key = '.'.join(str(p) for p in first['loc']) or 'witness'
        raise ConfigError(f"invalid class witness: {first['msg']}", key=key) from exc


class HardyDecayParams(ExperimentParams):
    expr: Expression = Field('s^0.5', description="Hardy expression p")
    shift: float = Field(0.0, ge=0, description="Left translation s -> s + shift")
    n: CountList = Field('1e2..1e6', description="Values of N")
    delta: float = Field(0.3, gt=0, lt=0.5, description="Class parameter delta")
    M_const: float = Field(2.0, ge=1, description="Class constant M")
    alpha: float = Field(0.5, description="Fractional type")
    epsilon: float = Field(0.01, ge=0, description="Exponent slack")
    s_max: float = Field(1e6, gt=1, description="Certificate grid ceiling")


class HardyDecayExperiment(Experiment):
    """Averages of e(p(n)) against the Euler-summation majorant."""

    def get_name(self) -> str:
        return 'hardy-decay'

    def get_params_model(self) -> Type[ExperimentParams]:
        return HardyDecayParams

    def run(self, params: HardyDecayParams, context: RunContext):
        p = parse_expr(params.expr, params.shift)
        witness = _witness(family='M', m=0, k=0, **params.model_dump(
            include={'delta', 'M_const', 'alpha', 'epsilon', 's_max'}))
        averages = running_averages(p, params.n)
        table = self.table(['N', 'abs_avg', 'euler_bound', 'holds'])
        for N, average in zip(params.n, averages):
            bound = euler_decay_bound(p, witness, N)
            table.add_row({'N': N, 'abs_avg': abs(average), 'euler_bound': bound,
                           'holds': abs(average) <= bound})
        return table


class HardyClassParams(ExperimentParams):
    expr: Expression = Field('s^0.5', description="Hardy expression p")
    shift: float = Field(0.0, ge=0, description="Left translation s -> s + shift")
    family: Literal['M', 'L'] = Field('M', description="Class family")
    delta: float = Field(0.3, gt=0, description="Class parameter delta")
    M_const: float = Field(2.0, gt=0, description="Class constant M")
    m: int = Field(0, ge=0, description="Class index m")
    k: int = Field(0, ge=0, description="Integer part of the type")
    alpha: Optional[float] = Field(0.5, description="Fractional type (family M)")
    epsilon: Optional[float] = Field(0.01, ge=0, description="Exponent slack (family M)")
    s_max: float = Field(1e6, gt=1, description="Grid ceiling")
    grid_points: int = Field(512, ge=64, description="Geometric grid size")


class HardyClassExperiment(Experiment):
    """Class-membership certificate for a Hardy expression."""

    def get_name(self) -> str:
        return 'hardy-class'

    def get_params_model(self) -> Type[ExperimentParams]:
        return HardyClassParams

    def run(self, params: HardyClassParams, context: RunContext):
        p = parse_expr(params.expr, params.shift)
        witness = _witness(**params.model_dump(exclude={'expr', 'shift', 'grid_points'}))
        check = class_check_M if params.family == 'M' else class_check_L
        certificate = check(p, witness, params.grid_points)
        payload = asdict(certificate)
        payload['expr'] = str(p)
        payload['shift'] = params.shift
        return self.report(payload)
