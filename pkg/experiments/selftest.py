"""
selftest: every property suite, one row per check.
"""

import sys
from typing import Optional, Type

from pydantic import Field, field_validator

from property_suites import SUITES, print_summary, run_suites
from utils import PropertyViolation

from .base_experiment import Artifact, Experiment, RunContext
from .params import ExperimentParams


class SelftestParams(ExperimentParams):
    suites: str = Field('all', description="Comma-separated suite names, or 'all'")
    quick: bool = Field(False, description="Smaller sweeps")

    @field_validator('suites')
    @classmethod
    def validate_suites(cls, v: str) -> str:
        if v == 'all':
            return v
        unknown = [s for s in v.split(',') if s.strip() not in SUITES]
        if unknown:
            raise ValueError(f"unknown suites {unknown}; available: {', '.join(SUITES)}")
        return v


class SelftestExperiment(Experiment):
    """Run the property suites; exits 4 when any check fails."""

    def get_name(self) -> str:
        return 'selftest'

    def get_params_model(self) -> Type[ExperimentParams]:
        return SelftestParams

    def run(self, params: SelftestParams, context: RunContext):
        names = list(SUITES) if params.suites == 'all' else [s.strip() for s in params.suites.split(',')]
        results = run_suites(names, context.seed, params.quick)
        print_summary(results, sys.stderr)
        table = self.table(['check', 'passed', 'detail'])
        for result in results:
            table.add_row(vars(result))
        return table

    def verdict(self, artifact: Artifact) -> Optional[PropertyViolation]:
        failed = [row[0] for row in artifact.rows if not row[1]]
        if not failed:
            return None
        return PropertyViolation(f"{len(failed)} self-test checks failed", {'checks': failed})
