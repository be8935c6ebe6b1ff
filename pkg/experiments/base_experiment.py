"""
Base experiment abstraction for the CLI subcommands.

This module defines the abstract Experiment class every subcommand handler
implements. The runner resolves parameters against the handler's schema,
builds a RunContext and renders whatever artifact `run` returns, so new
experiments can be added without touching the runner.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Type, Union

from progress_tracker import ProgressTracker
from structured_output import Report, ResultTable
from utils import PropertyViolation

from .params import ExperimentParams


Artifact = Union[ResultTable, Report]


@dataclass
class RunContext:
    """Runtime settings shared by every experiment (never part of the output)."""
    seed: int
    workers: int = 1
    fft_chunk: int = 1 << 22
    grid_cap: int = 1 << 28
    defaults: Dict[str, Any] = field(default_factory=dict)
    tracker: Optional[ProgressTracker] = None


class Experiment(ABC):
    """
    Abstract base class for experiment handlers.

    Each handler provides:
    - its subcommand name
    - a pydantic parameter schema
    - the computation producing a ResultTable or a Report
    """

    @abstractmethod
    def get_name(self) -> str:
        """
        Return the subcommand name.

        Returns:
            str: Name such as 'weyl-scan'
        """
        pass

    @abstractmethod
    def get_params_model(self) -> Type[ExperimentParams]:
        """
        Return the parameter schema.

        Returns:
            Type[ExperimentParams]: Pydantic model validating the parameters
        """
        pass

    @abstractmethod
    def run(self, params: ExperimentParams, context: RunContext) -> Artifact:
        """
        Execute the experiment.

        Args:
            params: Validated parameters
            context: Seed, worker count and numerical budgets

        Returns:
            ResultTable or Report; provenance is filled in by the caller
        """
        pass

    def seeded_defaults(self) -> Dict[str, str]:
        """
        Map from schema field to key of the shared `defaults` config section.

        Returns:
            Dict[str, str]: e.g. {'delta': 'delta'}; empty by default
        """
        return {}

    def verdict(self, artifact: Artifact) -> Optional[PropertyViolation]:
        """
        Failure to report after the artifact has been written.

        Returns:
            PropertyViolation for a failed property run, None otherwise
        """
        return None

    def describe(self) -> str:
        """First line of the handler docstring, used as the subcommand help."""
        doc = (type(self).__doc__ or '').strip()
        return doc.splitlines()[0] if doc else self.get_name()

    def table(self, columns) -> ResultTable:
        return ResultTable(name=self.get_name(), columns=list(columns))

    def report(self, payload: Dict[str, Any]) -> Report:
        return Report(name=self.get_name(), payload=payload)
