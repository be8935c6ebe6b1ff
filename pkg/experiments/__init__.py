"""
Experiments package.

This package provides one handler per CLI subcommand. Each handler
declares a pydantic parameter schema and produces a CSV table or a JSON
report from the numerical modules.

Subcommands:
- weyl-scan, twisted-avg, vdc-check (exponential sums)
- hardy-decay, hardy-class (Hardy-field weights)
- gowers, ghk (uniformity norms and seminorms)
- dirichlet, badc, cantor-dim, ntheta (Diophantine approximation)
- atoms, multiplier-residual, minor-arc, subdivision (circle method)
- variation, ww-sup (variation norms and twisted ergodic averages)
- selftest (all property suites)

Usage:
    from experiments import get_experiment

    experiment = get_experiment('weyl-scan')
    params = experiment.get_params_model()(theta='golden', poly='n^2')
"""

import importlib

from .base_experiment import Experiment, RunContext


# Registry of available experiments, populated lazily
_EXPERIMENT_REGISTRY = {}

# name -> (module, class) for lazy registration
_KNOWN_EXPERIMENTS = {
    'weyl-scan': ('sums', 'WeylScanExperiment'),
    'twisted-avg': ('sums', 'TwistedAvgExperiment'),
    'vdc-check': ('sums', 'VdcCheckExperiment'),
    'hardy-decay': ('hardy', 'HardyDecayExperiment'),
    'hardy-class': ('hardy', 'HardyClassExperiment'),
    'gowers': ('uniformity_checks', 'GowersExperiment'),
    'ghk': ('uniformity_checks', 'GHKExperiment'),
    'dirichlet': ('approximation', 'DirichletExperiment'),
    'badc': ('approximation', 'BadcExperiment'),
    'cantor-dim': ('approximation', 'CantorDimExperiment'),
    'ntheta': ('approximation', 'NThetaExperiment'),
    'atoms': ('multiplier', 'AtomsExperiment'),
    'multiplier-residual': ('multiplier', 'MultiplierResidualExperiment'),
    'minor-arc': ('multiplier', 'MinorArcExperiment'),
    'subdivision': ('multiplier', 'SubdivisionExperiment'),
    'variation': ('orbits', 'VariationExperiment'),
    'ww-sup': ('orbits', 'WWSupExperiment'),
    'selftest': ('selftest', 'SelftestExperiment'),
}


def register_experiment(name: str, experiment_class):
    """
    Register an experiment handler.

    Args:
        name: Subcommand name (e.g., 'weyl-scan')
        experiment_class: Handler class (subclass of Experiment)
    """
    _EXPERIMENT_REGISTRY[name.lower()] = experiment_class


def _load(name: str) -> None:
    module_name, class_name = _KNOWN_EXPERIMENTS[name]
    module = importlib.import_module(f'.{module_name}', __name__)
    register_experiment(name, getattr(module, class_name))


def get_experiment(name: str) -> Experiment:
    """
    Factory function to get an experiment handler instance.

    Args:
        name: Subcommand name

    Returns:
        Experiment: Handler instance

    Raises:
        ValueError: If the experiment is not known
    """
    name_lower = name.lower()

    # Lazy import handlers so a subcommand only loads its own modules
    if name_lower in _KNOWN_EXPERIMENTS and name_lower not in _EXPERIMENT_REGISTRY:
        _load(name_lower)

    if name_lower not in _EXPERIMENT_REGISTRY:
        available = ', '.join(list_experiments())
        raise ValueError(f"Unknown experiment: '{name}'. Available experiments: {available}")

    return _EXPERIMENT_REGISTRY[name_lower]()


def list_experiments() -> list:
    """
    Get the names of all experiments, registered or known.

    Returns:
        list: Subcommand names in documentation order
    """
    names = list(_KNOWN_EXPERIMENTS)
    names.extend(n for n in _EXPERIMENT_REGISTRY if n not in _KNOWN_EXPERIMENTS)
    return names


# Public API
__all__ = [
    'Experiment',
    'RunContext',
    'get_experiment',
    'list_experiments',
    'register_experiment',
]
