"""
Wiener-Wintner Lab - Experiment Runner
======================================
Command-line tool exposing every numerical module through subcommands.
Tables are written as CSV and certificates as JSON, to stdout or --output;
logs and progress bars go to stderr only, so reruns with the same
configuration and seed are byte-identical.

Parameter precedence: command-line flag, then the subcommand's section
under "experiments" in the config file, then the shared "defaults"
section, then the built-in schema default.

Exit codes:
    0  success
    1  unexpected error
    2  configuration or parameter error (the offending key is logged)
    3  numeric budget exceeded (the guard is logged)
    4  property failure

Usage Examples:
    # Sup of the twisted quadratic Weyl average over a dyadic range
    python run_experiment.py weyl-scan --theta golden --poly n^2 --n-min 64 --n-max 4096 --abs-err 1e-3

    # Hardy weights against the Euler-summation majorant
    python run_experiment.py hardy-decay --expr "1*s^0.5" --n 1e2..1e6

    # Variation growth table, written to a file
    python run_experiment.py --output variation.csv variation --theta 0.5 --poly n^2 --r 3 --rho 2 --nmax 2^14

    # Full property suite with a fixed seed
    python run_experiment.py --seed 7 selftest
"""

import logging
import sys
from typing import Any, Dict, Optional

import click
from pydantic import ValidationError

from config import ConfigManager
from experiments import Experiment, RunContext, get_experiment, list_experiments
from experiments.params import ExperimentParams
from progress_tracker import WORKERS_ENV, ProgressTracker, default_workers
from structured_output import render
from utils import (
    LOG_FORMAT, ConfigError, WWLabError, check_mode, is_check_mode, route_logging_to_root, setup_logger,
)


logger = setup_logger('run_experiment')

LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR']


def configure_logging(level_name: str, log_file: Optional[str] = None) -> None:
    """Root logging on stderr (plus an optional file); warnings are captured too."""
    level = getattr(logging, level_name.upper(), logging.WARNING)
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)
    logging.captureWarnings(True)
    route_logging_to_root(level)


def resolve_params(experiment: Experiment, config: ConfigManager,
                   flags: Dict[str, Any]) -> ExperimentParams:
    """
    Merge schema defaults, shared defaults, the config section and flags.

    Raises:
        ConfigError: naming the first offending key
    """
    name = experiment.get_name()
    values: Dict[str, Any] = {}
    for field_name, key in experiment.seeded_defaults().items():
        value = config.get(f'defaults.{key}')
        if value is not None:
            values[field_name] = value
    values.update(config.get_experiment_config(name))
    values.update({k: v for k, v in flags.items() if v is not None})
    try:
        return experiment.get_params_model()(**values)
    except ValidationError as exc:
        first = exc.errors()[0]
        key = '.'.join(str(part) for part in first['loc']) or name
        raise ConfigError(f"{name}: invalid parameter '{key}': {first['msg']}", key=key) from exc


def _runtime_int(config: ConfigManager, key: str, flag: Optional[int]) -> int:
    value = flag if flag is not None else config.get(f'runtime.{key}')
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"runtime.{key} must be an integer", key=f'runtime.{key}')
    return value


def write_artifact(text: str, output: Optional[str]) -> None:
    if output is None or output == '-':
        click.echo(text, nl=False)
        return
    with open(output, 'w', encoding='utf-8', newline='') as f:
        f.write(text)


def execute(ctx: click.Context, experiment: Experiment, flags: Dict[str, Any]) -> None:
    """Resolve, run, write and report one subcommand."""
    settings = ctx.obj
    try:
        config = ConfigManager(settings['config'])
        configure_logging(settings['log_level'] or config.get('logging.log_level', 'WARNING'),
                          config.get('logging.log_file'))
        if settings['show_config']:
            config.print_config_summary()
        if not config.validate_runtime_config():
            raise ConfigError("invalid runtime section in config", key='runtime')
        params = resolve_params(experiment, config, flags)
        workers = settings['workers'] or config.get('runtime.workers', default_workers())
        context = RunContext(
            seed=_runtime_int(config, 'seed', settings['seed']),
            workers=max(1, int(workers)),
            fft_chunk=_runtime_int(config, 'fft_chunk', None),
            grid_cap=_runtime_int(config, 'grid_cap', None),
            defaults=dict(config.get('defaults', {})),
            tracker=ProgressTracker(experiment.get_name()),
        )
        check = settings['check'] if settings['check'] is not None else is_check_mode()
        logger.info(f"running {experiment.get_name()} with seed {context.seed}, {context.workers} workers")
        with check_mode(check):
            artifact = experiment.run(params, context)
        artifact.provenance = {
            'experiment': experiment.get_name(),
            'params': params.provenance(),
            'seed': context.seed,
            **artifact.provenance,
        }
        write_artifact(render(artifact), settings['output'])
        if context.tracker.results:
            context.tracker.print_final_report()
        failure = experiment.verdict(artifact)
        if failure is not None:
            raise failure
    except WWLabError as exc:
        key = getattr(exc, 'key', None)
        logger.error(f"{type(exc).__name__}: {exc}" + (f" (key: {key})" if key else ''))
        ctx.exit(exc.exit_code)
    except ValueError as exc:
        logger.error(f"invalid input: {exc}")
        ctx.exit(ConfigError.exit_code)


def _field_options(model) -> list:
    """One click option per schema field, all defaulting to None (unset)."""
    options = []
    for name, info in model.model_fields.items():
        flag = name.replace('_', '-')
        help_text = info.description or ''
        if info.annotation is bool:
            options.append(click.Option([f'--{flag}/--no-{flag}', name], default=None, help=help_text))
        else:
            options.append(click.Option([f'--{flag}', name], default=None, type=str,
                                        help=f"{help_text} [default: {info.default}]"))
    return options


def _make_command(name: str) -> click.Command:
    experiment = get_experiment(name)

    @click.pass_context
    def callback(ctx: click.Context, **flags):
        execute(ctx, experiment, flags)

    return click.Command(name, callback=callback, help=experiment.describe(),
                         params=_field_options(experiment.get_params_model()))


class ExperimentGroup(click.Group):
    """Subcommands built on demand from the experiment registry."""

    def list_commands(self, ctx):
        return list_experiments()

    def get_command(self, ctx, cmd_name):
        if cmd_name not in list_experiments():
            return None
        return _make_command(cmd_name)


@click.group(cls=ExperimentGroup)
@click.option('--config', 'config_file', type=click.Path(dir_okay=False), default=None,
              help='Configuration file (default: config.json when present)')
@click.option('--output', '-o', type=click.Path(dir_okay=False, writable=True), default=None,
              help='Output file (default: stdout)')
@click.option('--seed', type=int, default=None, help='Seed for randomized suites')
@click.option('--workers', type=click.IntRange(min=1), default=None,
              help=f'Worker processes (default: runtime.workers, else ${WORKERS_ENV})')
@click.option('--log-level', type=click.Choice(LOG_LEVELS, case_sensitive=False), default=None,
              help='Logging level on stderr')
@click.option('--check/--no-check', default=None, help='Enable run-time inequality assertions')
@click.option('--show-config', is_flag=True, help='Print the configuration summary to stderr')
@click.pass_context
def main(ctx: click.Context, config_file: Optional[str], output: Optional[str], seed: Optional[int],
         workers: Optional[int], log_level: Optional[str], check: Optional[bool], show_config: bool):
    """Wiener-Wintner lab: exponential sums, Diophantine and multiplier experiments."""
    ctx.obj = {
        'config': config_file,
        'output': output,
        'seed': seed,
        'workers': workers,
        'log_level': log_level,
        'check': check,
        'show_config': show_config,
    }


if __name__ == '__main__':
    main()
