#!/usr/bin/env python3

# Copyright 2026 The rewardevo authors
# This work is licensed under the GNU GPLv3 or later.
# See the COPYING file in the top-level directory.

"""
Experiment front-end

Loads layered INI configurations, runs single or batched seeded simulations
and exports plot-data CSVs from finished runs.

Configuration keys are dotted paths into `SimulationConfig`
(`arena.width`, `food.normal.n_max`, `run.seed`, ...).  They resolve as
defaults < preset < config file < `--set key=value`.
"""

import argparse
import ast
from concurrent.futures import ProcessPoolExecutor
import configparser
from dataclasses import fields, is_dataclass, replace
import logging
import os
from pathlib import Path
import sys
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union, get_args, get_origin, get_type_hints

import numpy as np

from analysis import (ANALYSIS_KINDS, AnalysisSpec, BatchSummaryExporter, ExtinctionTableExporter,
                      NullModelExporter, RunLog, find_runs, make_exporter)
from engine import SimulationConfig, run
from lifecycle import fraction_near_bounds, random_walk_characterization
from utils.misc import ConfigError
from utils.rng import Purpose, RngStreams

OUTPUT_ROOT_VARIABLE = 'REWARDEVO_OUTPUT_ROOT'
RESOLVED_CONFIG = 'config.resolved.ini'
PRESETS_FILE = Path(__file__).resolve().parent / 'presets.ini'

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3

# (e_basic, e_act) settings of the metabolic extinction study
EXTINCTION_SWEEP: Tuple[Tuple[float, float], ...] = (
    (0.002, 2e-5),
    (0.0015, 2e-5),
    (0.001, 4e-5),
    (0.001, 3e-5),
    (0.001, 2e-5),
)


def output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_VARIABLE, 'runs'))


def parse_value(text: str):
    """
    A Python literal if `text` parses as one, the stripped text otherwise.
    """
    text = text.strip()
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def flatten_config(config, prefix: str = '') -> Dict[str, object]:
    """
    Dotted key -> value mapping of a (nested) config dataclass.
    """
    flat = {}
    for f in fields(config):
        value = getattr(config, f.name)
        key = f'{prefix}{f.name}'
        if is_dataclass(value):
            flat.update(flatten_config(value, key + '.'))
        else:
            flat[key] = value
    return flat


def _declared_type(config, name: str):
    """
    Annotated type of a config field, with Optional[X] unwrapped to X.
    """
    hint = get_type_hints(type(config))[name]
    if get_origin(hint) is Union:
        args = [arg for arg in get_args(hint) if arg is not type(None)]
        if len(args) == 1:
            return args[0]
    return hint


def _coerce(declared, current, value, key: str):
    if value is None and current is None:
        return value
    if declared is bool:
        if not isinstance(value, bool):
            raise ConfigError(f'{key} expects a boolean, got {value!r}')
        return value
    if isinstance(value, bool) and declared in (int, float):
        raise ConfigError(f'{key} expects a number, got {value!r}')
    if declared is int:
        if isinstance(value, float) and value.is_integer():
            return int(value)
        if not isinstance(value, int):
            raise ConfigError(f'{key} expects an integer, got {value!r}')
        return value
    if declared is float:
        if not isinstance(value, (int, float)):
            raise ConfigError(f'{key} expects a number, got {value!r}')
        return float(value)
    if isinstance(current, tuple) and isinstance(value, list):
        return tuple(value)
    return value


def apply_overrides(config, overrides: Dict[str, object], prefix: str = ''):
    """
    Copy of a config dataclass with dotted-key overrides applied and validated.

    :raises ConfigError: on unknown keys or invalid values
    """
    names = {f.name for f in fields(config)}
    grouped: Dict[str, Dict[str, object]] = {}
    direct = {}
    for key, value in overrides.items():
        head, _, rest = key.partition('.')
        if head not in names:
            raise ConfigError(f'Unknown configuration key: {prefix}{key}')
        if rest:
            grouped.setdefault(head, {})[rest] = value
        else:
            direct[head] = value
    changes = {}
    for name, value in direct.items():
        current = getattr(config, name)
        if is_dataclass(current):
            raise ConfigError(f'{prefix}{name} is a section, set one of its keys instead')
        changes[name] = _coerce(_declared_type(config, name), current, value, prefix + name)
    for name, nested in grouped.items():
        current = getattr(config, name)
        if not is_dataclass(current):
            raise ConfigError(f'Unknown configuration key: {prefix}{name}.{next(iter(nested))}')
        changes[name] = apply_overrides(current, nested, f'{prefix}{name}.')
    try:
        return replace(config, **changes)
    except ConfigError:
        raise
    except (TypeError, ValueError) as error:
        raise ConfigError(f'Invalid value in section {prefix or "<root>"}: {error}') from error


def read_ini(path) -> Dict[str, object]:
    """
    Dotted-key values of an INI config file; `[a.b]` + `c = 1` gives `a.b.c`.
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path, encoding='utf-8') as config_file:
            parser.read_file(config_file)
    except configparser.Error as error:
        raise ConfigError(f'Cannot parse {path}: {error}') from error
    return {f'{section}.{key}': parse_value(text)
            for section in parser.sections() for key, text in parser.items(section)}


def read_presets(path=PRESETS_FILE) -> Dict[str, Dict[str, object]]:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    with open(path, encoding='utf-8') as presets_file:
        parser.read_file(presets_file)
    return {section: {key: parse_value(text) for key, text in parser.items(section)}
            for section in parser.sections()}


PRESETS = read_presets()


def write_config(config: SimulationConfig, path) -> Path:
    """
    Write the fully resolved config as INI; `load_config(path, preset=None)`
    reads it back to an equal config.
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    for key, value in flatten_config(config).items():
        section, _, name = key.rpartition('.')
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, name, value if isinstance(value, str) else repr(value))
    with open(path, 'w', encoding='utf-8') as config_file:
        parser.write(config_file)
    return Path(path)


def parse_overrides(assignments: Iterable[str]) -> Dict[str, object]:
    overrides = {}
    for assignment in assignments:
        key, sep, text = assignment.partition('=')
        if not sep or not key.strip():
            raise ConfigError(f'Overrides must look like key=value, got {assignment!r}')
        overrides[key.strip()] = parse_value(text)
    return overrides


def load_config(path=None, preset: Optional[str] = 'baseline',
                overrides: Union[Dict[str, object], Sequence[str]] = ()) -> SimulationConfig:
    """
    Resolve a simulation config.

    :param path: optional INI config file
    :param preset: a preset name (see presets.ini), or None
    :param overrides: dotted-key overrides, as a mapping or `key=value` strings
    :raises ConfigError: on unknown presets or keys, unparsable files and invalid values
    """
    layers: Dict[str, object] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f'Unknown preset {preset!r}, expected one of {sorted(PRESETS)}')
        layers.update(PRESETS[preset])
        layers.setdefault('run.label', preset)
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f'Config file {path} does not exist')
        layers.update(read_ini(path))
    if not isinstance(overrides, dict):
        overrides = parse_overrides(overrides)
    layers.update(overrides)
    try:
        return apply_overrides(SimulationConfig(), layers)
    except ConfigError:
        raise
    except (TypeError, ValueError) as error:
        raise ConfigError(str(error)) from error


def run_directory(root, config: SimulationConfig) -> Path:
    return Path(root) / config.run.label / f'seed-{config.run.seed}'


def run_one(config: SimulationConfig, out_dir) -> dict:
    """
    Run one seed into `out_dir`; failures are logged and reported, not raised.

    :return: a summary row
    """
    summary = {'preset': config.run.label, 'seed': config.run.seed, 'e_basic': config.metabolism.e_basic,
               'e_act': config.metabolism.e_act, 'status': 'ok', 'extinct': None, 'final_step': None,
               'n_deaths': None, 'avg_lifetime': None, 'food_per_step': None, 'error': None}
    try:
        os.makedirs(out_dir, exist_ok=True)
        write_config(config, Path(out_dir) / RESOLVED_CONFIG)
        result = run(config, str(out_dir))
    except Exception as error:
        logging.error(f'Run {config.run.label} seed {config.run.seed} failed: {error}')
        summary.update(status='failed', error=str(error))
        return summary
    metrics = result.metrics
    summary.update(extinct=result.extinct, final_step=metrics.final_step, n_deaths=metrics.n_deaths,
                   avg_lifetime=metrics.average_lifetime, food_per_step=metrics.food_consumption_per_step)
    return summary


def run_batch(config: SimulationConfig, seeds: Sequence[int], root=None, jobs: int = 1) -> List[dict]:
    """
    One independent run per seed, optionally in a process pool.

    :return: the summary rows, in seed order
    """
    if not seeds:
        raise ConfigError('A batch needs at least one seed')
    root = output_root() if root is None else Path(root)
    configs = [replace(config, run=replace(config.run, seed=int(seed))) for seed in seeds]
    directories = [run_directory(root, seeded) for seeded in configs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            summaries = list(pool.map(run_one, configs, directories))
    else:
        summaries = [run_one(seeded, directory) for seeded, directory in zip(configs, directories)]
    failed = sum(summary['status'] != 'ok' for summary in summaries)
    extinct = sum(bool(summary['extinct']) for summary in summaries)
    logging.info(f'Batch {config.run.label}: {len(summaries)} runs, {failed} failed, {extinct} extinct')
    return summaries


def sweep_metabolism(config: SimulationConfig, seeds: Sequence[int], root=None, jobs: int = 1,
                     settings: Sequence[Tuple[float, float]] = EXTINCTION_SWEEP) -> List[dict]:
    """
    Batch runs over the (e_basic, e_act) settings of the extinction study.
    """
    root = output_root() if root is None else Path(root)
    summaries = []
    for e_basic, e_act in settings:
        swept = replace(config, metabolism=replace(config.metabolism, e_basic=e_basic, e_act=e_act))
        summaries.extend(run_batch(swept, seeds, root / f'e_basic-{e_basic}_e_act-{e_act}', jobs))
    return summaries


def load_runs(root) -> List[RunLog]:
    runs = [RunLog.load(directory) for directory in find_runs(root)]
    if not runs:
        logging.warning(f'No finished runs found under {root}')
    return runs


def export_analysis(spec: AnalysisSpec, logs: Sequence[RunLog]) -> Path:
    return make_exporter(spec).export(logs)


def null_model(config: SimulationConfig, out_dir) -> Path:
    """
    Export the endpoints of the unselected mutation random walk.
    """
    rng = RngStreams(config.run.seed).stream(0, Purpose.NULL_MODEL)
    endpoints = random_walk_characterization(config.null_model.steps, config.null_model.trials, rng,
                                             config.mutation, config.food.kinds)
    values = np.array([weights.as_array() for weights in endpoints])
    at_bounds = fraction_near_bounds(values, config.mutation)
    logging.info(f'Null model: {len(endpoints)} walks of {config.null_model.steps} steps, '
                 f'{at_bounds:.1%} of weights within 0.1 of the clip bounds')
    return NullModelExporter(out_dir).export(endpoints)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Evolution of reward functions in a foraging arena.')
    parser.add_argument('--verbose', '-v', action='store_true', help='enable debug logging')
    subparsers = parser.add_subparsers(dest='command', required=True)

    def add_config_arguments(subparser):
        subparser.add_argument('--config', '-c', metavar='file', help='an optional INI config file')
        subparser.add_argument('--preset', '-p', default='baseline', choices=sorted(PRESETS),
                               help='experiment preset (defaults to baseline)')
        subparser.add_argument('--set', dest='overrides', action='append', default=[], metavar='key=value',
                               help='override a config key, may be repeated')
        subparser.add_argument('--max-steps', type=int, metavar='steps', help='number of steps to simulate')
        subparser.add_argument('--out', '-o', metavar='dir',
                               help=f'output directory (defaults to ${OUTPUT_ROOT_VARIABLE} or ./runs)')

    run_parser = subparsers.add_parser('run', help='run one seeded simulation')
    add_config_arguments(run_parser)
    run_parser.add_argument('--seed', '-s', type=int, default=None, help='random seed')

    batch_parser = subparsers.add_parser('batch', help='run one simulation per seed')
    add_config_arguments(batch_parser)
    batch_parser.add_argument('--seeds', type=int, nargs='+', required=True, help='random seeds')
    batch_parser.add_argument('--jobs', '-j', type=int, default=1, help='parallel processes')
    batch_parser.add_argument('--sweep-metabolism', action='store_true',
                              help='repeat the batch over the extinction-study metabolic settings')

    analyze_parser = subparsers.add_parser('analyze', help='export plot data from finished runs')
    analyze_parser.add_argument('--kind', required=True, choices=ANALYSIS_KINDS, help='analysis kind')
    analyze_parser.add_argument('--k', type=int, default=5000, help='agents in the last-k scatter')
    analyze_parser.add_argument('--stride', type=int, default=1000, help='sampling period of time series')
    analyze_parser.add_argument('--runs', metavar='dir', help='directory holding finished runs')
    analyze_parser.add_argument('--out', '-o', metavar='dir', help='output directory')

    null_parser = subparsers.add_parser('null-model', help='export the mutation random-walk null model')
    null_parser.add_argument('--config', '-c', metavar='file', help='an optional INI config file')
    null_parser.add_argument('--preset', '-p', default='random-walk-null', choices=sorted(PRESETS))
    null_parser.add_argument('--set', dest='overrides', action='append', default=[], metavar='key=value')
    null_parser.add_argument('--trials', type=int, help='number of independent walks')
    null_parser.add_argument('--steps', type=int, help='mutations per walk')
    null_parser.add_argument('--seed', '-s', type=int, default=None, help='random seed')
    null_parser.add_argument('--out', '-o', metavar='dir', help='output directory')
    return parser


def _resolve(args, extra: Dict[str, object]) -> SimulationConfig:
    overrides = parse_overrides(args.overrides)
    overrides.update({key: value for key, value in extra.items() if value is not None})
    return load_config(args.config, args.preset, overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)

    try:
        if args.command == 'run':
            config = _resolve(args, {'run.seed': args.seed, 'run.max_steps': args.max_steps})
            out_dir = Path(args.out) if args.out else run_directory(output_root(), config)
            summary = run_one(config, out_dir)
            return EXIT_OK if summary['status'] == 'ok' else EXIT_RUNTIME_ERROR
        if args.command == 'batch':
            config = _resolve(args, {'run.max_steps': args.max_steps})
            root = Path(args.out) if args.out else output_root()
            if args.sweep_metabolism:
                config = replace(config, run=replace(config.run, label='extinction-sweep'))
                summaries = sweep_metabolism(config, args.seeds, root, args.jobs)
                ExtinctionTableExporter(root).export(
                    [log for log in load_runs(root) if log.preset == config.run.label])
            else:
                summaries = run_batch(config, args.seeds, root, args.jobs)
            BatchSummaryExporter(root / config.run.label).export(summaries)
            return EXIT_OK if all(summary['status'] == 'ok' for summary in summaries) else EXIT_RUNTIME_ERROR
        if args.command == 'analyze':
            spec = AnalysisSpec(args.kind, args.k, args.stride, args.out or str(output_root() / 'analysis'))
            logs = [] if spec.kind == 'lifecycle_curves' else load_runs(args.runs or output_root())
            export_analysis(spec, logs)
            return EXIT_OK
        if args.command == 'null-model':
            config = _resolve(args, {'null_model.trials': args.trials, 'null_model.steps': args.steps,
                                     'run.seed': args.seed})
            null_model(config, args.out or str(output_root() / 'null-model'))
            return EXIT_OK
    except ConfigError as error:
        logging.error(f'Configuration error: {error}')
        return EXIT_CONFIG_ERROR
    except Exception as error:
        logging.exception(f'{args.command} failed: {error}')
        return EXIT_RUNTIME_ERROR
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
