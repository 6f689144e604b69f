# Copyright 2026 The rewardevo authors
# This work is licensed under the GNU GPLv3 or later.
# See the COPYING file in the top-level directory.

"""
Plot-data exporters, one CSV per analysis kind.

Column layouts:

    reward_scatter_last_k  seed, agent_id, birth_step, w_food, w_act[, w_poor | w_poison]
    reward_dynamics        seed, step, n_alive, mean_w_food, mean_w_act[, ...]
                           (seed "pooled" rows average the per-seed means)
    metrics_table          preset, seed, n_deaths, avg_lifetime, food_per_step,
                           food_per_step_<kind>..., extinct
    extinction_table       preset, e_basic, e_act, runs, extinct_runs, extinction_rate
    population_curve       seed, step, population
    lifecycle_curves       age, energy, hazard, survival, birth
    null_model             trial, w_food, w_act[, w_poor | w_poison]
"""

from collections import OrderedDict
from dataclasses import dataclass
import json
import os
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from engine import compute_metrics
from eventlog import EventFile, EventKind, EventRecord
from exporter import AnalysisExporter
from lifecycle import BirthParams, HazardParams, birth_probability, hazard_curve, survival_curve
from reward import RewardParams
from utils.misc import require

ANALYSIS_KINDS = ('reward_scatter_last_k', 'reward_dynamics', 'metrics_table', 'extinction_table',
                  'population_curve', 'lifecycle_curves')
WEIGHT_ORDER = ('w_food', 'w_act', 'w_poor', 'w_poison')
FOOD_KIND_ORDER = ('normal', 'poor', 'poison')
CURVE_ENERGIES = (0.0, 10.0, 20.0)


@dataclass(frozen=True)
class AnalysisSpec:
    kind: str
    k: int = 5000
    stride: int = 1000
    output_dir: str = '.'

    def __post_init__(self):
        require(self.kind in ANALYSIS_KINDS, f'analysis kind must be one of {ANALYSIS_KINDS}, got {self.kind!r}')
        require(self.k > 0, f'analysis k must be > 0, got {self.k}')
        require(self.stride >= 1, f'analysis stride must be >= 1, got {self.stride}')


@dataclass
class RunLog:
    """
    Event log of one finished run, with the run facts stored next to it.
    Loaded runs read their log file again on every pass over `records`.
    """
    seed: int
    preset: str
    records: Iterable[EventRecord]
    final_step: int
    extinct: bool = False
    e_basic: Optional[float] = None
    e_act: Optional[float] = None

    @classmethod
    def load(cls, run_dir) -> 'RunLog':
        run_dir = Path(run_dir)
        with open(run_dir / 'metrics.json', encoding='utf-8') as metrics_file:
            facts = json.load(metrics_file)
        return cls(seed=facts['seed'], preset=facts['label'], records=EventFile(run_dir / 'events.jsonl'),
                   final_step=facts['final_step'], extinct=facts['extinct'],
                   e_basic=facts.get('e_basic'), e_act=facts.get('e_act'))


def find_runs(root) -> List[Path]:
    """
    Every directory below `root` holding a finished run, sorted by path.
    """
    found = []
    for directory, _, files in os.walk(root):
        if 'events.jsonl' in files and 'metrics.json' in files:
            found.append(Path(directory))
    return sorted(found)


def ordered_weight_names(names) -> List[str]:
    return [name for name in WEIGHT_ORDER if name in set(names)]


def _weight_names_of(runs: Sequence[RunLog]) -> List[str]:
    names = set()
    for run in runs:
        for record in run.records:
            if record.kind == EventKind.BIRTH:
                names.update(record.payload['weights'])
    return ordered_weight_names(names)


class RewardScatterExporter(AnalysisExporter):

    """
    Reward weights of the last k agents born in each run.
    """

    filename = 'reward_scatter_last_k.csv'

    def __init__(self, output_dir, k: int = 5000):
        super().__init__('reward_scatter_last_k', output_dir)
        self.k = k

    def export(self, runs: Sequence[RunLog]) -> Path:
        names = _weight_names_of(runs)
        rows = []
        for run in runs:
            births = [record for record in run.records if record.kind == EventKind.BIRTH]
            if len(births) < self.k:
                self.logger.warning(f'Run with seed {run.seed} has only {len(births)} births, '
                                    f'exporting all of them instead of the last {self.k}')
            for record in births[-self.k:]:
                weights = record.payload['weights']
                rows.append([run.seed, record.agent_id, record.step] + [weights.get(name) for name in names])
        self.write_rows(['seed', 'agent_id', 'birth_step'] + names, rows)
        return self.path


class RewardDynamicsExporter(AnalysisExporter):

    """
    Mean reward weights over the agents alive at every `stride`-th step.
    """

    filename = 'reward_dynamics.csv'

    def __init__(self, output_dir, stride: int = 1000):
        super().__init__('reward_dynamics', output_dir)
        self.stride = stride

    def export(self, runs: Sequence[RunLog]) -> Path:
        names = _weight_names_of(runs)
        rows = []
        pooled = OrderedDict()
        for run in runs:
            metrics = compute_metrics(run.records, run.final_step, self.stride)
            for step, n_alive, means in metrics.weight_series:
                rows.append([run.seed, step, n_alive] + [means.get(name) for name in names])
                entry = pooled.setdefault(step, [0, []])
                entry[0] += n_alive
                if n_alive:
                    entry[1].append([np.nan if means.get(name) is None else means[name] for name in names])
        for step in sorted(pooled):
            n_alive, seed_means = pooled[step]
            if seed_means:
                averages = np.nanmean(np.array(seed_means), axis=0) if names else []
                values = [None if np.isnan(value) else float(value) for value in averages]
            else:
                values = [None] * len(names)
            rows.append(['pooled', step, n_alive] + values)
        self.write_rows(['seed', 'step', 'n_alive'] + [f'mean_{name}' for name in names], rows)
        return self.path


class MetricsTableExporter(AnalysisExporter):

    """
    Average lifetime and food consumption per agent-step of every run.
    """

    filename = 'metrics_table.csv'

    def __init__(self, output_dir):
        super().__init__('metrics_table', output_dir)

    def export(self, runs: Sequence[RunLog]) -> Path:
        summaries = [(run, compute_metrics(run.records, run.final_step, max(run.final_step, 1)))
                     for run in runs]
        kinds = [kind for kind in FOOD_KIND_ORDER
                 if any(kind in metrics.consumption_by_kind for _, metrics in summaries)]
        rows = []
        for run, metrics in summaries:
            rows.append([run.preset, run.seed, metrics.n_deaths, metrics.average_lifetime,
                         metrics.food_consumption_per_step]
                        + [metrics.consumption_by_kind.get(kind, 0.0 if metrics.total_agent_steps else None)
                           for kind in kinds]
                        + [int(run.extinct)])
        self.write_rows(['preset', 'seed', 'n_deaths', 'avg_lifetime', 'food_per_step']
                        + [f'food_per_step_{kind}' for kind in kinds] + ['extinct'], rows)
        return self.path


class ExtinctionTableExporter(AnalysisExporter):

    """
    Fraction of extinct runs per preset and metabolic setting.
    """

    filename = 'extinction_table.csv'

    def __init__(self, output_dir):
        super().__init__('extinction_table', output_dir)

    def export(self, runs: Sequence[RunLog]) -> Path:
        groups = OrderedDict()
        for run in runs:
            groups.setdefault((run.preset, run.e_basic, run.e_act), []).append(run.extinct)
        rows = []
        for (preset, e_basic, e_act), flags in groups.items():
            extinct = sum(bool(flag) for flag in flags)
            rows.append([preset, e_basic, e_act, len(flags), extinct, extinct / len(flags)])
        self.write_rows(['preset', 'e_basic', 'e_act', 'runs', 'extinct_runs', 'extinction_rate'], rows)
        return self.path


class PopulationCurveExporter(AnalysisExporter):

    filename = 'population_curve.csv'

    def __init__(self, output_dir, stride: int = 1000):
        super().__init__('population_curve', output_dir)
        self.stride = stride

    def export(self, runs: Sequence[RunLog]) -> Path:
        rows = []
        for run in runs:
            metrics = compute_metrics(run.records, run.final_step, self.stride)
            rows.extend([run.seed, step, population] for step, population in metrics.population_series)
        self.write_rows(['seed', 'step', 'population'], rows)
        return self.path


class LifecycleCurvesExporter(AnalysisExporter):

    """
    Hazard, survival and birth functions on an age grid, at a few energies.
    """

    filename = 'lifecycle_curves.csv'

    def __init__(self, output_dir, hazard_params: HazardParams = HazardParams(),
                 birth_params: BirthParams = BirthParams(), max_age: int = 1_000_000, points: int = 201):
        super().__init__('lifecycle_curves', output_dir)
        self.hazard_params = hazard_params
        self.birth_params = birth_params
        self.ages = np.linspace(0, max_age, points)

    def export(self, runs: Sequence[RunLog] = ()) -> Path:
        rows = []
        for energy in CURVE_ENERGIES:
            hazards = hazard_curve(self.ages, energy, self.hazard_params)
            survivals = survival_curve(self.ages, energy, self.hazard_params)
            birth = birth_probability(energy, self.birth_params)
            rows.extend([float(age), energy, float(h), float(s), birth]
                        for age, h, s in zip(self.ages, hazards, survivals))
        self.write_rows(['age', 'energy', 'hazard', 'survival', 'birth'], rows)
        return self.path


class NullModelExporter(AnalysisExporter):

    """
    Endpoints of the unselected mutation random walk.
    """

    filename = 'null_model.csv'

    def __init__(self, output_dir):
        super().__init__('null_model', output_dir)

    def export(self, endpoints: Sequence[RewardParams]) -> Path:
        names = ordered_weight_names(endpoints[0].names) if endpoints else ['w_food', 'w_act']
        rows = ([trial] + [getattr(weights, name) for name in names] for trial, weights in enumerate(endpoints))
        self.write_rows(['trial'] + names, rows)
        return self.path


def make_exporter(spec: AnalysisSpec) -> AnalysisExporter:
    if spec.kind == 'reward_scatter_last_k':
        return RewardScatterExporter(spec.output_dir, spec.k)
    if spec.kind == 'reward_dynamics':
        return RewardDynamicsExporter(spec.output_dir, spec.stride)
    if spec.kind == 'metrics_table':
        return MetricsTableExporter(spec.output_dir)
    if spec.kind == 'extinction_table':
        return ExtinctionTableExporter(spec.output_dir)
    if spec.kind == 'population_curve':
        return PopulationCurveExporter(spec.output_dir, spec.stride)
    return LifecycleCurvesExporter(spec.output_dir)


class BatchSummaryExporter(AnalysisExporter):

    """
    One row per seed of a batch, failed runs included.
    """

    filename = 'summary.csv'
    columns = ('preset', 'seed', 'e_basic', 'e_act', 'status', 'extinct', 'final_step', 'n_deaths',
               'avg_lifetime', 'food_per_step', 'error')

    def __init__(self, output_dir):
        super().__init__('batch_summary', output_dir)

    def export(self, summaries: Sequence[dict]) -> Path:
        self.write_rows(self.columns, ([summary.get(column) for column in self.columns]
                                       for summary in summaries))
        return self.path
