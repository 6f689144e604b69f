# Copyright 2026 The rewardevo authors
# This work is licensed under the GNU GPLv3 or later.
# See the COPYING file in the top-level directory.

import csv
import os
import tempfile
import unittest

import numpy as np

from analysis import (AnalysisSpec, BatchSummaryExporter, ExtinctionTableExporter, LifecycleCurvesExporter,
                      MetricsTableExporter, NullModelExporter, PopulationCurveExporter, RewardDynamicsExporter,
                      RewardScatterExporter, RunLog, find_runs, make_exporter)
from arena import ArenaConfig, FoodConfig, FoodSpec
from engine import PopulationConfig, RunConfig, SimulationConfig, run
from eventlog import EventKind, EventRecord
from lifecycle import random_walk_characterization
from rl import PpoHyper
from utils.misc import ConfigError


def birth(step, agent_id, w_food, w_act=0.5):
    return EventRecord(step, EventKind.BIRTH, agent_id,
                       {'parent_id': None, 'energy': 20.0, 'weights': {'w_food': w_food, 'w_act': w_act}})


def death(step, agent_id, age):
    return EventRecord(step, EventKind.DEATH, agent_id, {'energy': 0.0, 'age': age, 'birth_step': step - age})


def eat(step, agent_id, kind='normal'):
    return EventRecord(step, EventKind.EAT, agent_id, {'food_id': step, 'food_kind': kind})


def read_csv(path):
    with open(path, newline='', encoding='utf-8') as csv_file:
        return list(csv.DictReader(csv_file))


class AnalysisTestCase(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.output_dir = self.tmpdir.name
        self.runs = [
            RunLog(seed=0, preset='baseline', final_step=300, e_basic=0.001, e_act=2e-5,
                   records=[birth(0, 0, 1.0), birth(0, 1, 1.0), birth(100, 2, 1.0), eat(150, 2),
                            death(200, 0, 200)]),
            RunLog(seed=1, preset='baseline', final_step=50, extinct=True, e_basic=0.001, e_act=2e-5,
                   records=[birth(0, 0, 3.0, -1.0), eat(10, 0, 'poor'), death(50, 0, 50)]),
        ]

    def tearDown(self):
        self.tmpdir.cleanup()


class TestRewardScatter(AnalysisTestCase):

    def test_fewer_births_than_k(self):
        exporter = RewardScatterExporter(self.output_dir, k=5)
        with self.assertLogs('reward_scatter_last_k', level='WARNING') as cm:
            path = exporter.export(self.runs[:1])
        self.assertIn('has only 3 births', cm.output[0])
        rows = read_csv(path)
        self.assertEqual(len(rows), 3)
        self.assertEqual(list(rows[0]), ['seed', 'agent_id', 'birth_step', 'w_food', 'w_act'])

    def test_last_k(self):
        rows = read_csv(RewardScatterExporter(self.output_dir, k=2).export(self.runs[:1]))
        self.assertEqual([row['agent_id'] for row in rows], ['1', '2'])


class TestRewardDynamics(AnalysisTestCase):

    def test_constant_weights(self):
        rows = read_csv(RewardDynamicsExporter(self.output_dir, stride=100).export(self.runs[:1]))
        self.assertEqual(len(rows), 3 + 3)
        self.assertTrue(all(float(row['mean_w_food']) == 1.0 for row in rows))
        self.assertEqual([row['n_alive'] for row in rows[:3]], ['2', '3', '2'])

    def test_pooled_rows(self):
        rows = read_csv(RewardDynamicsExporter(self.output_dir, stride=100).export(self.runs))
        self.assertEqual(len(rows), 3 + 1 + 3)
        pooled = [row for row in rows if row['seed'] == 'pooled']
        self.assertEqual([row['step'] for row in pooled], ['0', '100', '200'])
        self.assertEqual(float(pooled[0]['mean_w_food']), 2.0)
        self.assertEqual(pooled[0]['n_alive'], '3')
        self.assertEqual(float(pooled[1]['mean_w_food']), 1.0)


class TestTables(AnalysisTestCase):

    def test_metrics_table(self):
        rows = read_csv(MetricsTableExporter(self.output_dir).export(self.runs))
        self.assertEqual(len(rows), 2)
        self.assertEqual(list(rows[0]), ['preset', 'seed', 'n_deaths', 'avg_lifetime', 'food_per_step',
                                         'food_per_step_normal', 'food_per_step_poor', 'extinct'])
        self.assertEqual(float(rows[0]['avg_lifetime']), 200.0)
        self.assertAlmostEqual(float(rows[0]['food_per_step']), 1 / 701)
        self.assertEqual(float(rows[0]['food_per_step_poor']), 0.0)
        self.assertAlmostEqual(float(rows[1]['food_per_step_poor']), 1 / 51)
        self.assertEqual([row['extinct'] for row in rows], ['0', '1'])

    def test_extinction_table(self):
        runs = self.runs + [RunLog(seed=2, preset='baseline', records=[], final_step=10, extinct=False,
                                   e_basic=0.002, e_act=2e-5)]
        rows = read_csv(ExtinctionTableExporter(self.output_dir).export(runs))
        self.assertEqual(len(rows), 2)
        self.assertEqual((rows[0]['runs'], rows[0]['extinct_runs'], float(rows[0]['extinction_rate'])),
                         ('2', '1', 0.5))
        self.assertEqual(float(rows[1]['extinction_rate']), 0.0)

    def test_population_curve(self):
        rows = read_csv(PopulationCurveExporter(self.output_dir, stride=100).export(self.runs))
        self.assertEqual([(row['seed'], row['population']) for row in rows],
                         [('0', '2'), ('0', '3'), ('0', '2'), ('1', '1')])

    def test_batch_summary(self):
        summaries = [{'preset': 'baseline', 'seed': 0, 'status': 'ok', 'extinct': False},
                     {'preset': 'baseline', 'seed': 1, 'status': 'failed', 'error': 'boom'}]
        rows = read_csv(BatchSummaryExporter(self.output_dir).export(summaries))
        self.assertEqual(len(rows), 2)
        self.assertEqual(rows[1]['error'], 'boom')
        self.assertEqual(rows[1]['final_step'], '')


class TestCurves(AnalysisTestCase):

    def test_lifecycle_curves(self):
        rows = read_csv(LifecycleCurvesExporter(self.output_dir).export())
        self.assertEqual(len(rows), 3 * 201)
        self.assertEqual(float(rows[0]['survival']), 1.0)
        self.assertEqual(float(rows[-1]['age']), 1e6)
        self.assertAlmostEqual(float(rows[0]['birth']), 2e-4, places=12)
        survivals = [float(row['survival']) for row in rows if row['energy'] == '20.0']
        self.assertTrue(np.all(np.diff(survivals) <= 0))

    def test_null_model(self):
        endpoints = random_walk_characterization(10, 7, np.random.default_rng(0))
        rows = read_csv(NullModelExporter(self.output_dir).export(endpoints))
        self.assertEqual(len(rows), 7)
        self.assertEqual(list(rows[0]), ['trial', 'w_food', 'w_act'])
        self.assertTrue(all(-10.0 <= float(row['w_food']) <= 10.0 for row in rows))


class TestSpec(unittest.TestCase):

    def test_make_exporter(self):
        with tempfile.TemporaryDirectory() as output_dir:
            exporter = make_exporter(AnalysisSpec('reward_dynamics', stride=50, output_dir=output_dir))
            self.assertIsInstance(exporter, RewardDynamicsExporter)
            self.assertEqual(exporter.stride, 50)
            self.assertIsInstance(make_exporter(AnalysisSpec('lifecycle_curves', output_dir=output_dir)),
                                  LifecycleCurvesExporter)

    def test_invalid_spec(self):
        self.assertRaises(ConfigError, AnalysisSpec, 'histogram')
        self.assertRaises(ConfigError, AnalysisSpec, 'reward_dynamics', k=0)


class TestRunExports(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        config = SimulationConfig(
            arena=ArenaConfig(width=200.0, height=150.0),
            food=FoodConfig(normal=FoodSpec(n_max=15, growth_rate=0.05)),
            population=PopulationConfig(initial=4, capacity=8),
            rl=PpoHyper(hidden_size=8, epochs=1, minibatch=4, rollout_steps=8),
            run=RunConfig(seed=2, max_steps=30, checkpoint_every=0),
        )
        self.result = run(config, os.path.join(self.tmpdir.name, 'baseline', 'seed-2'))

    def tearDown(self):
        self.tmpdir.cleanup()

    def test_load_and_export(self):
        directories = find_runs(self.tmpdir.name)
        self.assertEqual(len(directories), 1)
        run_log = RunLog.load(directories[0])
        self.assertEqual((run_log.seed, run_log.preset), (2, 'baseline'))
        self.assertEqual(run_log.final_step, self.result.simulation.step_count)
        self.assertEqual(len(run_log.records), len(self.result.records))

        output_dir = os.path.join(self.tmpdir.name, 'analysis')
        births = sum(1 for record in run_log.records if record.kind == EventKind.BIRTH)
        scatter = read_csv(RewardScatterExporter(output_dir, k=1000).export([run_log]))
        self.assertEqual(len(scatter), births)
        dynamics = read_csv(RewardDynamicsExporter(output_dir, stride=10).export([run_log]))
        samples = len(range(0, run_log.final_step, 10))
        self.assertEqual(len(dynamics), 2 * samples)
        self.assertEqual(list(dynamics[0]), ['seed', 'step', 'n_alive', 'mean_w_food', 'mean_w_act'])
        metrics = read_csv(MetricsTableExporter(output_dir).export([run_log]))
        self.assertEqual(len(metrics), 1)
