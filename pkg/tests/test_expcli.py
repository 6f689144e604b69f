# Copyright 2026 The rewardevo authors
# This work is licensed under the GNU GPLv3 or later.
# See the COPYING file in the top-level directory.

import csv
import logging
import os
import tempfile
import unittest
from unittest.mock import patch

import engine
from expcli import (EXIT_CONFIG_ERROR, EXIT_OK, EXIT_RUNTIME_ERROR, PRESETS, RESOLVED_CONFIG, load_config,
                    main, parse_overrides, run_batch, sweep_metabolism, write_config)
from utils.misc import ConfigError

SMALL = {
    'arena.width': 200.0,
    'arena.height': 150.0,
    'food.normal.n_max': 15,
    'population.initial': 3,
    'population.capacity': 8,
    'rl.hidden_size': 8,
    'rl.rollout_steps': 8,
    'rl.minibatch': 4,
    'rl.epochs': 1,
    'run.max_steps': 3,
    'run.checkpoint_every': 0,
}


def small_arguments():
    arguments = []
    for key, value in SMALL.items():
        arguments += ['--set', f'{key}={value!r}']
    return arguments


def flaky_run(config, out_dir=None):
    if config.run.seed == 1:
        raise RuntimeError('boom')
    return engine.run(config, out_dir)


class TestLoadConfig(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmpdir.cleanup()

    def write_ini(self, content):
        path = os.path.join(self.tmpdir.name, 'config.ini')
        with open(path, 'w', encoding='utf-8') as config_file:
            config_file.write(content)
        return path

    def test_baseline(self):
        config = load_config()
        self.assertEqual((config.arena.width, config.arena.height), (480.0, 360.0))
        self.assertEqual(config.food.normal.n_max, 100)
        self.assertEqual(config.food.normal.growth_rate, 0.02)
        self.assertEqual(config.reproduction.eta, 0.4)
        self.assertEqual(config.metabolism.e_basic, 0.001)
        self.assertEqual(config.metabolism.e_act, 2e-5)
        self.assertEqual(config.run.label, 'baseline')

    def test_poison_weight_override(self):
        config = load_config(preset='poison', overrides=['metabolism.e_poison=-0.4'])
        self.assertEqual(config.metabolism.e_poison, -0.4)
        self.assertEqual(config.food.kinds, ('normal', 'poison'))
        self.assertEqual(load_config(preset='poison').metabolism.e_poison, -0.6)

    def test_negative_n_max(self):
        with self.assertRaises(ConfigError) as cm:
            load_config(overrides={'food.normal.n_max': -5})
        self.assertIn('n_max', str(cm.exception))

    def test_unknown_key(self):
        with self.assertRaises(ConfigError) as cm:
            load_config(overrides=['arena.depth=3'])
        self.assertIn('arena.depth', str(cm.exception))
        self.assertRaises(ConfigError, load_config, preset='tiny')

    def test_conflicting_food_kinds(self):
        self.assertRaises(ConfigError, load_config, overrides=["food.kinds=('normal', 'poor', 'poison')"])

    def test_boolean_keys(self):
        self.assertRaises(ConfigError, load_config, overrides=['run.check_energy_ledger=1'])
        self.assertTrue(load_config(overrides=['run.check_energy_ledger=True']).run.check_energy_ledger)

    def test_integer_keys(self):
        for key in ('population.initial', 'arena.n_rays', 'rl.rollout_steps', 'food.normal.initial'):
            with self.assertRaises(ConfigError) as cm:
                load_config(overrides={key: 2.5})
            self.assertIn(key, str(cm.exception))
        self.assertRaises(ConfigError, load_config, overrides=['population.initial="ten"'])
        self.assertRaises(ConfigError, load_config, overrides=['population.initial=True'])
        config = load_config(overrides={'population.initial': 10.0})
        self.assertEqual(config.population.initial, 10)
        self.assertIsInstance(config.population.initial, int)
        self.assertRaises(ConfigError, load_config, overrides=['metabolism.e_basic="high"'])

    def test_layers(self):
        path = self.write_ini('[arena]\nwidth = 400\n\n[food.normal]\nn_max = 80\n')
        config = load_config(path, preset='small')
        self.assertEqual((config.arena.width, config.arena.height), (400.0, 360.0))
        self.assertIsInstance(config.arena.width, float)
        self.assertEqual(config.food.normal.n_max, 80)
        self.assertEqual(load_config(path, overrides=['arena.width=420']).arena.width, 420.0)

    def test_missing_or_broken_file(self):
        self.assertRaises(ConfigError, load_config, os.path.join(self.tmpdir.name, 'missing.ini'))
        self.assertRaises(ConfigError, load_config, self.write_ini('width = 400\n'))

    def test_resolved_config_round_trip(self):
        config = load_config(preset='poor', overrides=['run.seed=7', 'birth.orientation="printed"'])
        path = write_config(config, os.path.join(self.tmpdir.name, RESOLVED_CONFIG))
        self.assertEqual(load_config(path, preset=None), config)

    def test_presets_resolve(self):
        self.assertEqual(set(PRESETS), {'baseline', 'small', 'large', 'centered', 'relocation', 'poor',
                                        'poison', 'random-walk-null'})
        for name in PRESETS:
            self.assertEqual(load_config(preset=name).run.label, name)
        self.assertEqual(load_config(preset='relocation').food.distribution, 'relocating')

    def test_parse_overrides(self):
        self.assertEqual(parse_overrides(['a.b=1', 'c.d = text']), {'a.b': 1, 'c.d': 'text'})
        self.assertRaises(ConfigError, parse_overrides, ['arena.width'])


class TestBatch(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.root = self.tmpdir.name
        self.config = load_config(overrides=SMALL)

    def tearDown(self):
        self.tmpdir.cleanup()

    def test_failures_are_isolated(self):
        with patch('expcli.run', side_effect=flaky_run):
            with self.assertLogs('root', level=logging.ERROR) as cm:
                summaries = run_batch(self.config, [0, 1, 2], self.root)
        self.assertEqual([summary['status'] for summary in summaries], ['ok', 'failed', 'ok'])
        self.assertEqual(summaries[1]['error'], 'boom')
        self.assertIn('seed 1 failed', cm.output[0])
        for seed in (0, 2):
            self.assertTrue(os.path.exists(os.path.join(self.root, 'baseline', f'seed-{seed}', 'events.jsonl')))
            self.assertTrue(os.path.exists(os.path.join(self.root, 'baseline', f'seed-{seed}', RESOLVED_CONFIG)))

    def test_rerun_is_identical(self):
        run_batch(self.config, [5], os.path.join(self.root, 'first'))
        run_batch(self.config, [5], os.path.join(self.root, 'second'))
        paths = [os.path.join(self.root, name, 'baseline', 'seed-5', 'events.jsonl') for name in ('first', 'second')]
        with open(paths[0], 'rb') as first, open(paths[1], 'rb') as second:
            self.assertEqual(first.read(), second.read())

    def test_no_seeds(self):
        self.assertRaises(ConfigError, run_batch, self.config, [], self.root)

    def test_sweep_metabolism(self):
        summaries = sweep_metabolism(self.config, [0], self.root, settings=((0.002, 2e-5), (0.001, 2e-5)))
        self.assertEqual([(s['e_basic'], s['e_act']) for s in summaries], [(0.002, 2e-5), (0.001, 2e-5)])
        self.assertTrue(all(summary['status'] == 'ok' for summary in summaries))


class TestMain(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.root = self.tmpdir.name

    def tearDown(self):
        self.tmpdir.cleanup()

    def test_config_error_exit_code(self):
        with self.assertLogs('root', level=logging.ERROR):
            self.assertEqual(main(['run', '--set', 'arena.depth=1', '--out', self.root]), EXIT_CONFIG_ERROR)
        with self.assertLogs('root', level=logging.ERROR) as cm:
            self.assertEqual(main(['run', '--set', 'population.initial=2.5', '--out', self.root]),
                             EXIT_CONFIG_ERROR)
        self.assertIn('population.initial expects an integer', cm.output[-1])

    def test_run_and_analyze(self):
        out_dir = os.path.join(self.root, 'baseline', 'seed-4')
        self.assertEqual(main(['run', '--seed', '4', '--out', out_dir] + small_arguments()), EXIT_OK)
        for name in ('events.jsonl', 'metrics.json', RESOLVED_CONFIG):
            self.assertTrue(os.path.exists(os.path.join(out_dir, name)))

        analysis_dir = os.path.join(self.root, 'analysis')
        self.assertEqual(main(['analyze', '--kind', 'metrics_table', '--runs', self.root, '--out', analysis_dir]),
                         EXIT_OK)
        with open(os.path.join(analysis_dir, 'metrics_table.csv'), newline='', encoding='utf-8') as csv_file:
            rows = list(csv.DictReader(csv_file))
        self.assertEqual([(row['preset'], row['seed']) for row in rows], [('baseline', '4')])

    def test_batch_with_failure(self):
        with patch('expcli.run', side_effect=flaky_run):
            with self.assertLogs('root', level=logging.ERROR):
                code = main(['batch', '--seeds', '0', '1', '--out', self.root] + small_arguments())
        self.assertEqual(code, EXIT_RUNTIME_ERROR)
        with open(os.path.join(self.root, 'baseline', 'summary.csv'), newline='', encoding='utf-8') as csv_file:
            self.assertEqual([row['status'] for row in csv.DictReader(csv_file)], ['ok', 'failed'])

    def test_null_model(self):
        out_dir = os.path.join(self.root, 'null')
        self.assertEqual(main(['null-model', '--trials', '20', '--steps', '50', '--out', out_dir]), EXIT_OK)
        with open(os.path.join(out_dir, 'null_model.csv'), newline='', encoding='utf-8') as csv_file:
            self.assertEqual(len(list(csv.DictReader(csv_file))), 20)

    def test_lifecycle_curves(self):
        out_dir = os.path.join(self.root, 'curves')
        self.assertEqual(main(['analyze', '--kind', 'lifecycle_curves', '--out', out_dir]), EXIT_OK)
        self.assertTrue(os.path.exists(os.path.join(out_dir, 'lifecycle_curves.csv')))
