# Copyright 2026 The rewardevo authors
# This work is licensed under the GNU GPLv3 or later.
# See the COPYING file in the top-level directory.

from datetime import datetime
import logging
import os
import tempfile
import time
import unittest

from checkpointstore import FORMAT_VERSION, CheckpointStore


class TestCheckpointStore(unittest.TestCase):

    def setUp(self):
        dbfile, filepath = tempfile.mkstemp(suffix='.db')
        os.close(dbfile)
        self.store = CheckpointStore(filepath)
        for step in range(100, 1000, 100):
            self.assertTrue(self.store.add('baseline-seed0', step, f'state at step {step}'.encode()))
        self.assertTrue(self.store.add('baseline-seed1', 100, b'other run'))

    def tearDown(self):
        dbfile = self.store.dbfile
        self.store.close()
        os.remove(dbfile)

    def test_update_checkpoint_timestamp(self):
        checkpoint = self.store.load('baseline-seed0', 300)
        timestamp = checkpoint.timestamp
        time.sleep(0.1)
        self.assertTrue(self.store.add('baseline-seed0', 300, b'new state'))
        checkpoint = self.store.load('baseline-seed0', 300)
        self.assertGreater(datetime.fromisoformat(checkpoint.timestamp),
                           datetime.fromisoformat(timestamp))
        self.assertEqual(checkpoint.decode_content(), b'new state')
        self.assertEqual(len(list(self.store.search_by_run('baseline-seed0'))), 9)

    def test_load(self):
        checkpoint = self.store.load('baseline-seed0', 500)
        self.assertEqual(checkpoint.decode_content(), b'state at step 500')
        self.assertEqual(checkpoint.version, FORMAT_VERSION)
        self.assertTrue(self.store.verify(checkpoint))
        self.assertIsNone(self.store.load('baseline-seed0', 550))

    def test_latest(self):
        self.assertEqual(self.store.latest('baseline-seed0').step, 900)
        self.assertEqual(self.store.latest('baseline-seed1').step, 100)
        self.assertIsNone(self.store.latest('poor-seed0'))

    def test_search_by_run(self):
        checkpoints = list(self.store.search_by_run('baseline-seed0'))
        self.assertEqual([c.step for c in checkpoints], list(range(100, 1000, 100)))
        self.assertEqual(len(list(self.store.search_by_run('baseline'))), 10)
        self.assertEqual(len(list(self.store.search_by_run('large'))), 0)

    def test_steps(self):
        self.assertEqual(self.store.steps('baseline-seed0'), list(range(100, 1000, 100)))
        self.assertEqual(self.store.steps('baseline'), [])

    def test_replaced_state_is_logged(self):
        with self.assertLogs('checkpointstore', level=logging.INFO) as cm:
            self.assertTrue(self.store.add('baseline-seed1', 100, b'newer'))
        self.assertIn('Replaced checkpoint of baseline-seed1 at step 100', cm.output[0])

    def test_exists(self):
        self.assertTrue(self.store.exists('baseline-seed1', 100))
        self.assertFalse(self.store.exists('baseline-seed1', 200))

    def test_tampered_checksum(self):
        checkpoint = self.store.load('baseline-seed0', 100)
        self.assertFalse(self.store.verify(checkpoint._replace(checksum='sha256:0')))
        self.assertTrue(checkpoint.checksum.startswith('sha256:'))

    def test_invalid_parameters(self):
        # empty run id
        with self.assertLogs('root', level=logging.ERROR) as cm:
            self.assertFalse(self.store.add('', 1, b'state'))
        self.assertEqual(cm.records.pop().msg, 'Storing a checkpoint requires a run id')

        # negative step
        with self.assertLogs('root', level=logging.ERROR) as cm:
            self.assertFalse(self.store.add('run', -1, b'state'))
        self.assertEqual(cm.records.pop().msg, 'Invalid checkpoint step: -1')

        # empty content
        with self.assertLogs('root', level=logging.ERROR) as cm:
            self.assertFalse(self.store.add('run', 1, b''))
        self.assertEqual(cm.records.pop().msg, 'Empty checkpoint contents')

        # invalid timestamps
        with self.assertLogs('root', level=logging.ERROR) as cm:
            self.assertFalse(self.store.add('run', 1, b'state', 'today'))
            self.assertFalse(self.store.add('run', 1, b'state', 'yesterday'))
        self.assertEqual(cm.records.pop(0).msg, 'Invalid timestamp format: today (expects ISO 8601)')
        self.assertEqual(cm.records.pop().msg, 'Invalid timestamp format: yesterday (expects ISO 8601)')

    def test_valid_timestamp(self):
        self.assertTrue(
            self.store.add('run', 1, b'state', datetime(2023, 11, 6, 15, 42, 6).isoformat())
        )
        self.assertEqual(self.store.load('run', 1).timestamp, '2023-11-06 15:42:06')
