# Copyright 2026 The rewardevo authors
# This work is licensed under the GNU GPLv3 or later.
# See the COPYING file in the top-level directory.

import logging
import os
import pickle
import tempfile
import unittest

import numpy as np

from arena import FoodTag
from eventlog import EventFile, EventKind, EventLog, EventRecord


class TestEventRecord(unittest.TestCase):

    def test_canonical_json(self):
        record = EventRecord(3, EventKind.EAT, 7, {'food_kind': FoodTag.POOR, 'food_id': np.int64(12)})
        self.assertEqual(record.to_json(),
                         '{"agent_id":7,"kind":"eat","payload":{"food_id":12,"food_kind":"poor"},"step":3}')

    def test_numpy_values(self):
        record = EventRecord(0, EventKind.RELOCATION, None, {'corner': np.int32(2), 'flag': np.bool_(True),
                                                              'position': np.array([1.5, 2.0])})
        parsed = EventRecord.from_json(record.to_json())
        self.assertEqual(parsed.payload, {'corner': 2, 'flag': True, 'position': [1.5, 2.0]})
        self.assertIsNone(parsed.agent_id)

    def test_from_json(self):
        record = EventRecord(10, EventKind.DEATH, 4, {'energy': -0.25, 'age': 10, 'birth_step': 0})
        self.assertEqual(EventRecord.from_json(record.to_json()), record)


class TestEventLog(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmpdir.name, 'events.jsonl')

    def tearDown(self):
        self.tmpdir.cleanup()

    def test_write_and_read(self):
        log = EventLog(self.path)
        log.extend([EventRecord(0, EventKind.BIRTH, 0, {'parent_id': None}),
                    EventRecord(1, EventKind.EAT, 0, {'food_id': 1, 'food_kind': 'normal'})])
        log.close()
        self.assertEqual(EventLog.read(self.path), log.records)
        self.assertEqual(len(log), 2)

    def test_steps_must_not_decrease(self):
        log = EventLog()
        log.append(EventRecord(5, EventKind.EAT, 1))
        log.append(EventRecord(5, EventKind.EAT, 2))
        self.assertRaises(ValueError, log.append, EventRecord(4, EventKind.EAT, 3))
        self.assertEqual([r.agent_id for r in log], [1, 2])

    def test_reopen_rewrites_records(self):
        log = EventLog()
        log.append(EventRecord(0, EventKind.BIRTH, 0))
        log.reopen(self.path)
        log.append(EventRecord(1, EventKind.DEATH, 0))
        log.close()
        self.assertEqual([r.kind for r in EventLog.read(self.path)], [EventKind.BIRTH, EventKind.DEATH])

    def test_file_backed_log_keeps_position_only(self):
        log = EventLog(self.path)
        log.append(EventRecord(0, EventKind.BIRTH, 0, {'parent_id': None}))
        state = pickle.loads(pickle.dumps(log))
        log.append(EventRecord(3, EventKind.EAT, 0, {'food_id': 1, 'food_kind': 'normal'}))
        log.close()
        self.assertFalse(state.in_memory)
        self.assertEqual((state.count, state.last_step), (1, 0))

        state.reopen(self.path)
        self.assertEqual([r.kind for r in EventLog.read(self.path)], [EventKind.BIRTH])
        state.append(EventRecord(1, EventKind.DEATH, 0))
        state.close()
        self.assertEqual([r.step for r in state], [0, 1])
        self.assertEqual(len(state), 2)

    def test_reopen_copies_to_new_file(self):
        log = EventLog(self.path)
        log.append(EventRecord(0, EventKind.BIRTH, 0))
        state = pickle.loads(pickle.dumps(log))
        log.append(EventRecord(1, EventKind.DEATH, 0))
        log.close()
        copy = os.path.join(self.tmpdir.name, 'copy.jsonl')
        state.reopen(copy)
        state.close()
        self.assertEqual(len(EventLog.read(copy)), 1)
        self.assertEqual(len(EventLog.read(self.path)), 2)

    def test_reopen_needs_the_recorded_bytes(self):
        log = EventLog(self.path)
        log.append(EventRecord(0, EventKind.BIRTH, 0))
        log.close()
        with open(self.path, 'w', encoding='utf-8'):
            pass
        self.assertRaises(ValueError, log.reopen, self.path)

    def test_closed_log_rejects_appends(self):
        log = EventLog(self.path)
        log.close()
        self.assertRaises(ValueError, log.append, EventRecord(0, EventKind.BIRTH, 0))

    def test_event_file_is_reiterable(self):
        log = EventLog(self.path)
        log.extend([EventRecord(0, EventKind.BIRTH, 0), EventRecord(2, EventKind.DEATH, 0)])
        log.close()
        events = EventFile(self.path)
        self.assertEqual(len(events), 2)
        self.assertEqual(list(events), list(events))

    def test_malformed_lines_are_skipped(self):
        with open(self.path, 'w', encoding='utf-8') as log_file:
            log_file.write(EventRecord(0, EventKind.BIRTH, 0).to_json() + '\n')
            log_file.write('not json\n\n')
            log_file.write('{"step": 1, "kind": "hatch", "agent_id": 0, "payload": {}}\n')
        with self.assertLogs('root', level=logging.ERROR) as cm:
            records = EventLog.read(self.path)
        self.assertEqual(len(records), 1)
        self.assertEqual(len(cm.records), 2)
        self.assertIn('line 2', cm.records[0].getMessage())
