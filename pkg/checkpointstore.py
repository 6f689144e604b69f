# Copyright 2026 The rewardevo authors
# This work is licensed under the GNU GPLv3 or later.
# See the COPYING file in the top-level directory.

import base64
from collections import namedtuple
from datetime import datetime
import hashlib
import logging
import os.path
import sqlite3
from typing import Iterator, List, Optional

FORMAT_VERSION = 1

Checkpoint = namedtuple('Checkpoint', ('run_id', 'step', 'version', 'content', 'checksum', 'timestamp'))
Checkpoint.decode_content = lambda self: base64.b64decode(self.content)


def checksum_of(encoded_content: bytes) -> str:
    digest = hashlib.sha256(encoded_content)
    return f'{digest.name}:{digest.hexdigest()}'


class CheckpointStore(object):

    """
    SQLite-backed store for serialized simulation states.

    Rows are keyed by (run id, step); writing the same key twice replaces the
    earlier state.  Contents are kept base64-encoded next to their sha256
    checksum, the serialization format version and an ISO 8601 timestamp.
    """

    def __init__(self, dbfile: str):
        self.dbfile = dbfile
        self.logger = logging.getLogger('checkpointstore')
        if not os.path.exists(dbfile):
            logging.warning(f'Checkpoint DB {dbfile} does not exist, creating it')
        self.db = sqlite3.connect(dbfile)
        with self.db:
            self.db.execute(
                'CREATE TABLE IF NOT EXISTS checkpoints('
                'run_id TEXT NOT NULL, step INTEGER NOT NULL, version INTEGER, content BLOB,'
                ' checksum TEXT, timestamp TEXT, PRIMARY KEY (run_id, step))'
            )

    def close(self):
        self.db.close()

    def _validate(self, run_id: str, step: int, content: bytes, timestamp: Optional[str]) -> Optional[str]:
        """
        :return: the normalised timestamp, or None (after logging why) when the input is unusable
        """
        if not run_id:
            logging.error('Storing a checkpoint requires a run id')
            return None
        if step is None or step < 0:
            logging.error(f'Invalid checkpoint step: {step}')
            return None
        if not content:
            logging.error('Empty checkpoint contents')
            return None
        if timestamp is None:
            return datetime.now().isoformat(sep=' ')
        try:
            return datetime.fromisoformat(timestamp).isoformat(sep=' ')
        except ValueError:
            logging.error(f'Invalid timestamp format: {timestamp} (expects ISO 8601)')
            return None

    def add(self, run_id: str, step: int, content: bytes, timestamp: Optional[str] = None,
            version: int = FORMAT_VERSION) -> bool:
        """
        Store the state of a run at a step, replacing any earlier state at that step.

        :param run_id: identifier of the run (preset label and seed)
        :param step: number of steps the simulation had executed
        :param content: the serialized simulation state
        :param timestamp: optional ISO 8601 timestamp (defaults to now)
        :param version: serialization format version of the content

        :return: True if successful, False otherwise
        """
        timestamp = self._validate(run_id, step, content, timestamp)
        if timestamp is None:
            return False
        encoded = base64.b64encode(content)
        replaced = self.exists(run_id, step)
        with self.db:
            self.db.execute(
                'INSERT INTO checkpoints(run_id, step, version, content, checksum, timestamp) '
                'VALUES(?, ?, ?, ?, ?, ?) '
                'ON CONFLICT(run_id, step) DO UPDATE SET version = excluded.version, '
                'content = excluded.content, checksum = excluded.checksum, timestamp = excluded.timestamp',
                (run_id, step, version, encoded, checksum_of(encoded), timestamp)
            )
        self.logger.info(f'{"Replaced" if replaced else "Stored"} checkpoint of {run_id} at step {step} '
                         f'({len(content)} bytes)')
        return True

    def verify(self, checkpoint: Checkpoint) -> bool:
        """
        :return: True if the stored checksum matches the stored content
        """
        return checksum_of(checkpoint.content) == checkpoint.checksum

    def exists(self, run_id: str, step: int) -> bool:
        cursor = self.db.execute('SELECT 1 FROM checkpoints WHERE run_id = ? AND step = ?', (run_id, step))
        return cursor.fetchone() is not None

    def _select(self, where: str, parameters: tuple) -> Iterator[Checkpoint]:
        cursor = self.db.execute(f'SELECT run_id, step, version, content, checksum, timestamp '
                                 f'FROM checkpoints WHERE {where}', parameters)
        for row in cursor.fetchall():
            yield Checkpoint(*row)

    def load(self, run_id: str, step: int) -> Optional[Checkpoint]:
        return next(self._select('run_id = ? AND step = ?', (run_id, step)), None)

    def latest(self, run_id: str) -> Optional[Checkpoint]:
        """
        :return: the checkpoint of a run with the highest step, or None
        """
        return next(self._select('run_id = ? ORDER BY step DESC LIMIT 1', (run_id,)), None)

    def steps(self, run_id: str) -> List[int]:
        cursor = self.db.execute('SELECT step FROM checkpoints WHERE run_id = ? ORDER BY step', (run_id,))
        return [step for step, in cursor.fetchall()]

    def search_by_run(self, run_id: str) -> Iterator[Checkpoint]:
        """
        Checkpoints of every run whose id starts with `run_id`, ordered by run and step.
        """
        return self._select("run_id LIKE ? || '%' ORDER BY run_id, step", (run_id,))
