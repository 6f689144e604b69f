# Copyright 2026 The rewardevo authors
# This work is licensed under the GNU GPLv3 or later.
# See the COPYING file in the top-level directory.

"""
Append-only event log of a simulation run.

One JSON object per line, keys sorted, so that identical runs produce
byte-identical files.  Schema of a line:

    {"agent_id": int | null, "kind": "birth" | "death" | "eat" | "update" | "relocation",
     "payload": {...}, "step": int}

Payloads:
    birth       parent_id (null for founders), energy, weights {w_food, w_act[, w_poor | w_poison]}
    death       energy, age, birth_step
    eat         food_id, food_kind
    update      update index and PPO statistics
    relocation  food_kind, corner
"""

from dataclasses import dataclass, field
from enum import Enum
import json
import logging
import os
from typing import Iterable, Iterator, List, Optional

import numpy as np

COPY_CHUNK = 1 << 20


class EventKind(str, Enum):
    BIRTH = 'birth'
    DEATH = 'death'
    EAT = 'eat'
    UPDATE = 'update'
    RELOCATION = 'relocation'


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


@dataclass(frozen=True)
class EventRecord:
    step: int
    kind: EventKind
    agent_id: Optional[int]
    payload: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({
            'step': int(self.step),
            'kind': EventKind(self.kind).value,
            'agent_id': None if self.agent_id is None else int(self.agent_id),
            'payload': _plain(self.payload),
        }, sort_keys=True, separators=(',', ':'))

    @classmethod
    def from_json(cls, line: str) -> 'EventRecord':
        data = json.loads(line)
        return cls(data['step'], EventKind(data['kind']), data['agent_id'], data['payload'])


class EventLog(object):

    """
    Append-only event sink.

    Without a path the records are kept in memory.  With one they are written
    straight to a JSON-lines file and only the number of records and the byte
    offset are kept, so a pickled log carries its write position, not its history.
    """

    def __init__(self, path: Optional[str] = None):
        self.path = path
        self.count = 0
        self.offset = 0
        self.last_step: Optional[int] = None
        self._memory: Optional[List[EventRecord]] = [] if path is None else None
        self._file = self._open(path, 'w') if path else None

    @staticmethod
    def _open(path: str, mode: str):
        return open(path, mode, encoding='utf-8', newline='\n')

    @property
    def in_memory(self) -> bool:
        return self._memory is not None

    def append(self, record: EventRecord):
        if self.last_step is not None and record.step < self.last_step:
            raise ValueError(f'Event at step {record.step} after step {self.last_step}')
        if self.in_memory:
            self._memory.append(record)
        else:
            if self._file is None:
                raise ValueError(f'Event log {self.path} is closed')
            line = record.to_json() + '\n'
            self._file.write(line)
            self.offset += len(line.encode('utf-8'))
        self.last_step = record.step
        self.count += 1

    def extend(self, records: Iterable[EventRecord]):
        for record in records:
            self.append(record)

    @property
    def records(self) -> List[EventRecord]:
        if self.in_memory:
            return self._memory
        return list(self)

    def __iter__(self) -> Iterator[EventRecord]:
        if self.in_memory:
            return iter(self._memory)
        self.flush()
        return EventLog.iter_file(self.path)

    def __len__(self):
        return self.count

    def flush(self):
        if self._file is not None:
            self._file.flush()

    def close(self):
        if self._file is not None:
            self._file.close()
            self._file = None

    def reopen(self, path: str):
        """
        Continue the log in `path`.

        An in-memory log is written out in full.  A file-backed log first
        brings `path` to the recorded offset, truncating its own file or
        copying the leading part of it to a new one.

        :raises ValueError: when the existing file is shorter than the offset
        """
        source = self.path
        self.close()
        if self.in_memory:
            with self._open(path, 'w') as log_file:
                for record in self._memory:
                    line = record.to_json() + '\n'
                    log_file.write(line)
                    self.offset += len(line.encode('utf-8'))
            self._memory = None
        else:
            if not os.path.exists(source) or os.path.getsize(source) < self.offset:
                raise ValueError(f'Event log {source} holds fewer than {self.offset} bytes')
            if os.path.abspath(source) == os.path.abspath(path):
                os.truncate(path, self.offset)
            else:
                with open(source, 'rb') as source_file, open(path, 'wb') as target_file:
                    remaining = self.offset
                    while remaining:
                        chunk = source_file.read(min(remaining, COPY_CHUNK))
                        target_file.write(chunk)
                        remaining -= len(chunk)
        self.path = path
        self._file = self._open(path, 'a')

    def __getstate__(self):
        state = self.__dict__.copy()
        state['_file'] = None
        return state

    @staticmethod
    def iter_file(path) -> Iterator[EventRecord]:
        """
        Stream the records of a JSON-lines log, skipping (and logging) malformed lines.
        """
        with open(path, encoding='utf-8') as log_file:
            for number, line in enumerate(log_file, 1):
                if not line.strip():
                    continue
                try:
                    yield EventRecord.from_json(line)
                except (ValueError, KeyError) as error:
                    logging.error(f'Skipping malformed event on line {number} of {path}: {error}')

    @staticmethod
    def read(path) -> List[EventRecord]:
        return list(EventLog.iter_file(path))


class EventFile(object):

    """
    Re-iterable view of a log file; every pass reads the file again.
    """

    def __init__(self, path):
        self.path = path

    def __iter__(self) -> Iterator[EventRecord]:
        return EventLog.iter_file(self.path)

    def __len__(self):
        return sum(1 for _ in self)
