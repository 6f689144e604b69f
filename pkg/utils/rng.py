# Copyright 2026 The rewardevo authors
# This work is licensed under the GNU GPLv3 or later.
# See the COPYING file in the top-level directory.

"""
Counter-based random streams.

Every random draw of a simulation comes from a generator derived from one
root seed and a fixed key (step, purpose, *extra).  Streams never share state,
so the draws of one phase cannot shift the draws of another, and a restored
checkpoint resumes with exactly the same numbers.
"""

from enum import IntEnum

import numpy as np


class Purpose(IntEnum):
    INIT = 0
    ACTION = 1
    PPO = 2
    FOOD = 3
    BIRTH = 4
    DEATH = 5
    PLACEMENT = 6
    MUTATION = 7
    POLICY_INIT = 8
    NULL_MODEL = 9


class RngStreams:

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError(f'Seed must be non-negative, got {seed}')
        self.seed = int(seed)

    def stream(self, step: int, purpose: Purpose, *keys: int) -> np.random.Generator:
        """
        Derive the generator for a (step, purpose, *keys) counter.

        :param step: the simulation step the draws belong to
        :param purpose: which phase of the step is drawing
        :param keys: optional extra counters (an agent id, for example)
        :return: a fresh `numpy.random.Generator`
        """
        sequence = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(int(step), int(purpose), *(int(k) for k in keys))
        )
        return np.random.Generator(np.random.PCG64(sequence))

    def __eq__(self, other):
        return isinstance(other, RngStreams) and other.seed == self.seed

    def __repr__(self):
        return f'RngStreams(seed={self.seed})'
