# Copyright 2026 The rewardevo authors
# This work is licensed under the GNU GPLv3 or later.
# See the COPYING file in the top-level directory.

"""
Evolvable linear reward over food intake and motor effort.

    r = sum_kind w_kind * n_kind + c_act * w_act * |a|

The weights are fixed at birth and inherited (with mutation) by children.
"""

from dataclasses import dataclass, fields
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from arena import FoodTag
from utils.misc import require

WEIGHT_BOUND = 10.0

_FOOD_WEIGHT = {FoodTag.NORMAL: 'w_food', FoodTag.POOR: 'w_poor', FoodTag.POISON: 'w_poison'}


def weight_names(kinds: Sequence[str]) -> Tuple[str, ...]:
    """
    Names of the evolvable weights for an experiment with the given food kinds,
    in their canonical order (w_food, w_act, then w_poor or w_poison).
    """
    extra = tuple(_FOOD_WEIGHT[FoodTag(kind)] for kind in kinds if FoodTag(kind) != FoodTag.NORMAL)
    return ('w_food', 'w_act') + extra


@dataclass(frozen=True)
class RewardParams:
    w_food: float = 0.0
    w_act: float = 0.0
    w_poor: Optional[float] = None
    w_poison: Optional[float] = None

    def __post_init__(self):
        for name in self.names:
            value = getattr(self, name)
            require(-WEIGHT_BOUND <= value <= WEIGHT_BOUND,
                    f'Reward weight {name}={value} outside [-{WEIGHT_BOUND}, {WEIGHT_BOUND}]')
        require(self.w_poor is None or self.w_poison is None,
                'A reward function has either a poor or a poison food weight, not both')

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(self) if getattr(self, f.name) is not None)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in self.names], dtype=np.float64)

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.names}

    @classmethod
    def from_array(cls, values, names: Sequence[str]) -> 'RewardParams':
        return cls(**{name: float(value) for name, value in zip(names, values)})

    def food_weight(self, tag: FoodTag) -> float:
        value = getattr(self, _FOOD_WEIGHT[FoodTag(tag)])
        return 0.0 if value is None else value


@dataclass(frozen=True)
class RewardConfig:
    c_act: float = 0.01
    init_std: float = 0.1

    def __post_init__(self):
        require(self.c_act > 0, f'reward.c_act must be positive, got {self.c_act}')
        require(self.init_std >= 0, f'reward.init_std must be >= 0, got {self.init_std}')


def compute_reward(params: RewardParams, eaten_counts: Mapping[str, int], action_norm: float,
                   config: RewardConfig) -> float:
    """
    :param eaten_counts: foods eaten this step, by food kind
    :param action_norm: Euclidean norm of the (clipped) motor action
    :return: the scalar reward
    """
    if action_norm < 0:
        raise ValueError(f'action_norm must be >= 0, got {action_norm}')
    reward = 0.0
    for kind, count in eaten_counts.items():
        if count < 0:
            raise ValueError(f'Negative eaten count for {kind}: {count}')
        reward += params.food_weight(kind) * count
    return reward + config.c_act * params.w_act * action_norm


def sample_initial_weights(rng: np.random.Generator, config: RewardConfig,
                           kinds: Sequence[str]) -> RewardParams:
    """
    Founder weights: independent zero-mean Gaussians, clipped to the weight bound.
    """
    names = weight_names(kinds)
    values = np.clip(rng.normal(0.0, config.init_std, len(names)), -WEIGHT_BOUND, WEIGHT_BOUND)
    return RewardParams.from_array(values, names)
