# Copyright 2026 The rewardevo authors
# This work is licensed under the GNU GPLv3 or later.
# See the COPYING file in the top-level directory.

"""
Energy- and age-dependent demography.

Death follows the hazard

    h(t, e) = kappa_h / (1 + alpha_e * exp(beta_he * e)) + alpha_a * exp(beta_a * t)

(an energy sigmoid plus a Gompertz ageing term), birth follows the sigmoid

    b(e) = kappa_b / (1 + exp(-beta_b * e))

and children inherit their parent's reward weights perturbed by clipped
Cauchy noise.
"""

from dataclasses import dataclass
import math
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from reward import RewardParams, weight_names
from utils.misc import require

if TYPE_CHECKING:
    from arena import Arena

BIRTH_ORIENTATIONS = ('increasing', 'printed')


@dataclass(frozen=True)
class HazardParams:
    kappa_h: float = 0.01
    alpha_e: float = 0.02
    beta_he: float = 0.2
    alpha_a: float = 2e-7
    beta_a: float = 4e-6

    def __post_init__(self):
        for name in ('kappa_h', 'alpha_e', 'beta_he', 'alpha_a', 'beta_a'):
            require(getattr(self, name) > 0, f'hazard.{name} must be positive')


@dataclass(frozen=True)
class BirthParams:
    kappa_b: float = 4e-4
    beta_b: float = 0.1
    orientation: str = 'increasing'

    def __post_init__(self):
        require(self.kappa_b > 0, 'birth.kappa_b must be positive')
        require(self.beta_b > 0, 'birth.beta_b must be positive')
        require(self.orientation in BIRTH_ORIENTATIONS,
                f'birth.orientation must be one of {BIRTH_ORIENTATIONS}')


@dataclass(frozen=True)
class MutationParams:
    cauchy_scale: float = 0.02
    clip_min: float = -10.0
    clip_max: float = 10.0

    def __post_init__(self):
        require(self.cauchy_scale > 0, 'mutation.cauchy_scale must be positive')
        require(self.clip_min < self.clip_max, 'mutation.clip_min must be below mutation.clip_max')


@dataclass(frozen=True)
class ReproductionParams:
    eta: float = 0.4
    placement_std: float = 0.08
    placement_attempts: int = 10

    def __post_init__(self):
        require(0 <= self.eta <= 1, f'reproduction.eta must be in [0, 1], got {self.eta}')
        require(self.placement_std > 0, 'reproduction.placement_std must be positive')
        require(self.placement_attempts >= 1, 'reproduction.placement_attempts must be >= 1')


def hazard(age, energy, params: HazardParams):
    """
    Per-step death probability.

    The energy term is evaluated as a logistic function so that it neither
    overflows nor loses precision for large |energy|.

    :param age: steps since birth (scalar or array, >= 0)
    :param energy: energy level (scalar or array)
    :return: probability clamped to [0, 1]
    """
    age = np.asarray(age, dtype=np.float64)
    energy = np.asarray(energy, dtype=np.float64)
    if np.any(age < 0):
        raise ValueError('age must be >= 0')
    energy_term = params.kappa_h * expit(-(params.beta_he * energy + math.log(params.alpha_e)))
    with np.errstate(over='ignore'):
        age_term = params.alpha_a * np.exp(params.beta_a * age)
    result = np.clip(energy_term + age_term, 0.0, 1.0)
    return float(result) if result.ndim == 0 else result


def cumulative_hazard(age, energy, params: HazardParams):
    """
    Integral of the (unclamped) hazard from 0 to age at fixed energy.
    """
    age = np.asarray(age, dtype=np.float64)
    energy_term = params.kappa_h * expit(-(params.beta_he * np.asarray(energy, dtype=np.float64)
                                           + math.log(params.alpha_e)))
    with np.errstate(over='ignore'):
        ageing = params.alpha_a / params.beta_a * np.expm1(params.beta_a * age)
    return energy_term * age + ageing


def survival(age, energy, params: HazardParams):
    """
    Probability of surviving to `age` at constant energy, exp(-H(age)).
    """
    if np.any(np.asarray(age) < 0):
        raise ValueError('age must be >= 0')
    result = np.exp(-cumulative_hazard(age, energy, params))
    return float(result) if np.ndim(result) == 0 else result


def birth_probability(energy, params: BirthParams):
    """
    Per-step reproduction probability, saturating at kappa_b.

    With the default 'increasing' orientation b grows with energy; 'printed'
    evaluates kappa_b / (1 + exp(beta_b * e)) literally.
    """
    sign = 1.0 if params.orientation == 'increasing' else -1.0
    result = params.kappa_b * expit(sign * params.beta_b * np.asarray(energy, dtype=np.float64))
    return float(result) if np.ndim(result) == 0 else result


def mutate_weights(parent: RewardParams, rng: np.random.Generator, params: MutationParams) -> RewardParams:
    """
    Perturb every weight by independent Cauchy(0, cauchy_scale) noise, then clip.
    """
    values = parent.as_array()
    noise = params.cauchy_scale * rng.standard_cauchy(len(values))
    return RewardParams.from_array(np.clip(values + noise, params.clip_min, params.clip_max), parent.names)


def random_walk_characterization(steps: int, trials: int, rng: np.random.Generator,
                                 params: MutationParams = MutationParams(),
                                 kinds: Sequence[str] = ('normal',)) -> List[RewardParams]:
    """
    Null model of weight drift: repeated mutation from the origin with no selection.

    :return: the endpoint of each trial's walk
    """
    if steps < 0:
        raise ValueError(f'steps must be >= 0, got {steps}')
    names = weight_names(kinds)
    weights = np.zeros((trials, len(names)))
    for _ in range(steps):
        noise = params.cauchy_scale * rng.standard_cauchy(weights.shape)
        weights = np.clip(weights + noise, params.clip_min, params.clip_max)
    return [RewardParams.from_array(row, names) for row in weights]


def fraction_near_bounds(values, params: MutationParams = MutationParams(), margin: float = 0.1) -> float:
    """
    Share of weights within `margin` of either clip bound.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return 0.0
    near = (values <= params.clip_min + margin) | (values >= params.clip_max - margin)
    return float(near.mean())


def try_place_child(parent_position, arena: 'Arena', rng: np.random.Generator,
                    params: ReproductionParams) -> Optional[np.ndarray]:
    """
    Sample child positions around the parent until one is free.

    :return: the first free position, or None when every attempt conflicts
    """
    std = params.placement_std * arena.config.width
    radius = arena.config.agent_radius
    for _ in range(params.placement_attempts):
        position = rng.normal(np.asarray(parent_position, dtype=np.float64), std)
        if arena.is_free(position, radius):
            return position
    return None


def split_energy(parent_energy: float, eta: float) -> Tuple[float, float]:
    """
    :return: (parent energy after birth, child energy); they sum to the input
    """
    child = eta * parent_energy
    return parent_energy - child, child


def hazard_curve(ages: np.ndarray, energy: float, params: HazardParams) -> np.ndarray:
    return np.broadcast_to(hazard(ages, energy, params), np.shape(ages))


def survival_curve(ages: np.ndarray, energy: float, params: HazardParams) -> np.ndarray:
    return np.broadcast_to(survival(ages, energy, params), np.shape(ages))


def birth_curve(energies: np.ndarray, params: BirthParams) -> np.ndarray:
    return np.asarray(birth_probability(energies, params))
