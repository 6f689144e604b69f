# Copyright 2026 The rewardevo authors
# This work is licensed under the GNU GPLv3 or later.
# See the COPYING file in the top-level directory.

"""
The foraging arena: a walled rectangle with agents and regrowing food.

Agents are dynamic circles driven by two forces applied at their left and
right sides.  Foods are static sensor circles: they are seen by the range
sensors and eaten on contact, but never push anything.
"""

from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum, IntEnum
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from physics2d import (WALL_KIND, Bodies, Body, Contact, SolverConfig, WallSegment,
                       raycast_fan, step_bodies)
from utils.misc import bearing, require

MOUTH_HALF_ANGLE = math.pi / 3
SECTOR_WIDTH = math.pi / 3
N_SECTORS = 6
SPAWN_ATTEMPTS = 100


class ObjectKind(IntEnum):
    WALL = WALL_KIND
    AGENT = 1
    FOOD = 2
    POOR = 3
    POISON = 4


class FoodTag(str, Enum):
    NORMAL = 'normal'
    POOR = 'poor'
    POISON = 'poison'

    @property
    def object_kind(self) -> ObjectKind:
        return {FoodTag.NORMAL: ObjectKind.FOOD, FoodTag.POOR: ObjectKind.POOR,
                FoodTag.POISON: ObjectKind.POISON}[self]


class SpawnDistribution(str, Enum):
    UNIFORM = 'uniform'
    CENTERED = 'centered'
    RELOCATING = 'relocating'


@dataclass(frozen=True)
class FoodKind:
    tag: FoodTag
    energy_gain: float


@dataclass(frozen=True)
class FoodSpec:
    n_max: int = 100
    growth_rate: float = 0.02
    initial: Optional[int] = None

    def __post_init__(self):
        require(self.n_max >= 0, f'food n_max must be >= 0, got {self.n_max}')
        require(self.growth_rate >= 0, f'food growth_rate must be >= 0, got {self.growth_rate}')
        require(self.initial is None or 0 <= self.initial <= self.n_max,
                f'food initial must lie in [0, n_max], got {self.initial}')


@dataclass(frozen=True)
class FoodConfig:
    kinds: Tuple[str, ...] = ('normal',)
    distribution: str = 'uniform'
    gaussian_std_fraction: float = 0.1
    relocation_period: int = 1000
    relocation_inset: float = 0.2
    normal: FoodSpec = FoodSpec()
    poor: FoodSpec = FoodSpec(n_max=30, growth_rate=0.005)
    poison: FoodSpec = FoodSpec(n_max=40, growth_rate=0.005)

    def __post_init__(self):
        if isinstance(self.kinds, str):
            kinds = tuple(kind.strip() for kind in self.kinds.split(',') if kind.strip())
        else:
            kinds = tuple(self.kinds)
        object.__setattr__(self, 'kinds', kinds)
        known = {tag.value for tag in FoodTag}
        require(all(kind in known for kind in kinds), f'food.kinds: unknown food kind in {kinds}')
        require(len(set(kinds)) == len(kinds), f'food.kinds: duplicated kind in {kinds}')
        require(kinds[:1] == ('normal',), 'food.kinds must start with normal')
        require(not ('poor' in kinds and 'poison' in kinds),
                'food.kinds: poor and poison foods cannot be combined in one experiment')
        require(self.distribution in {d.value for d in SpawnDistribution},
                f'food.distribution: unknown distribution {self.distribution!r}')
        require(self.gaussian_std_fraction > 0, 'food.gaussian_std_fraction must be positive')
        require(self.relocation_period >= 1, 'food.relocation_period must be >= 1')
        require(0 <= self.relocation_inset < 0.5, 'food.relocation_inset must be in [0, 0.5)')

    @property
    def tags(self) -> Tuple[FoodTag, ...]:
        return tuple(FoodTag(kind) for kind in self.kinds)

    def spec(self, tag: FoodTag) -> FoodSpec:
        return getattr(self, tag.value)


@dataclass(frozen=True)
class MetabolicParams:
    e_basic: float = 0.001
    e_act: float = 2e-5
    e_food: float = 1.0
    e_poor: float = 0.2
    e_poison: float = -0.6

    def __post_init__(self):
        require(self.e_basic > 0, f'metabolism.e_basic must be positive, got {self.e_basic}')
        require(self.e_act > 0, f'metabolism.e_act must be positive, got {self.e_act}')

    def gain(self, tag: FoodTag) -> float:
        return {FoodTag.NORMAL: self.e_food, FoodTag.POOR: self.e_poor,
                FoodTag.POISON: self.e_poison}[FoodTag(tag)]


@dataclass(frozen=True)
class ArenaConfig:
    width: float = 480.0
    height: float = 360.0
    agent_radius: float = 10.0
    agent_mass: float = 40.0
    food_radius: float = 4.0
    linear_damping: float = 1.0
    angular_damping: float = 2.0
    n_rays: int = 16
    sensor_range_fraction: float = 0.5
    velocity_scale: float = 4.0
    energy_scale: float = 20.0
    action_min: float = -20.0
    action_max: float = 80.0

    def __post_init__(self):
        require(self.width > 0 and self.height > 0, 'arena.width and arena.height must be positive')
        require(self.agent_radius > 0, 'arena.agent_radius must be positive')
        require(self.agent_mass > 0, 'arena.agent_mass must be positive')
        require(self.food_radius > 0, 'arena.food_radius must be positive')
        require(self.n_rays >= 1, 'arena.n_rays must be >= 1')
        require(self.sensor_range_fraction > 0, 'arena.sensor_range_fraction must be positive')
        require(self.velocity_scale > 0 and self.energy_scale > 0,
                'arena.velocity_scale and arena.energy_scale must be positive')
        require(self.action_min < self.action_max, 'arena.action_min must be below arena.action_max')

    @property
    def sensor_range(self) -> float:
        return self.sensor_range_fraction * self.width


@dataclass
class FoodPopulation:
    kind: FoodKind
    capacity: int
    growth_rate: float
    distribution: SpawnDistribution
    center: np.ndarray
    std: float
    accumulator: float = 0.0
    items: Dict[int, np.ndarray] = field(default_factory=dict)
    eaten_total: int = 0
    corner_index: int = 0

    def __post_init__(self):
        require(0 <= self.accumulator <= self.capacity,
                f'food accumulator {self.accumulator} outside [0, {self.capacity}]')


@dataclass
class Observation:
    range_readings: np.ndarray
    collision_sectors: np.ndarray
    self_angle: float
    self_velocity: np.ndarray
    energy: float

    def as_vector(self) -> np.ndarray:
        return np.concatenate([
            self.range_readings.ravel(),
            self.collision_sectors.ravel(),
            [self.self_angle / math.pi],
            self.self_velocity,
            [self.energy],
        ])


@dataclass(frozen=True)
class EatEvent:
    body_id: int
    food_id: int
    kind: FoodTag


def next_accumulator(accumulator: float, growth_rate: float, eaten: int, capacity: int) -> float:
    """
    n_{t+1} = min(n_t + g - eaten_t, n_max)
    """
    return min(accumulator + growth_rate - eaten, capacity)


def in_mouth(relative_bearing: float) -> bool:
    return abs(relative_bearing) <= MOUTH_HALF_ANGLE


def sector_of(relative_bearing: float) -> int:
    """
    Index of the 60 degree collision sector holding a bearing; sector 0
    starts at the heading and indices grow counter-clockwise.
    """
    return int(math.floor((relative_bearing % (2 * math.pi)) / SECTOR_WIDTH)) % N_SECTORS


def clip_action(action, config: ArenaConfig) -> np.ndarray:
    return np.clip(np.asarray(action, dtype=np.float64), config.action_min, config.action_max)


def metabolize(energy: float, eat_events: Sequence[EatEvent], clipped_action,
               metabolism: MetabolicParams) -> float:
    """
    One step of the energy budget.

    :return: energy + food gains - e_act * |action| - e_basic (unbounded)
    """
    gained = sum(metabolism.gain(event.kind) for event in eat_events)
    return energy + gained - metabolic_cost(clipped_action, metabolism)


def metabolic_cost(clipped_action, metabolism: MetabolicParams) -> float:
    return metabolism.e_act * float(np.linalg.norm(clipped_action)) + metabolism.e_basic


def relocation_corners(width: float, height: float, inset: float) -> List[np.ndarray]:
    # clockwise with y pointing up: top-left, top-right, bottom-right, bottom-left
    dx, dy = inset * width, inset * height
    return [np.array([dx, height - dy]), np.array([width - dx, height - dy]),
            np.array([width - dx, dy]), np.array([dx, dy])]


def relocate_food_center(population: FoodPopulation, total_eaten_counter: int,
                         corners: Sequence[np.ndarray], period: int = 1000) -> np.ndarray:
    """
    Move the Gaussian centre of a relocating population to the corner matching
    the number of foods eaten so far (one corner per `period` foods).

    :return: the (possibly unchanged) centre
    """
    if population.distribution != SpawnDistribution.RELOCATING:
        return population.center
    population.corner_index = (total_eaten_counter // period) % len(corners)
    population.center = np.array(corners[population.corner_index], dtype=np.float64)
    return population.center


class Arena(object):

    """
    World state of one simulation: bodies, walls, food populations and the
    contacts of the last physics step.
    """

    def __init__(self, config: ArenaConfig, food: FoodConfig, metabolism: MetabolicParams,
                 solver: SolverConfig):
        self.config = config
        self.food_config = food
        self.metabolism = metabolism
        self.solver = solver
        self.logger = logging.getLogger('arena')
        self.bodies = Bodies()
        self.next_body_id = 0
        width, height = config.width, config.height
        self.walls = [
            WallSegment((0.0, 0.0), (width, 0.0)),
            WallSegment((width, 0.0), (width, height)),
            WallSegment((width, height), (0.0, height)),
            WallSegment((0.0, height), (0.0, 0.0)),
        ]
        self.corners = relocation_corners(width, height, food.relocation_inset)
        self.populations: Dict[FoodTag, FoodPopulation] = {}
        for tag in food.tags:
            spec = food.spec(tag)
            distribution = SpawnDistribution(food.distribution)
            center = (self.corners[0].copy() if distribution == SpawnDistribution.RELOCATING
                      else np.array([width / 2, height / 2]))
            self.populations[tag] = FoodPopulation(
                kind=FoodKind(tag, metabolism.gain(tag)),
                capacity=spec.n_max,
                growth_rate=spec.growth_rate,
                distribution=distribution,
                center=center,
                std=food.gaussian_std_fraction * width,
                accumulator=float(spec.n_max if spec.initial is None else spec.initial),
            )
        self.sensed_kinds = ((ObjectKind.AGENT,) + tuple(tag.object_kind for tag in food.tags)
                             + (ObjectKind.WALL,))
        self._kind_column = {kind: column for column, kind in enumerate(self.sensed_kinds)}
        half = MOUTH_HALF_ANGLE
        self.ray_angles = (np.linspace(-half, half, config.n_rays) if config.n_rays > 1
                           else np.zeros(1))
        self.contacts: List[Contact] = []
        self._touching: Dict[int, List[Tuple[np.ndarray, int]]] = {}
        self._forces: Dict[int, np.ndarray] = {}
        self._torques: Dict[int, float] = {}

    @property
    def observation_dim(self) -> int:
        kinds = len(self.sensed_kinds)
        return self.config.n_rays * (1 + kinds) + N_SECTORS * kinds + 4

    def _new_body_id(self) -> int:
        body_id = self.next_body_id
        self.next_body_id += 1
        return body_id

    def add_agent(self, position, orientation: float = 0.0) -> int:
        radius, mass = self.config.agent_radius, self.config.agent_mass
        body = Body(self._new_body_id(), position, orientation, radius=radius,
                    inverse_mass=1.0 / mass, inverse_inertia=2.0 / (mass * radius ** 2),
                    kind=int(ObjectKind.AGENT))
        self.bodies.add(body)
        return body.id

    def remove_agent(self, body_id: int):
        self.bodies.remove(body_id)
        self._touching.pop(body_id, None)

    def add_food(self, population: FoodPopulation, position) -> int:
        body = Body(self._new_body_id(), position, radius=self.config.food_radius,
                    inverse_mass=0.0, inverse_inertia=0.0,
                    kind=int(population.kind.tag.object_kind), sensor=True)
        self.bodies.add(body)
        population.items[body.id] = body.center.copy()
        return body.id

    def is_free(self, position, radius: float) -> bool:
        """
        Whether a circle fits fully inside the arena without overlapping any body.
        """
        x, y = float(position[0]), float(position[1])
        if not (radius <= x <= self.config.width - radius and radius <= y <= self.config.height - radius):
            return False
        if not len(self.bodies):
            return True
        delta = self.bodies.center - np.array([x, y])
        distance = np.hypot(delta[:, 0], delta[:, 1])
        return bool(np.all(distance >= self.bodies.radius + radius))

    def sample_free_position(self, rng: np.random.Generator, radius: float,
                             attempts: int = SPAWN_ATTEMPTS) -> Optional[np.ndarray]:
        for _ in range(attempts):
            position = rng.uniform([radius, radius],
                                   [self.config.width - radius, self.config.height - radius])
            if self.is_free(position, radius):
                return position
        return None

    def _sample_food_position(self, population: FoodPopulation, rng: np.random.Generator) -> np.ndarray:
        radius = self.config.food_radius
        if population.distribution == SpawnDistribution.UNIFORM:
            return rng.uniform([radius, radius],
                               [self.config.width - radius, self.config.height - radius])
        return rng.normal(population.center, population.std)

    def spawn_food(self, population: FoodPopulation, rng: np.random.Generator) -> Optional[int]:
        for _ in range(SPAWN_ATTEMPTS):
            position = self._sample_food_position(population, rng)
            if self.is_free(position, self.config.food_radius):
                return self.add_food(population, position)
        self.logger.debug(f'No free place found for {population.kind.tag.value} food, '
                          'retrying next step.')
        return None

    def populate_food(self, rng: np.random.Generator):
        for population in self.populations.values():
            while math.floor(population.accumulator) > len(population.items):
                if self.spawn_food(population, rng) is None:
                    break

    def regenerate_food(self, population: FoodPopulation, eaten_this_step: int,
                        rng: np.random.Generator) -> FoodPopulation:
        """
        Advance the food accumulator and spawn foods while its integer part
        exceeds the number of foods on the ground.  A spawn that finds no
        free place is skipped and retried on the next step.
        """
        if eaten_this_step < 0:
            raise ValueError(f'eaten_this_step must be >= 0, got {eaten_this_step}')
        population.accumulator = next_accumulator(
            population.accumulator, population.growth_rate, eaten_this_step, population.capacity)
        while math.floor(population.accumulator) > len(population.items):
            if self.spawn_food(population, rng) is None:
                break
        return population

    def regenerate(self, eaten: Dict[FoodTag, int], rng: np.random.Generator) -> List[Tuple[FoodTag, int]]:
        """
        Regrow every food population and move relocating centres.

        :return: (tag, corner index) for every population whose centre moved
        """
        relocations = []
        for tag, population in self.populations.items():
            count = eaten.get(tag, 0)
            if population.distribution == SpawnDistribution.RELOCATING and count:
                before = population.corner_index
                relocate_food_center(population, population.eaten_total,
                                     self.corners, self.food_config.relocation_period)
                if population.corner_index != before:
                    relocations.append((tag, population.corner_index))
            self.regenerate_food(population, count, rng)
        return relocations

    def build_observation(self, body_id: int, energy: float) -> Observation:
        """
        Sensor readings of one agent.

        Range rays fan over the 120 degree front arc; each reading is the hit
        distance divided by the sensor range (1 when nothing is hit) followed
        by a one-hot of the hit object kind.  Collision flags are bucketed into
        six 60 degree sectors by the bearing of the contact point.
        """
        index = self.bodies.index_of(body_id)
        center = self.bodies.center[index]
        orientation = float(self.bodies.orientation[index])
        kinds = len(self.sensed_kinds)
        sensor_range = self.config.sensor_range

        distances, hit_kinds, _ = raycast_fan(center, orientation, self.ray_angles, sensor_range,
                                              self.bodies, self.walls, exclude=body_id)
        readings = np.zeros((len(self.ray_angles), 1 + kinds))
        readings[:, 0] = np.minimum(distances / sensor_range, 1.0)
        for ray, kind in enumerate(hit_kinds.tolist()):
            if kind in self._kind_column:
                readings[ray, 1 + self._kind_column[kind]] = 1.0

        sectors = np.zeros((N_SECTORS, kinds))
        for point, kind in self._touching.get(body_id, ()):
            if kind in self._kind_column:
                sectors[sector_of(bearing(center, orientation, point)), self._kind_column[kind]] = 1.0

        return Observation(
            range_readings=readings,
            collision_sectors=sectors,
            self_angle=orientation,
            self_velocity=self.bodies.linear_velocity[index] / self.config.velocity_scale,
            energy=energy / self.config.energy_scale,
        )

    def apply_motor_action(self, body_id: int, action) -> np.ndarray:
        """
        Queue the left/right driving forces of an agent for the next physics step.

        Both forces push along the heading, at attachment points one radius to
        the left and to the right of the centre.

        :return: the action clipped to [action_min, action_max]
        """
        clipped = clip_action(action, self.config)
        left, right = float(clipped[0]), float(clipped[1])
        orientation = float(self.bodies.orientation[self.bodies.index_of(body_id)])
        heading = np.array([math.cos(orientation), math.sin(orientation)])
        self._forces[body_id] = (left + right) * heading
        self._torques[body_id] = self.config.agent_radius * (right - left)
        return clipped

    def step_physics(self) -> List[Contact]:
        forces = np.zeros((len(self.bodies), 2))
        torques = np.zeros(len(self.bodies))
        for body_id, force in self._forces.items():
            forces[self.bodies.index_of(body_id)] = force
            torques[self.bodies.index_of(body_id)] = self._torques[body_id]
        self._forces.clear()
        self._torques.clear()
        self.contacts = step_bodies(self.bodies, self.walls, forces, torques, self.solver,
                                    dt=1.0, linear_damping=self.config.linear_damping,
                                    angular_damping=self.config.angular_damping)
        self._index_touching()
        return self.contacts

    def _index_touching(self):
        touching = defaultdict(list)
        kind = dict(zip(self.bodies.ids.tolist(), self.bodies.kind.tolist()))
        for contact in self.contacts:
            if contact.is_wall:
                touching[contact.body_a].append((contact.contact_point, int(ObjectKind.WALL)))
                continue
            touching[contact.body_a].append((contact.contact_point, kind[contact.body_b]))
            touching[contact.body_b].append((contact.contact_point, kind[contact.body_a]))
        self._touching = dict(touching)

    def process_eating(self) -> List[EatEvent]:
        """
        Consume every food touched inside an agent's mouth (|bearing| <= 60 degrees).

        Each food goes to at most one agent, the one with the lowest id.
        Eaten foods are removed and counted on their population.
        """
        food_tag = {}
        for tag, population in self.populations.items():
            for food_id in population.items:
                food_tag[food_id] = tag
        candidates = []
        for contact in self.contacts:
            if contact.is_wall or not contact.sensor:
                continue
            for agent_id, food_id in ((contact.body_a, contact.body_b),
                                      (contact.body_b, contact.body_a)):
                if food_id in food_tag and agent_id not in food_tag:
                    candidates.append((agent_id, food_id))
        events = []
        eaten = set()
        for agent_id, food_id in sorted(candidates):
            if food_id in eaten:
                continue
            index = self.bodies.index_of(agent_id)
            food_center = self.bodies.center[self.bodies.index_of(food_id)]
            if not in_mouth(bearing(self.bodies.center[index], float(self.bodies.orientation[index]),
                                    food_center)):
                continue
            eaten.add(food_id)
            events.append(EatEvent(agent_id, food_id, food_tag[food_id]))
        for event in events:
            population = self.populations[event.kind]
            del population.items[event.food_id]
            population.eaten_total += 1
            self.bodies.remove(event.food_id)
        return events

    def total_food(self) -> int:
        return sum(len(population.items) for population in self.populations.values())
