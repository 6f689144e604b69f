# Copyright 2026 The rewardevo authors
# This work is licensed under the GNU GPLv3 or later.
# See the COPYING file in the top-level directory.

"""
The evolutionary loop.

Each step every living agent (in id order) observes, maybe updates its
policy, and acts; the arena then steps its physics, resolves eating and
regrows food; finally each agent that was alive at the start of the step
draws for birth and then for death.  All randomness comes from counter-based
streams keyed by (step, purpose), so a run is a pure function of its
configuration and seed.
"""

from collections import Counter, defaultdict
from dataclasses import dataclass, field
import io
import json
import logging
import math
import os
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import torch

from arena import (Arena, ArenaConfig, FoodConfig, MetabolicParams, metabolic_cost,
                   metabolize)
from checkpointstore import FORMAT_VERSION, CheckpointStore
from eventlog import EventKind, EventLog, EventRecord
from lifecycle import (BirthParams, HazardParams, MutationParams, ReproductionParams,
                       birth_probability, hazard, mutate_weights, split_energy, try_place_child)
from physics2d import SolverConfig
from reward import RewardConfig, RewardParams, compute_reward, sample_initial_weights
from rl import AgentLearner, PpoHyper, configure_torch, policy_forward
from utils.misc import require
from utils.rng import Purpose, RngStreams

LEDGER_TOLERANCE = 1e-9


class EnergyLedgerError(RuntimeError):
    pass


@dataclass(frozen=True)
class PopulationConfig:
    initial: int = 50
    initial_energy: float = 20.0
    capacity: int = 200

    def __post_init__(self):
        require(self.initial >= 0, 'population.initial must be >= 0')
        require(self.capacity >= 1, 'population.capacity must be >= 1')
        require(self.initial <= self.capacity, 'population.initial must not exceed population.capacity')


@dataclass(frozen=True)
class RunConfig:
    label: str = 'baseline'
    seed: int = 0
    max_steps: int = 1_024_000
    checkpoint_every: int = 100_000
    check_energy_ledger: bool = False
    dynamics_stride: int = 1000

    def __post_init__(self):
        require(self.seed >= 0, 'run.seed must be >= 0')
        require(self.max_steps >= 0, 'run.max_steps must be >= 0')
        require(self.checkpoint_every >= 0, 'run.checkpoint_every must be >= 0 (0 disables checkpoints)')
        require(self.dynamics_stride >= 1, 'run.dynamics_stride must be >= 1')


@dataclass(frozen=True)
class NullModelConfig:
    trials: int = 1000
    steps: int = 1000

    def __post_init__(self):
        require(self.trials >= 1, 'null_model.trials must be >= 1')
        require(self.steps >= 0, 'null_model.steps must be >= 0')


@dataclass(frozen=True)
class SimulationConfig:
    arena: ArenaConfig = ArenaConfig()
    physics: SolverConfig = SolverConfig()
    food: FoodConfig = FoodConfig()
    metabolism: MetabolicParams = MetabolicParams()
    hazard: HazardParams = HazardParams()
    birth: BirthParams = BirthParams()
    mutation: MutationParams = MutationParams()
    reproduction: ReproductionParams = ReproductionParams()
    reward: RewardConfig = RewardConfig()
    rl: PpoHyper = PpoHyper()
    population: PopulationConfig = PopulationConfig()
    run: RunConfig = RunConfig()
    null_model: NullModelConfig = NullModelConfig()

    def __post_init__(self):
        food_area = sum(self.food.spec(tag).n_max for tag in self.food.tags) * math.pi * self.arena.food_radius ** 2
        agent_area = self.population.capacity * math.pi * self.arena.agent_radius ** 2
        require(food_area + agent_area < self.arena.width * self.arena.height,
                'arena is too small to hold the food capacity and the population capacity')


@dataclass
class AgentState:
    id: int
    body_id: int
    energy: float
    birth_step: int
    reward_params: RewardParams
    learner: AgentLearner
    parent_id: Optional[int] = None
    pending: Optional[tuple] = None

    def age(self, step: int) -> int:
        return step - self.birth_step


class Population(object):

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.agents: Dict[int, AgentState] = {}
        self.next_id = 0

    def __len__(self):
        return len(self.agents)

    def new_id(self) -> int:
        agent_id = self.next_id
        self.next_id += 1
        return agent_id

    def add(self, agent: AgentState):
        if len(self.agents) >= self.capacity:
            raise OverflowError(f'Population is at its capacity of {self.capacity}')
        self.agents[agent.id] = agent

    def remove(self, agent_id: int) -> AgentState:
        return self.agents.pop(agent_id)

    def ordered(self) -> List[AgentState]:
        return [self.agents[agent_id] for agent_id in sorted(self.agents)]

    @property
    def full(self) -> bool:
        return len(self.agents) >= self.capacity

    def total_energy(self) -> float:
        return math.fsum(agent.energy for agent in self.agents.values())


@dataclass
class EnergyLedger:
    before: float = 0.0
    food_in: float = 0.0
    metabolic_out: float = 0.0
    birth_transfer: float = 0.0
    death_removed: float = 0.0
    after: float = 0.0

    @property
    def residual(self) -> float:
        return (self.after - self.before) - (self.food_in - self.metabolic_out - self.death_removed)

    def balanced(self) -> bool:
        scale = max(1.0, abs(self.before), abs(self.after))
        return abs(self.residual) <= LEDGER_TOLERANCE * scale


class Simulation(object):

    """
    One seeded run: arena, population, random streams and event log.
    """

    def __init__(self, config: SimulationConfig, event_log: Optional[EventLog] = None,
                 checkpoint_store: Optional[CheckpointStore] = None, run_id: Optional[str] = None):
        configure_torch()
        self.config = config
        self.logger = logging.getLogger('simulation')
        self.streams = RngStreams(config.run.seed)
        self.arena = Arena(config.arena, config.food, config.metabolism, config.physics)
        self.population = Population(config.population.capacity)
        self.log = event_log if event_log is not None else EventLog()
        self.checkpoint_store = checkpoint_store
        self.run_id = run_id or f'{config.run.label}-seed{config.run.seed}'
        self.step_count = 0
        self.extinct = False
        self.last_ledger = EnergyLedger()
        self._founder_records: List[EventRecord] = []
        self._initialize()

    def _initialize(self):
        rng = self.streams.stream(0, Purpose.INIT)
        self.arena.populate_food(rng)
        radius = self.config.arena.agent_radius
        for _ in range(self.config.population.initial):
            position = self.arena.sample_free_position(rng, radius)
            if position is None:
                self.logger.warning('No free place left for a founder, starting with fewer agents')
                break
            orientation = rng.uniform(-math.pi, math.pi)
            weights = sample_initial_weights(rng, self.config.reward, self.config.food.kinds)
            agent = self._spawn_agent(position, orientation, self.config.population.initial_energy,
                                      weights, None, 0)
            self._founder_records.append(self._birth_record(0, agent))

    def _spawn_agent(self, position, orientation: float, energy: float, weights: RewardParams,
                     parent_id: Optional[int], step: int) -> AgentState:
        agent_id = self.population.new_id()
        body_id = self.arena.add_agent(position, orientation)
        learner = AgentLearner.create(self.streams.stream(step, Purpose.POLICY_INIT, agent_id),
                                      self.arena.observation_dim, self.config.rl)
        agent = AgentState(agent_id, body_id, energy, step, weights, learner, parent_id)
        self.population.add(agent)
        return agent

    def _birth_record(self, step: int, agent: AgentState) -> EventRecord:
        return EventRecord(step, EventKind.BIRTH, agent.id, {
            'parent_id': agent.parent_id,
            'energy': agent.energy,
            'weights': agent.reward_params.as_dict(),
        })

    def _emit(self, records: Sequence[EventRecord]):
        self.log.extend(records)

    def step(self) -> List[EventRecord]:
        """
        Advance the world by one step.

        :return: the events of this step
        """
        s = self.step_count
        records: List[EventRecord] = list(self._founder_records)
        self._founder_records = []
        config = self.config
        agents = self.population.ordered()
        ledger = EnergyLedger(before=self.population.total_energy())

        action_rng = self.streams.stream(s, Purpose.ACTION)
        for agent in agents:
            observation = self.arena.build_observation(agent.body_id, agent.energy).as_vector()
            if agent.learner.update_due:
                _, _, bootstrap = policy_forward(agent.learner.model, observation)
                stats = agent.learner.update(bootstrap, self.streams.stream(s, Purpose.PPO, agent.id))
                records.append(EventRecord(s, EventKind.UPDATE, agent.id,
                                           dict(stats, update=agent.learner.updates)))
            action, log_prob, value = agent.learner.act(observation, action_rng)
            clipped = self.arena.apply_motor_action(agent.body_id, action)
            agent.pending = (observation, action, log_prob, value, clipped)

        self.arena.step_physics()
        eat_events = self.arena.process_eating()
        eaten_by_body = defaultdict(list)
        for event in eat_events:
            eaten_by_body[event.body_id].append(event)

        food_in, metabolic_out = [], []
        for agent in agents:
            observation, action, log_prob, value, clipped = agent.pending
            agent.pending = None
            eaten = eaten_by_body.get(agent.body_id, [])
            food_in.extend(config.metabolism.gain(event.kind) for event in eaten)
            metabolic_out.append(metabolic_cost(clipped, config.metabolism))
            agent.energy = metabolize(agent.energy, eaten, clipped, config.metabolism)
            counts = Counter(event.kind for event in eaten)
            reward = compute_reward(agent.reward_params, counts, float(np.linalg.norm(clipped)), config.reward)
            agent.learner.buffer.add(observation, action, log_prob, value, reward)
            for event in eaten:
                records.append(EventRecord(s, EventKind.EAT, agent.id, {
                    'food_id': event.food_id, 'food_kind': event.kind.value}))
        ledger.food_in = math.fsum(food_in)
        ledger.metabolic_out = math.fsum(metabolic_out)

        eaten_by_tag = Counter(event.kind for event in eat_events)
        for tag, corner in self.arena.regenerate(eaten_by_tag, self.streams.stream(s, Purpose.FOOD)):
            records.append(EventRecord(s, EventKind.RELOCATION, None,
                                       {'food_kind': tag.value, 'corner': corner}))

        records.extend(self._births_and_deaths(s, agents, ledger))

        self.step_count += 1
        ledger.after = self.population.total_energy()
        self.last_ledger = ledger
        if config.run.check_energy_ledger and not ledger.balanced():
            raise EnergyLedgerError(f'Energy ledger off by {ledger.residual} at step {s}')
        self._emit(records)
        return records

    def _births_and_deaths(self, s: int, agents: List[AgentState], ledger: EnergyLedger) -> List[EventRecord]:
        config = self.config
        records = []
        birth_rng = self.streams.stream(s, Purpose.BIRTH)
        death_rng = self.streams.stream(s, Purpose.DEATH)
        placement_rng = self.streams.stream(s, Purpose.PLACEMENT)
        mutation_rng = self.streams.stream(s, Purpose.MUTATION)
        transfers, removed = [], []
        for agent in agents:
            if not self.population.full and birth_rng.random() < birth_probability(agent.energy, config.birth):
                parent_position = self.arena.bodies.center[self.arena.bodies.index_of(agent.body_id)]
                position = try_place_child(parent_position, self.arena, placement_rng, config.reproduction)
                if position is not None:
                    agent.energy, child_energy = split_energy(agent.energy, config.reproduction.eta)
                    transfers.append(child_energy)
                    weights = mutate_weights(agent.reward_params, mutation_rng, config.mutation)
                    orientation = placement_rng.uniform(-math.pi, math.pi)
                    child = self._spawn_agent(position, orientation, child_energy, weights, agent.id, s)
                    records.append(self._birth_record(s, child))
            age = agent.age(s)
            if death_rng.random() < hazard(age, agent.energy, config.hazard):
                self.population.remove(agent.id)
                self.arena.remove_agent(agent.body_id)
                removed.append(agent.energy)
                records.append(EventRecord(s, EventKind.DEATH, agent.id, {
                    'energy': agent.energy, 'age': age, 'birth_step': agent.birth_step}))
        ledger.birth_transfer = math.fsum(transfers)
        ledger.death_removed = math.fsum(removed)
        return records

    def run(self, max_steps: Optional[int] = None) -> 'Simulation':
        """
        Step until `max_steps` (absolute step count) or extinction.
        """
        max_steps = self.config.run.max_steps if max_steps is None else max_steps
        every = self.config.run.checkpoint_every
        while self.step_count < max_steps:
            if not len(self.population):
                break
            self.step()
            if self.checkpoint_store is not None and every and self.step_count % every == 0:
                self.checkpoint()
        if not len(self.population):
            if not self.extinct:
                self.logger.info(f'Population extinct at step {self.step_count}')
            self.extinct = True
        self.log.flush()
        return self

    def __getstate__(self):
        state = self.__dict__.copy()
        state['checkpoint_store'] = None
        state['logger'] = None
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self.logger = logging.getLogger('simulation')

    def snapshot(self) -> bytes:
        """
        Serialize the full simulation state.  A file-backed event log contributes
        only its write position; in-memory logs are stored with their records.
        """
        buffer = io.BytesIO()
        torch.save({'format_version': FORMAT_VERSION, 'simulation': self}, buffer)
        return buffer.getvalue()

    @classmethod
    def from_snapshot(cls, content: bytes, log_path: Optional[str] = None,
                      checkpoint_store: Optional[CheckpointStore] = None) -> 'Simulation':
        state = torch.load(io.BytesIO(content), weights_only=False)
        if state.get('format_version') != FORMAT_VERSION:
            raise ValueError(f'Unsupported checkpoint format {state.get("format_version")}')
        simulation = state['simulation']
        simulation.checkpoint_store = checkpoint_store
        log_path = log_path or simulation.log.path
        if log_path is not None:
            simulation.log.reopen(log_path)
        configure_torch()
        return simulation

    @classmethod
    def restore(cls, checkpoint_store: CheckpointStore, run_id: str, step: Optional[int] = None,
                log_path: Optional[str] = None) -> Optional['Simulation']:
        """
        Load a stored checkpoint of a run (the latest one unless `step` is given).

        :param log_path: file to continue the event log in; defaults to the run's own
            log file, cut back to the checkpointed step
        :return: the restored simulation, or None when no valid checkpoint exists
        """
        checkpoint = (checkpoint_store.latest(run_id) if step is None
                      else checkpoint_store.load(run_id, step))
        if checkpoint is None:
            logging.error(f'No checkpoint of {run_id} found')
            return None
        if not checkpoint_store.verify(checkpoint):
            logging.error(f'Checksum mismatch in checkpoint of {run_id} at step {checkpoint.step}')
            return None
        try:
            return cls.from_snapshot(checkpoint.decode_content(), log_path, checkpoint_store)
        except ValueError as error:
            logging.error(f'Cannot restore {run_id} at step {checkpoint.step}: {error}')
            return None

    def checkpoint(self) -> bool:
        if self.checkpoint_store is None:
            return False
        self.log.flush()
        stored = self.checkpoint_store.add(self.run_id, self.step_count, self.snapshot())
        if stored:
            self.logger.info(f'Checkpoint of {self.run_id} written at step {self.step_count}')
        return stored


@dataclass
class Metrics:
    final_step: int
    n_births: int
    n_deaths: int
    average_lifetime: Optional[float]
    total_agent_steps: int
    total_eaten: int
    food_consumption_per_step: Optional[float]
    consumption_by_kind: Dict[str, float] = field(default_factory=dict)
    population_series: List[Tuple[int, int]] = field(default_factory=list)
    weight_series: List[Tuple[int, int, Dict[str, Optional[float]]]] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            'final_step': self.final_step,
            'n_births': self.n_births,
            'n_deaths': self.n_deaths,
            'average_lifetime': self.average_lifetime,
            'total_agent_steps': self.total_agent_steps,
            'total_eaten': self.total_eaten,
            'food_consumption_per_step': self.food_consumption_per_step,
            'consumption_by_kind': self.consumption_by_kind,
        }


@dataclass
class AgentSpan:
    agent_id: int
    birth_step: int
    death_step: Optional[int]
    weights: Dict[str, float]
    founder: bool = False

    @property
    def first_active_step(self) -> int:
        """
        Founders act in the step they are placed in; children from the step after their birth.
        """
        return self.birth_step if self.founder else self.birth_step + 1

    def active_steps(self, final_step: int) -> int:
        end = final_step if self.death_step is None else self.death_step + 1
        return max(end - self.first_active_step, 0)


def _scan(records: Iterable[EventRecord]) -> Tuple[List[AgentSpan], List[int], Counter]:
    """
    :return: (lifetime span of every agent born in the log by id, death ages, eats per food kind)
    """
    spans, death_ages, eats = {}, [], Counter()
    for record in records:
        if record.kind == EventKind.BIRTH:
            spans[record.agent_id] = AgentSpan(record.agent_id, record.step, None,
                                               dict(record.payload['weights']),
                                               record.payload.get('parent_id') is None)
        elif record.kind == EventKind.DEATH:
            death_ages.append(record.payload['age'])
            if record.agent_id in spans:
                spans[record.agent_id].death_step = record.step
        elif record.kind == EventKind.EAT:
            eats[record.payload['food_kind']] += 1
    return [spans[agent_id] for agent_id in sorted(spans)], death_ages, eats


def compute_metrics(records: Iterable[EventRecord], final_step: int, stride: int = 1000) -> Metrics:
    """
    Summary statistics of a run from its event log, read in a single pass.

    An agent counts as alive at step s when it was born at or before s and
    has not died at or before s, i.e. the population at the end of step s.
    Agent-steps count the steps each agent acted in: founders from step 0,
    children from the step after their birth, up to and including their
    death step (survivors up to `final_step`).

    :param records: the complete event log (any iterable, e.g. an `EventLog`)
    :param final_step: number of steps the run executed
    :param stride: sampling period of the population and weight series
    """
    spans, death_ages, eats = _scan(records)
    total_eaten = sum(eats.values())
    agent_steps = sum(span.active_steps(final_step) for span in spans)
    per_step = total_eaten / agent_steps if agent_steps else None
    by_kind = {kind: (count / agent_steps if agent_steps else None) for kind, count in sorted(eats.items())}

    births = np.array([span.birth_step for span in spans], dtype=np.float64)
    deaths = np.array([np.inf if span.death_step is None else span.death_step for span in spans])
    names = sorted({name for span in spans for name in span.weights},
                   key=lambda name: ('w_food', 'w_act', 'w_poor', 'w_poison').index(name))
    weights = np.array([[span.weights.get(name, np.nan) for name in names] for span in spans])
    population_series, weight_series = [], []
    for step in range(0, max(final_step, 1), stride):
        alive = (births <= step) & (deaths > step)
        count = int(alive.sum())
        population_series.append((step, count))
        means = {name: (float(weights[alive, k].mean()) if count else None) for k, name in enumerate(names)}
        weight_series.append((step, count, means))

    return Metrics(
        final_step=final_step,
        n_births=len(spans),
        n_deaths=len(death_ages),
        average_lifetime=float(np.mean(death_ages)) if death_ages else None,
        total_agent_steps=int(agent_steps),
        total_eaten=total_eaten,
        food_consumption_per_step=per_step,
        consumption_by_kind=by_kind,
        population_series=population_series,
        weight_series=weight_series,
    )


@dataclass
class RunResult:
    simulation: Simulation
    log: EventLog
    metrics: Metrics
    extinct: bool

    @property
    def records(self) -> List[EventRecord]:
        return self.log.records


def run(config: SimulationConfig, out_dir: Optional[str] = None) -> RunResult:
    """
    Execute a full run, writing `events.jsonl`, `metrics.json` and, when
    checkpointing is enabled, `checkpoints.db` into `out_dir`.
    """
    log_path = store = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        log_path = os.path.join(out_dir, 'events.jsonl')
        if config.run.checkpoint_every:
            store = CheckpointStore(os.path.join(out_dir, 'checkpoints.db'))
    event_log = EventLog(log_path)
    try:
        simulation = Simulation(config, event_log, store).run()
    finally:
        event_log.close()
        if store is not None:
            store.close()
    metrics = compute_metrics(simulation.log, simulation.step_count, config.run.dynamics_stride)
    if out_dir is not None:
        with open(os.path.join(out_dir, 'metrics.json'), 'w', encoding='utf-8') as metrics_file:
            json.dump(dict(metrics.summary(), seed=config.run.seed, label=config.run.label,
                           extinct=simulation.extinct, e_basic=config.metabolism.e_basic,
                           e_act=config.metabolism.e_act), metrics_file, indent=2, sort_keys=True)
    logging.info(f'Run {simulation.run_id} finished at step {simulation.step_count} '
                 f'({len(simulation.population)} agents alive, extinct={simulation.extinct})')
    return RunResult(simulation, simulation.log, metrics, simulation.extinct)
