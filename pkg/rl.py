# Copyright 2026 The rewardevo authors
# This work is licensed under the GNU GPLv3 or later.
# See the COPYING file in the top-level directory.

"""
Per-agent learning: a tanh MLP actor-critic trained with PPO.

Every agent owns an independent learner (network, Adam state and rollout
buffer).  Rollouts are non-episodic: an agent learns from consecutive
windows of N transitions until it dies, and its last partial window is
discarded.
"""

import copy
from dataclasses import dataclass
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch
from torch import nn
from torch.distributions import Normal

from utils.misc import ConfigError, require

ACTION_DIM = 2
ADAM_BETAS = (0.9, 0.999)
DTYPE = torch.float64


@dataclass(frozen=True)
class PpoHyper:
    gamma: float = 0.999
    gae_lambda: float = 0.95
    clip: float = 0.2
    epochs: int = 10
    minibatch: int = 256
    entropy_coeff: float = 0.0
    value_coeff: float = 0.5
    lr: float = 3e-4
    adam_eps: float = 1e-7
    hidden_size: int = 64
    hidden_layers: int = 2
    rollout_steps: int = 1024

    def __post_init__(self):
        require(0 < self.gamma <= 1, 'rl.gamma must be in (0, 1]')
        require(0 < self.gae_lambda <= 1, 'rl.gae_lambda must be in (0, 1]')
        require(self.clip > 0, 'rl.clip must be positive')
        require(self.epochs >= 1, 'rl.epochs must be >= 1')
        require(self.minibatch >= 1, 'rl.minibatch must be >= 1')
        require(self.lr > 0 and self.adam_eps > 0, 'rl.lr and rl.adam_eps must be positive')
        require(self.hidden_size >= 1 and self.hidden_layers >= 1,
                'rl.hidden_size and rl.hidden_layers must be >= 1')
        require(self.rollout_steps >= 1, 'rl.rollout_steps must be >= 1')


def configure_torch():
    # per-agent networks are tiny, run them single-threaded
    torch.set_num_threads(1)


class ActorCritic(nn.Module):

    """
    Shared tanh trunk with a Gaussian action head (state-independent log-std)
    and a scalar value head.
    """

    def __init__(self, observation_dim: int, hidden_size: int = 64, hidden_layers: int = 2,
                 action_dim: int = ACTION_DIM):
        super().__init__()
        self.observation_dim = observation_dim
        layers = []
        width = observation_dim
        for _ in range(hidden_layers):
            layers += [nn.Linear(width, hidden_size, dtype=DTYPE), nn.Tanh()]
            width = hidden_size
        self.trunk = nn.Sequential(*layers)
        self.actor = nn.Linear(width, action_dim, dtype=DTYPE)
        self.log_std = nn.Parameter(torch.zeros(action_dim, dtype=DTYPE))
        self.critic = nn.Linear(width, 1, dtype=DTYPE)

    def reset_parameters(self, generator: torch.Generator):
        for module in self.trunk:
            if isinstance(module, nn.Linear):
                nn.init.orthogonal_(module.weight, gain=math.sqrt(2), generator=generator)
                nn.init.zeros_(module.bias)
        nn.init.orthogonal_(self.actor.weight, gain=0.01, generator=generator)
        nn.init.zeros_(self.actor.bias)
        nn.init.orthogonal_(self.critic.weight, gain=1.0, generator=generator)
        nn.init.zeros_(self.critic.bias)
        with torch.no_grad():
            self.log_std.zero_()

    def forward(self, observations: torch.Tensor):
        features = self.trunk(observations)
        mean = self.actor(features)
        return mean, self.log_std.expand_as(mean), self.critic(features).squeeze(-1)


class RolloutBuffer(object):

    """
    Fixed-capacity store of transitions; an update is due exactly when it is full.
    """

    def __init__(self, capacity: int, observation_dim: int):
        self.capacity = capacity
        self.observations = np.zeros((capacity, observation_dim))
        self.actions = np.zeros((capacity, ACTION_DIM))
        self.log_probs = np.zeros(capacity)
        self.values = np.zeros(capacity)
        self.rewards = np.zeros(capacity)
        self.dones = np.zeros(capacity)
        self.size = 0

    def __len__(self):
        return self.size

    @property
    def full(self) -> bool:
        return self.size == self.capacity

    def add(self, observation, action, log_prob: float, value: float, reward: float, done: bool = False):
        if self.full:
            raise OverflowError('Rollout buffer is full, run an update first')
        i = self.size
        self.observations[i] = observation
        self.actions[i] = action
        self.log_probs[i] = log_prob
        self.values[i] = value
        self.rewards[i] = reward
        self.dones[i] = float(done)
        self.size += 1

    def clear(self):
        self.size = 0

    def arrays(self) -> Dict[str, np.ndarray]:
        """
        Views of the filled part of the buffer.
        """
        n = self.size
        return {
            'observations': self.observations[:n],
            'actions': self.actions[:n],
            'log_probs': self.log_probs[:n],
            'values': self.values[:n],
            'rewards': self.rewards[:n],
            'dones': self.dones[:n],
        }


def _as_tensor(array) -> torch.Tensor:
    return torch.as_tensor(np.asarray(array, dtype=np.float64), dtype=DTYPE)


def init_policy(rng: np.random.Generator, observation_dim: int,
                hyper: PpoHyper = PpoHyper()) -> Tuple[ActorCritic, torch.optim.Adam]:
    """
    Fresh, randomly initialised policy and Adam state for a newborn.

    Weights are orthogonal (gain sqrt(2) in the trunk, 0.01 for the action
    mean, 1 for the value), biases and log-std start at zero.
    """
    generator = torch.Generator().manual_seed(int(rng.integers(2 ** 62)))
    model = ActorCritic(observation_dim, hyper.hidden_size, hyper.hidden_layers)
    model.reset_parameters(generator)
    optimizer = torch.optim.Adam(model.parameters(), lr=hyper.lr, betas=ADAM_BETAS, eps=hyper.adam_eps)
    return model, optimizer


def policy_forward(model: ActorCritic, observation) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    :return: (action mean, action std, value) for one observation
    """
    observation = np.asarray(observation, dtype=np.float64)
    if observation.shape[-1] != model.observation_dim:
        raise ConfigError(f'Observation has {observation.shape[-1]} dimensions, '
                          f'the policy expects {model.observation_dim}')
    with torch.no_grad():
        mean, log_std, value = model(_as_tensor(observation))
    return mean.detach().numpy().copy(), np.exp(log_std.detach().numpy()), float(value)


def gaussian_log_prob(action, mean, std) -> float:
    action, mean, std = (np.asarray(x, dtype=np.float64) for x in (action, mean, std))
    z = (action - mean) / std
    return float(np.sum(-0.5 * z * z - np.log(std) - 0.5 * math.log(2 * math.pi)))


def sample_action(mean, std, rng: np.random.Generator) -> Tuple[np.ndarray, float]:
    """
    Draw from the diagonal Gaussian policy.  The log-probability is that of
    the raw sample; clipping happens in the environment.
    """
    mean = np.asarray(mean, dtype=np.float64)
    std = np.asarray(std, dtype=np.float64)
    action = mean + std * rng.standard_normal(mean.shape)
    return action, gaussian_log_prob(action, mean, std)


def compute_gae(rewards, values, bootstrap_value: float, dones, gamma: float, lam: float):
    """
    Generalised advantage estimation.

        delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t
        A_t = delta_t + gamma * lam * (1 - done_t) * A_{t+1}

    :return: (advantages, returns = advantages + values)
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    if not (len(rewards) == len(values) == len(dones)):
        raise ValueError('rewards, values and dones must have equal lengths')
    advantages = np.zeros_like(rewards)
    running = 0.0
    for t in reversed(range(len(rewards))):
        next_value = bootstrap_value if t == len(rewards) - 1 else values[t + 1]
        nonterminal = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_value * nonterminal - values[t]
        running = delta + gamma * lam * nonterminal * running
        advantages[t] = running
    return advantages, advantages + values


def normalize_advantages(advantages) -> np.ndarray:
    advantages = np.asarray(advantages, dtype=np.float64)
    std = advantages.std()
    if std == 0:
        return advantages - advantages.mean()
    return (advantages - advantages.mean()) / std


def clipped_surrogate(ratio: torch.Tensor, advantages: torch.Tensor, clip: float) -> torch.Tensor:
    return torch.minimum(ratio * advantages, torch.clamp(ratio, 1 - clip, 1 + clip) * advantages)


def ppo_loss(model: ActorCritic, observations: torch.Tensor, actions: torch.Tensor,
             old_log_probs: torch.Tensor, advantages: torch.Tensor, returns: torch.Tensor,
             hyper: PpoHyper) -> Tuple[torch.Tensor, Dict[str, float]]:
    """
    Negative clipped surrogate + value_coeff * value MSE - entropy_coeff * entropy.
    """
    mean, log_std, values = model(observations)
    distribution = Normal(mean, log_std.exp())
    log_probs = distribution.log_prob(actions).sum(-1)
    ratio = torch.exp(log_probs - old_log_probs)
    policy_loss = -clipped_surrogate(ratio, advantages, hyper.clip).mean()
    value_loss = ((values - returns) ** 2).mean()
    entropy = distribution.entropy().sum(-1).mean()
    loss = policy_loss + hyper.value_coeff * value_loss - hyper.entropy_coeff * entropy
    stats = {
        'policy_loss': float(policy_loss.detach()),
        'value_loss': float(value_loss.detach()),
        'entropy': float(entropy.detach()),
        'clip_fraction': float(((ratio - 1).abs() > hyper.clip).double().mean()),
    }
    return loss, stats


def adam_step(params: Sequence[torch.Tensor], grads: Sequence[Optional[torch.Tensor]],
              state: torch.optim.Adam, lr: float, eps: float):
    """
    One bias-corrected Adam step (betas 0.9 / 0.999) with the given gradients.

    :return: (params, state), both updated in place
    """
    for param, grad in zip(params, grads):
        param.grad = None if grad is None else grad.detach().clone()
    for group in state.param_groups:
        group['lr'] = lr
        group['eps'] = eps
    state.step()
    return params, state


def ppo_update(model: ActorCritic, optimizer: torch.optim.Adam, buffer: RolloutBuffer,
               hyper: PpoHyper, rng: np.random.Generator, bootstrap_value: float = 0.0):
    """
    Clipped-surrogate PPO over one full rollout.

    Advantages are normalised per rollout, then `epochs` passes over shuffled
    minibatches are taken.  A non-finite loss aborts the update and restores
    the parameters and optimiser state from before it.

    :return: (model, optimizer, stats)
    """
    if not buffer.full:
        raise ValueError(f'PPO update needs a full buffer ({len(buffer)}/{buffer.capacity})')
    advantages, returns = compute_gae(buffer.rewards, buffer.values, bootstrap_value,
                                      buffer.dones, hyper.gamma, hyper.gae_lambda)
    advantages = normalize_advantages(advantages)
    observations = _as_tensor(buffer.observations)
    actions = _as_tensor(buffer.actions)
    old_log_probs = _as_tensor(buffer.log_probs)
    advantages_t = _as_tensor(advantages)
    returns_t = _as_tensor(returns)

    saved_model = copy.deepcopy(model.state_dict())
    saved_optimizer = copy.deepcopy(optimizer.state_dict())
    params = list(model.parameters())
    history: List[Dict[str, float]] = []
    for _ in range(hyper.epochs):
        order = rng.permutation(buffer.capacity)
        for start in range(0, buffer.capacity, hyper.minibatch):
            batch = torch.as_tensor(order[start:start + hyper.minibatch])
            loss, stats = ppo_loss(model, observations[batch], actions[batch], old_log_probs[batch],
                                   advantages_t[batch], returns_t[batch], hyper)
            if not torch.isfinite(loss):
                model.load_state_dict(saved_model)
                optimizer.load_state_dict(saved_optimizer)
                logging.warning('Non-finite PPO loss, update aborted and parameters restored')
                return model, optimizer, {'aborted': True}
            optimizer.zero_grad()
            loss.backward()
            adam_step(params, [p.grad for p in params], optimizer, hyper.lr, hyper.adam_eps)
            history.append(stats)
    summary = {key: float(np.mean([stats[key] for stats in history])) for key in history[0]}
    summary['aborted'] = False
    return model, optimizer, summary


class AgentLearner(object):

    """
    Policy, optimiser and rollout buffer of one agent.
    """

    def __init__(self, model: ActorCritic, optimizer: torch.optim.Adam, hyper: PpoHyper):
        self.model = model
        self.optimizer = optimizer
        self.hyper = hyper
        self.buffer = RolloutBuffer(hyper.rollout_steps, model.observation_dim)
        self.updates = 0

    @classmethod
    def create(cls, rng: np.random.Generator, observation_dim: int, hyper: PpoHyper) -> 'AgentLearner':
        model, optimizer = init_policy(rng, observation_dim, hyper)
        return cls(model, optimizer, hyper)

    def act(self, observation, rng: np.random.Generator) -> Tuple[np.ndarray, float, float]:
        """
        :return: (raw action, its log-probability, value estimate)
        """
        mean, std, value = policy_forward(self.model, observation)
        action, log_prob = sample_action(mean, std, rng)
        return action, log_prob, value

    @property
    def update_due(self) -> bool:
        return self.buffer.full

    def update(self, bootstrap_value: float, rng: np.random.Generator) -> Dict[str, float]:
        self.model, self.optimizer, stats = ppo_update(
            self.model, self.optimizer, self.buffer, self.hyper, rng, bootstrap_value)
        self.buffer.clear()
        self.updates += 1
        return stats
