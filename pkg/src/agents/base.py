"""
Base scheduling agent interface.
"""
import logging
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from ..link.technology import Technology
from ..neural.mlp import MlpParams, load_checkpoint, save_checkpoint
from .mdp import ActionSpace, StateNormalizer

logger = logging.getLogger(__name__)


@dataclass
class HyperParams:
    """DRL hyper-parameters."""

    action_levels: int = 10
    epsilon: float = 0.2
    replay_capacity: int = 500_000
    batch_size: int = 500
    lr_q: float = 1e-4
    lr_policy: float = 1e-4
    lr_actor: float = 1e-4
    lr_critic: float = 1e-4
    ddpg_noise_std: float = 0.0
    warmup_realizations: int = 1


@dataclass
class ActionDecision:
    """Actions chosen for the devices of one agent in one timeslot."""

    action_dbm: np.ndarray
    tokens: np.ndarray


class SchedulingAgent(ABC):
    """One learner per (cell, technology), serving every device of that pair."""

    algorithm = "base"

    def __init__(
        self,
        cell: int,
        tech: Technology,
        action_space: ActionSpace,
        state_width: int,
        critic_width: int,
        hyper: HyperParams,
        rng: np.random.Generator,
    ):
        self.cell = cell
        self.tech = Technology.parse(tech)
        self.action_space = action_space
        self.state_width = state_width
        self.critic_width = critic_width
        self.hyper = hyper
        self.rng = rng
        self.normalizer = StateNormalizer.identity(state_width)
        self.critic_normalizer = StateNormalizer.identity(critic_width)
        self.best_reward = -np.inf
        self.best_params: Optional[Dict[str, MlpParams]] = None
        self.reward_memory = deque(maxlen=hyper.batch_size)
        self.frozen = False

    @property
    def agent_id(self) -> str:
        return f"b{self.cell}-{self.tech.value}"

    @abstractmethod
    def networks(self) -> Dict[str, MlpParams]:
        """Current parameters by role name."""
        pass

    @abstractmethod
    def set_networks(self, networks: Dict[str, MlpParams]) -> None:
        """Replace the current parameters."""
        pass

    @abstractmethod
    def act(self, states: np.ndarray, critic_states: np.ndarray, explore: bool) -> ActionDecision:
        """Choose actions for a (devices, state) batch of raw states."""
        pass

    @abstractmethod
    def observe(
        self,
        states: np.ndarray,
        critic_states: np.ndarray,
        decision: ActionDecision,
        rewards: np.ndarray,
        next_states: np.ndarray,
    ) -> None:
        """Learn from one timeslot of experience."""
        pass

    def end_episode(self) -> None:
        """Hook called after the last timeslot of a training realization."""

    def random_decision(self, count: int) -> ActionDecision:
        """Uniform random actions, used to collect warmup states."""
        tokens = self.rng.integers(self.action_space.size, size=count)
        return ActionDecision(action_dbm=self.action_space.levels_dbm[tokens], tokens=tokens)

    def _consider_snapshot(self, reward_sum: float) -> None:
        """Keep the parameters that achieved the largest summed reward."""
        if reward_sum > self.best_reward:
            self.best_reward = reward_sum
            self.best_params = {name: p.copy() for name, p in self.networks().items()}
            logger.debug("%s %s: new best reward %.3f", self.algorithm, self.agent_id, reward_sum)

    def _remember_rewards(self, rewards) -> None:
        """Fill the reward memory; each time it is full, offer its sum as a snapshot and clear it."""
        for reward in rewards:
            self.reward_memory.append(float(reward))
            if len(self.reward_memory) == self.reward_memory.maxlen:
                self._consider_snapshot(float(sum(self.reward_memory)))
                self.reward_memory.clear()

    def freeze(self) -> None:
        """Switch to the best snapshot for distributed execution."""
        if self.best_params is not None:
            self.set_networks({name: p.copy() for name, p in self.best_params.items()})
        self.frozen = True

    def fit_normalizers(self, states: np.ndarray, critic_states: np.ndarray) -> None:
        self.normalizer = StateNormalizer.fit(states)
        self.critic_normalizer = StateNormalizer.fit(critic_states)

    def save(self, directory) -> None:
        meta = {
            "algorithm": self.algorithm,
            "agent": self.agent_id,
            "mode": self.action_space.mode.value,
            "normalizer": {"mean": self.normalizer.mean.tolist(), "scale": self.normalizer.scale.tolist()},
            "critic_normalizer": {
                "mean": self.critic_normalizer.mean.tolist(),
                "scale": self.critic_normalizer.scale.tolist(),
            },
        }
        for name, params in self.networks().items():
            save_checkpoint(f"{directory}/{self.algorithm}_{self.agent_id}_{name}.bin", params, meta)

    def load(self, directory) -> None:
        networks = {}
        for name in self.networks():
            params, meta = load_checkpoint(f"{directory}/{self.algorithm}_{self.agent_id}_{name}.bin")
            networks[name] = params
        self.set_networks(networks)
        self.normalizer = StateNormalizer(
            mean=np.asarray(meta["normalizer"]["mean"]), scale=np.asarray(meta["normalizer"]["scale"])
        )
        self.critic_normalizer = StateNormalizer(
            mean=np.asarray(meta["critic_normalizer"]["mean"]), scale=np.asarray(meta["critic_normalizer"]["scale"])
        )
        self.frozen = True
