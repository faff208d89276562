"""
Multi-Agent Environment
Runs the per-timeslot loop shared by every DRL scheduler: agents act on their own
devices, the environment step computes all rates at once, rewards are formed in
edge or centralized mode and fed back for learning.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..errors import ConfigurationError
from ..link.adaptation import McsTable, build_tables
from ..link.technology import Technology, w_to_dbm
from ..network.channel import Realization
from .base import HyperParams, SchedulingAgent
from .ddpgn import DdpgnAgent
from .dqn import DqnAgent
from .mdp import (
    ActionMode,
    ActionSpace,
    RewardCalculator,
    RewardMode,
    action_to_power,
    build_critic_state,
    build_state,
    state_hash,
    step_rates,
)
from .pgn import PgnAgent

logger = logging.getLogger(__name__)

ALGORITHMS = {"dqn": DqnAgent, "pgn": PgnAgent, "ddpgn": DdpgnAgent}
TRACE_COLUMNS = ("realization_id", "t", "device", "state_hash", "action_dbm", "power_dbm", "rate", "reward")


def parse_drl_scheduler(name: str) -> Tuple[str, ActionMode]:
    """Split 'dqn_ia' style names into (algorithm, action mode)."""
    algorithm, _, mode = str(name).lower().partition("_")
    if algorithm not in ALGORITHMS or mode not in {m.value for m in ActionMode}:
        raise ConfigurationError(f"Unknown DRL scheduler '{name}'")
    return algorithm, ActionMode(mode)


@dataclass
class EpisodeResult:
    """Per-timeslot outcome of one realization."""

    realization_id: str
    rates: np.ndarray
    powers_w: np.ndarray
    rewards: np.ndarray
    trace: List[Dict[str, object]] = field(default_factory=list)
    states: Optional[np.ndarray] = None
    critic_states: Optional[np.ndarray] = None


class MultiAgentEnvironment:
    """Owns one agent per (cell, technology) and steps them through realizations."""

    def __init__(
        self,
        scheduler: str,
        num_cells: int,
        hyper: Optional[HyperParams] = None,
        tables: Optional[Mapping[Technology, McsTable]] = None,
        seed: int = 0,
    ):
        self.algorithm, self.mode = parse_drl_scheduler(scheduler)
        self.hyper = hyper or HyperParams()
        self.tables = tables or build_tables()
        self.num_cells = num_cells
        self.seed = seed
        self.ratio_width = num_cells
        self.critic_width = num_cells if self.algorithm == "ddpgn" else 0
        self.agents: Dict[Tuple[int, Technology], SchedulingAgent] = {}

    @property
    def scheduler(self) -> str:
        return f"{self.algorithm}_{self.mode.value}"

    def agent_for(self, cell: int, tech: Technology) -> SchedulingAgent:
        key = (int(cell), Technology.parse(tech))
        if key not in self.agents:
            tech_index = list(Technology).index(key[1])
            self.agents[key] = ALGORITHMS[self.algorithm](
                cell=key[0],
                tech=key[1],
                action_space=ActionSpace.for_tech(self.mode, key[1], self.hyper.action_levels),
                state_width=self.ratio_width + 2,
                critic_width=self.critic_width,
                hyper=self.hyper,
                rng=np.random.default_rng([self.seed, key[0], tech_index]),
            )
            logger.debug("Created %s agent %s", self.algorithm, self.agents[key].agent_id)
        return self.agents[key]

    def _groups(self, realization: Realization) -> List[Tuple[SchedulingAgent, np.ndarray]]:
        techs = np.array([t.value for t in realization.techs])
        groups = []
        for cell in np.unique(realization.cell_ids):
            for tech in Technology:
                devices = np.flatnonzero((realization.cell_ids == cell) & (techs == tech.value))
                if devices.size:
                    groups.append((self.agent_for(cell, tech), devices))
        return groups

    def _states(self, realization: Realization, t: int, prev_power: np.ndarray, prev_rate: np.ndarray) -> np.ndarray:
        return np.array([
            build_state(realization, t, n, prev_power[n], prev_rate[n]).vector(self.ratio_width)
            for n in range(realization.num_devices)
        ])

    def _critic_states(self, realization: Realization, t: int) -> np.ndarray:
        if not self.critic_width:
            return np.zeros((realization.num_devices, 0))
        return np.array([
            build_critic_state(realization, t, n, self.critic_width) for n in range(realization.num_devices)
        ])

    def run_episode(
        self,
        realization: Realization,
        train: bool,
        reward: Optional[RewardCalculator] = None,
        random_actions: bool = False,
        keep_trace: bool = False,
        keep_states: bool = False,
    ) -> EpisodeResult:
        """
        Step every agent through the timeslots of one realization.

        With ``train`` the agents explore and learn from ``reward``; otherwise they
        execute their current policies. Previous power and rate start at 0.
        """
        if realization.cell_ids.max() >= self.num_cells:
            raise ConfigurationError(f"realization has more than {self.num_cells} cells")
        reward = reward or RewardCalculator(RewardMode.EDGE)
        groups = self._groups(realization)
        n_dev, n_t = realization.num_devices, realization.timeslots
        gamma_max = np.array([self.tables[t].gamma_max for t in realization.techs])
        co_sets = [realization.co_channel(n) for n in range(n_dev)]

        rates = np.zeros((n_t, n_dev))
        powers = np.zeros((n_t, n_dev))
        rewards = np.zeros((n_t, n_dev))
        all_states, all_critic, trace = [], [], []
        prev_power, prev_rate = np.zeros(n_dev), np.zeros(n_dev)

        for t in range(n_t):
            states = self._states(realization, t, prev_power, prev_rate)
            critic_states = self._critic_states(realization, t)
            serving = realization.serving_gain(t)
            action_dbm = np.zeros(n_dev)
            decisions = []
            for agent, devices in groups:
                if random_actions:
                    decision = agent.random_decision(devices.size)
                else:
                    decision = agent.act(states[devices], critic_states[devices], explore=train)
                decisions.append(decision)
                action_dbm[devices] = decision.action_dbm
                powers[t, devices] = action_to_power(
                    agent.action_space, decision.action_dbm, serving[devices], gamma_max[devices], realization.noise_w
                )

            # barrier: every agent's power is needed before any rate is known
            rates[t] = step_rates(realization, t, powers[t], self.tables)
            rewards[t] = reward(realization, rates[t], co_sets)

            if train and not random_actions:
                next_states = self._states(realization, min(t + 1, n_t - 1), powers[t], rates[t])
                for (agent, devices), decision in zip(groups, decisions):
                    agent.observe(
                        states[devices], critic_states[devices], decision, rewards[t, devices], next_states[devices]
                    )
            if keep_trace:
                trace.extend(
                    {
                        "realization_id": realization.realization_id,
                        "t": t,
                        "device": n,
                        "state_hash": state_hash(states[n]),
                        "action_dbm": float(action_dbm[n]),
                        "power_dbm": float(w_to_dbm(powers[t, n])),
                        "rate": float(rates[t, n]),
                        "reward": float(rewards[t, n]),
                    }
                    for n in range(n_dev)
                )
            if keep_states:
                all_states.append(states)
                all_critic.append(critic_states)
            prev_power, prev_rate = powers[t], rates[t]

        if train and not random_actions:
            for agent, _ in groups:
                agent.end_episode()

        return EpisodeResult(
            realization_id=realization.realization_id,
            rates=rates,
            powers_w=powers,
            rewards=rewards,
            trace=trace,
            states=np.array(all_states) if keep_states else None,
            critic_states=np.array(all_critic) if keep_states else None,
        )

    def warmup(self, realizations: Sequence[Realization]) -> None:
        """Fit each agent's state standardization on random-action episodes, then freeze it."""
        collected: Dict[Tuple[int, Technology], Tuple[list, list]] = {}
        for realization in realizations:
            result = self.run_episode(realization, train=False, random_actions=True, keep_states=True)
            for agent, devices in self._groups(realization):
                states, critic = collected.setdefault((agent.cell, agent.tech), ([], []))
                rows = result.states.shape[0] * devices.size
                states.append(result.states[:, devices].reshape(rows, result.states.shape[-1]))
                critic.append(result.critic_states[:, devices].reshape(rows, result.critic_states.shape[-1]))
        for key, (states, critic) in collected.items():
            self.agents[key].fit_normalizers(np.vstack(states), np.vstack(critic))
        logger.info("Fitted state normalization for %d agents", len(collected))

    def train(
        self, realizations: Sequence[Realization], reward_mode=RewardMode.EDGE
    ) -> Tuple[List[EpisodeResult], RewardCalculator]:
        """One training episode per realization, in order."""
        reward = RewardCalculator(reward_mode)
        if self.hyper.warmup_realizations > 0:
            self.warmup(realizations[:self.hyper.warmup_realizations])
        results = []
        for k, realization in enumerate(realizations):
            results.append(self.run_episode(realization, train=True, reward=reward))
            if (k + 1) % 50 == 0:
                logger.info("Trained %s on %d/%d realizations", self.scheduler, k + 1, len(realizations))
        return results, reward

    def freeze(self) -> None:
        for agent in self.agents.values():
            agent.freeze()

    def evaluate(
        self, realizations: Sequence[Realization], keep_trace: bool = False
    ) -> Tuple[List[EpisodeResult], RewardCalculator]:
        """Distributed execution of the frozen policies; rewards use the edge path only."""
        self.freeze()
        reward = RewardCalculator(RewardMode.EDGE)
        results = [self.run_episode(r, train=False, reward=reward, keep_trace=keep_trace) for r in realizations]
        return results, reward

    def save(self, directory) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for agent in self.agents.values():
            agent.save(directory)
        return directory

    def load(self, directory, realization: Realization) -> None:
        for agent, _ in self._groups(realization):
            agent.load(directory)
