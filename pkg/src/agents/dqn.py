"""
DQN Agent
Epsilon-greedy Q-network over discrete interference or power levels, trained
from experience replay towards the instantaneous reward.
"""
import logging
from typing import Dict

import numpy as np

from ..neural.adam import AdamState, adam_step
from ..neural.losses import q_regression
from ..neural.mlp import MlpParams, forward
from ..neural.replay import Experience, ReplayMemory
from .base import ActionDecision, SchedulingAgent

logger = logging.getLogger(__name__)


class DqnAgent(SchedulingAgent):
    """Q(s, .) over |A| discrete actions; ties in argmax go to the lowest index."""

    algorithm = "dqn"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.q = MlpParams.init(self.state_width, self.action_space.size, self.rng)
        self.optimizer = AdamState.for_params(self.q, self.hyper.lr_q)
        self.memory = ReplayMemory(self.hyper.replay_capacity, self.hyper.batch_size)
        self.updates = 0

    def networks(self) -> Dict[str, MlpParams]:
        return {"q": self.q}

    def set_networks(self, networks: Dict[str, MlpParams]) -> None:
        self.q = networks["q"]

    def act(self, states, critic_states, explore: bool) -> ActionDecision:
        values = np.atleast_2d(forward(self.q, self.normalizer.apply(states)))
        tokens = np.argmax(values, axis=1)
        # one exploration draw per agent and timeslot
        if explore and not self.frozen and self.rng.random() < self.hyper.epsilon:
            tokens = self.rng.integers(self.action_space.size, size=tokens.size)
        return ActionDecision(action_dbm=self.action_space.levels_dbm[tokens], tokens=tokens)

    def observe(self, states, critic_states, decision, rewards, next_states) -> None:
        for state, token, reward, next_state in zip(states, decision.tokens, rewards, next_states):
            self.memory.insert(Experience(state, int(token), float(reward), next_state))

    def end_episode(self) -> None:
        """One minibatch regression of Q(s, a) onto the stored reward (no bootstrap term)."""
        batch = self.memory.sample(self.rng)
        if batch is None:
            return
        states = self.normalizer.apply(np.array([e.state for e in batch]))
        actions = np.array([e.action for e in batch])
        rewards = np.array([e.reward for e in batch])
        _, grads = q_regression(self.q, states, actions, rewards)
        self.q, self.optimizer = adam_step(self.q, grads, self.optimizer)
        self.updates += 1
        self._consider_snapshot(float(rewards.sum()))
