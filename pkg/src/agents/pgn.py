"""
PGN Agent
Softmax policy over discrete actions trained by per-timeslot REINFORCE ascent.
"""
from typing import Dict

import numpy as np

from ..neural.adam import AdamState, adam_step
from ..neural.losses import policy_distribution, policy_gradient
from ..neural.mlp import MlpParams
from .base import ActionDecision, SchedulingAgent


class PgnAgent(SchedulingAgent):
    algorithm = "pgn"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.policy = MlpParams.init(self.state_width, self.action_space.size, self.rng)
        self.optimizer = AdamState.for_params(self.policy, self.hyper.lr_policy)

    def networks(self) -> Dict[str, MlpParams]:
        return {"policy": self.policy}

    def set_networks(self, networks: Dict[str, MlpParams]) -> None:
        self.policy = networks["policy"]

    def probabilities(self, states) -> np.ndarray:
        return np.atleast_2d(policy_distribution(self.policy, self.normalizer.apply(states)))

    def act(self, states, critic_states, explore: bool) -> ActionDecision:
        probs = self.probabilities(states)
        if explore and not self.frozen:
            cumulative = np.cumsum(probs, axis=1)
            draws = self.rng.random((probs.shape[0], 1))
            tokens = np.minimum((draws > cumulative).sum(axis=1), self.action_space.size - 1)
        else:
            tokens = np.argmax(probs, axis=1)
        return ActionDecision(action_dbm=self.action_space.levels_dbm[tokens], tokens=tokens)

    def observe(self, states, critic_states, decision, rewards, next_states) -> None:
        """Ascend sum_n R_n ln pi(a_n | s_n) once per timeslot."""
        normalized = self.normalizer.apply(states)
        total = None
        for state, token, reward in zip(normalized, decision.tokens, rewards):
            _, grads = policy_gradient(self.policy, state, int(token), float(reward))
            total = grads if total is None else total + grads
        if total is not None:
            self.policy, self.optimizer = adam_step(self.policy, total, self.optimizer, maximize=True)

        self._remember_rewards(rewards)
