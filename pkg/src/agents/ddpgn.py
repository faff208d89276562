"""
DDPGN Agent
Deterministic actor with a sigmoid-bounded continuous action and a critic
regressed onto the instantaneous reward; critic first, then actor ascent.
"""
from typing import Dict

import numpy as np

from ..neural.adam import AdamState, adam_step
from ..neural.losses import actor_objective, critic_regression, squash
from ..neural.mlp import MlpParams, forward
from .base import ActionDecision, SchedulingAgent


class DdpgnAgent(SchedulingAgent):
    algorithm = "ddpgn"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.actor = MlpParams.init(self.state_width, 1, self.rng)
        self.critic = MlpParams.init(self.critic_width + 1, 1, self.rng)
        self.actor_optimizer = AdamState.for_params(self.actor, self.hyper.lr_actor)
        self.critic_optimizer = AdamState.for_params(self.critic, self.hyper.lr_critic)

    def networks(self) -> Dict[str, MlpParams]:
        return {"actor": self.actor, "critic": self.critic}

    def set_networks(self, networks: Dict[str, MlpParams]) -> None:
        self.actor = networks["actor"]
        self.critic = networks["critic"]

    def unit_actions(self, states) -> np.ndarray:
        return squash(np.atleast_2d(forward(self.actor, self.normalizer.apply(states)))[:, 0])

    def act(self, states, critic_states, explore: bool) -> ActionDecision:
        u = self.unit_actions(states)
        if explore and not self.frozen and self.hyper.ddpg_noise_std > 0:
            u = np.clip(u + self.rng.normal(0.0, self.hyper.ddpg_noise_std, size=u.size), 0.0, 1.0)
        return ActionDecision(action_dbm=self.action_space.from_unit(u), tokens=u)

    def observe(self, states, critic_states, decision, rewards, next_states) -> None:
        critic_inputs = self.critic_normalizer.apply(critic_states)
        _, critic_grads = critic_regression(self.critic, critic_inputs, decision.tokens, rewards)
        self.critic, self.critic_optimizer = adam_step(self.critic, critic_grads, self.critic_optimizer)

        normalized = self.normalizer.apply(states)
        total = None
        for state, critic_state in zip(normalized, critic_inputs):
            _, grads = actor_objective(self.actor, self.critic, state, critic_state)
            total = grads if total is None else total + grads
        if total is not None:
            self.actor, self.actor_optimizer = adam_step(self.actor, total, self.actor_optimizer, maximize=True)

        self._remember_rewards(rewards)
