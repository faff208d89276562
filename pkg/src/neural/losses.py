"""
Training Objectives
Loss and objective functions of the three network roles with their gradients:
Q regression, softmax policy gradient and the actor-critic pair.
"""
from typing import Tuple

import numpy as np
from scipy.special import expit, log_softmax, softmax

from ..errors import ContractViolation
from .mlp import MlpParams, backward, forward


def policy_distribution(params: MlpParams, state) -> np.ndarray:
    """Softmax over the linear output layer."""
    return softmax(forward(params, state), axis=-1)


def squash(raw) -> np.ndarray:
    """Bounded actor output in [0, 1]."""
    return expit(raw)


def q_regression(params: MlpParams, states, actions, targets) -> Tuple[float, MlpParams]:
    """
    Mean squared error between Q(s, a) and the regression targets.

    Returns:
        (loss, gradient of the loss w.r.t. the parameters)
    """
    states = np.atleast_2d(np.asarray(states, dtype=float))
    actions = np.asarray(actions, dtype=int)
    targets = np.asarray(targets, dtype=float)
    if actions.shape != (states.shape[0],) or targets.shape != actions.shape:
        raise ContractViolation("states, actions and targets must align")
    rows = np.arange(actions.size)
    q = forward(params, states)
    error = q[rows, actions] - targets
    upstream = np.zeros_like(q)
    upstream[rows, actions] = 2.0 * error / actions.size
    grads, _ = backward(params, states, upstream)
    return float(np.mean(error ** 2)), grads


def policy_gradient(params: MlpParams, state, action: int, reward: float) -> Tuple[float, MlpParams]:
    """
    REINFORCE objective R * ln pi(a | s).

    Returns:
        (objective, gradient of the objective w.r.t. the parameters)
    """
    logits = forward(params, state)
    log_pi = log_softmax(logits)
    upstream = -reward * np.exp(log_pi)
    upstream[action] += reward
    grads, _ = backward(params, state, upstream)
    return float(reward * log_pi[action]), grads


def critic_regression(critic: MlpParams, critic_states, actions, targets) -> Tuple[float, MlpParams]:
    """Mean squared error of Q_C([critic_state, u]) against the targets; u in [0, 1]."""
    critic_states = np.atleast_2d(np.asarray(critic_states, dtype=float))
    actions = np.asarray(actions, dtype=float).reshape(-1, 1)
    targets = np.asarray(targets, dtype=float)
    inputs = np.hstack([critic_states, actions])
    q = forward(critic, inputs)[:, 0]
    error = q - targets
    grads, _ = backward(critic, inputs, (2.0 * error / error.size)[:, None])
    return float(np.mean(error ** 2)), grads


def actor_objective(
    actor: MlpParams,
    critic: MlpParams,
    actor_state,
    critic_state,
) -> Tuple[float, MlpParams]:
    """
    Critic value of the actor's action, Q_C([critic_state, squash(actor(s))]).

    The critic is held fixed; only the actor receives a gradient (chain rule
    dQ/du * du/dz * dz/dw).
    """
    raw = forward(actor, actor_state)
    if raw.shape != (1,):
        raise ContractViolation("the actor must have a single output")
    u = squash(raw)
    critic_input = np.concatenate([np.asarray(critic_state, dtype=float), u])
    value = forward(critic, critic_input)[0]
    _, input_grad = backward(critic, critic_input, np.ones(1))
    dq_du = input_grad[-1]
    grads, _ = backward(actor, actor_state, dq_du * u * (1.0 - u))
    return float(value), grads
