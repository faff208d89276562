"""
Gradient Checking
Central-difference validation of the analytic gradients of every network role.
"""
import logging
from typing import Callable, Dict, Tuple

import numpy as np

from ..errors import ConfigurationError
from .losses import actor_objective, critic_regression, policy_gradient, q_regression
from .mlp import MlpParams

logger = logging.getLogger(__name__)

ROLES = ("q", "policy", "critic", "actor")


def relative_error(analytic: float, numeric: float, floor: float = 1e-5) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def check_gradients(
    value_and_grad: Callable[[MlpParams], Tuple[float, MlpParams]],
    params: MlpParams,
    rng: np.random.Generator,
    samples: int = 100,
    h: float = 1e-5,
) -> float:
    """
    Compare the analytic gradient against central differences at ``samples`` random
    coordinates. Returns the maximum relative error.
    """
    _, grads = value_and_grad(params)
    arrays = params.arrays()
    grad_arrays = grads.arrays()
    sizes = np.array([a.size for a in arrays])
    worst = 0.0
    for flat in rng.choice(sizes.sum(), size=min(samples, sizes.sum()), replace=False):
        layer = int(np.searchsorted(np.cumsum(sizes), flat, side="right"))
        index = np.unravel_index(flat - (sizes[:layer].sum()), arrays[layer].shape)

        shifted = []
        for sign in (1.0, -1.0):
            perturbed = [a.copy() for a in arrays]
            perturbed[layer][index] += sign * h
            shifted.append(value_and_grad(MlpParams.from_arrays(perturbed))[0])
        numeric = (shifted[0] - shifted[1]) / (2.0 * h)
        worst = max(worst, relative_error(float(grad_arrays[layer][index]), numeric))
    return worst


def check_role(role: str, rng: np.random.Generator, input_dim: int = 8, actions: int = 10, samples: int = 100) -> float:
    """Gradient check of one network role on random parameters and inputs."""
    state = rng.normal(size=input_dim)
    if role == "q":
        params = MlpParams.init(input_dim, actions, rng)
        states = rng.normal(size=(4, input_dim))
        picks = rng.integers(actions, size=4)
        targets = rng.uniform(0.0, 5.0, size=4)
        return check_gradients(lambda p: q_regression(p, states, picks, targets), params, rng, samples)
    if role == "policy":
        params = MlpParams.init(input_dim, actions, rng)
        action = int(rng.integers(actions))
        reward = float(rng.uniform(0.5, 5.0))
        return check_gradients(lambda p: policy_gradient(p, state, action, reward), params, rng, samples)
    if role == "critic":
        critic = MlpParams.init(input_dim + 1, 1, rng)
        states = rng.normal(size=(4, input_dim))
        u = rng.uniform(size=4)
        targets = rng.uniform(0.0, 5.0, size=4)
        return check_gradients(lambda p: critic_regression(p, states, u, targets), critic, rng, samples)
    if role == "actor":
        actor = MlpParams.init(input_dim, 1, rng)
        critic = MlpParams.init(input_dim + 1, 1, rng)
        critic_state = rng.normal(size=input_dim)
        return check_gradients(lambda p: actor_objective(p, critic, state, critic_state), actor, rng, samples)
    raise ConfigurationError(f"Unknown network role: {role}")


def check_all_roles(seed: int = 0, samples: int = 100) -> Dict[str, float]:
    rng = np.random.default_rng(seed)
    errors = {role: check_role(role, rng, samples=samples) for role in ROLES}
    logger.info("Gradient check max relative errors: %s", errors)
    return errors
