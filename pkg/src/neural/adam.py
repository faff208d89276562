"""
Adam Optimizer
Bias-corrected Adam over MlpParams, as a pure function of (params, grads, state).
"""
from dataclasses import dataclass, replace
from typing import List, Tuple

import numpy as np

from ..errors import ContractViolation
from .mlp import MlpParams

DEFAULT_LEARNING_RATE = 1e-4


@dataclass
class AdamState:
    first_moment: List[np.ndarray]
    second_moment: List[np.ndarray]
    step_count: int = 0
    learning_rate: float = DEFAULT_LEARNING_RATE
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_params(cls, params: MlpParams, learning_rate: float = DEFAULT_LEARNING_RATE) -> "AdamState":
        zeros = params.zeros_like().arrays()
        return cls(
            first_moment=zeros,
            second_moment=[z.copy() for z in zeros],
            learning_rate=learning_rate,
        )


def adam_step(
    params: MlpParams,
    grads: MlpParams,
    state: AdamState,
    maximize: bool = False,
) -> Tuple[MlpParams, AdamState]:
    """
    One Adam update. ``maximize=True`` ascends the gradient.

    Returns new parameter and state objects; the inputs are left untouched.
    """
    p_arrays, g_arrays = params.arrays(), grads.arrays()
    if [a.shape for a in p_arrays] != [g.shape for g in g_arrays] or len(state.first_moment) != len(p_arrays):
        raise ContractViolation("parameter, gradient and moment shapes must match")

    step = state.step_count + 1
    direction = -1.0 if maximize else 1.0
    correction1 = 1.0 - state.beta1 ** step
    correction2 = 1.0 - state.beta2 ** step

    new_params, first, second = [], [], []
    for p, g, m, v in zip(p_arrays, g_arrays, state.first_moment, state.second_moment):
        g = direction * g
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        new_params.append(p - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon))
        first.append(m)
        second.append(v)

    new_state = replace(state, first_moment=first, second_moment=second, step_count=step)
    return MlpParams.from_arrays(new_params), new_state
