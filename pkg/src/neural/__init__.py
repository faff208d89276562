"""Dense networks with manual gradients, Adam and experience replay."""
from .adam import DEFAULT_LEARNING_RATE, AdamState, adam_step
from .gradcheck import ROLES, check_all_roles, check_gradients, check_role, relative_error
from .losses import actor_objective, critic_regression, policy_distribution, policy_gradient, q_regression, squash
from .mlp import (
    HIDDEN_DIMS,
    MlpParams,
    backward,
    forward,
    from_bytes,
    load_checkpoint,
    save_checkpoint,
    to_bytes,
)
from .replay import DEFAULT_BATCH_SIZE, DEFAULT_CAPACITY, Experience, ReplayMemory

__all__ = [
    "DEFAULT_LEARNING_RATE",
    "AdamState",
    "adam_step",
    "ROLES",
    "check_all_roles",
    "check_gradients",
    "check_role",
    "relative_error",
    "actor_objective",
    "critic_regression",
    "policy_distribution",
    "policy_gradient",
    "q_regression",
    "squash",
    "HIDDEN_DIMS",
    "MlpParams",
    "backward",
    "forward",
    "from_bytes",
    "load_checkpoint",
    "save_checkpoint",
    "to_bytes",
    "DEFAULT_BATCH_SIZE",
    "DEFAULT_CAPACITY",
    "Experience",
    "ReplayMemory",
]
