"""Multi-agent DRL schedulers: DQN, PGN and DDPGN with IA / PA actions."""

from .base import ActionDecision, HyperParams, SchedulingAgent
from .ddpgn import DdpgnAgent
from .dqn import DqnAgent
from .environment import ALGORITHMS, TRACE_COLUMNS, EpisodeResult, MultiAgentEnvironment, parse_drl_scheduler
from .mdp import (
    ActionMode,
    ActionSpace,
    AgentState,
    RewardCalculator,
    RewardMode,
    StateNormalizer,
    action_to_power,
    build_critic_state,
    build_state,
    compute_reward,
    interference_to_power,
    state_hash,
    step_rates,
)
from .pgn import PgnAgent

__all__ = [
    'ActionDecision',
    'HyperParams',
    'SchedulingAgent',
    'DdpgnAgent',
    'DqnAgent',
    'ALGORITHMS',
    'TRACE_COLUMNS',
    'EpisodeResult',
    'MultiAgentEnvironment',
    'parse_drl_scheduler',
    'ActionMode',
    'ActionSpace',
    'AgentState',
    'RewardCalculator',
    'RewardMode',
    'StateNormalizer',
    'action_to_power',
    'build_critic_state',
    'build_state',
    'compute_reward',
    'interference_to_power',
    'state_hash',
    'step_rates',
    'PgnAgent',
]
