"""
Scheduling MDP
Action spaces, the interference-to-power mapping, agent and critic states,
environment rates and the edge / centralized rewards.
"""
import hashlib
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np

from ..errors import ConfigurationError, DomainError
from ..link.adaptation import McsTable, compute_sinr, device_levels, device_rates
from ..link.technology import P_MAX_DBM, P_MAX_W, P_MIN_DBM, TECH_PROFILES, Technology, dbm_to_w, w_to_dbm
from ..network.channel import Realization

logger = logging.getLogger(__name__)

DEFAULT_ACTION_LEVELS = 10
PREV_POWER_FLOOR_DBM = -150.0
PAD_GAIN_DB = -200.0


class ActionMode(str, Enum):
    IA = "ia"
    PA = "pa"


class RewardMode(str, Enum):
    EDGE = "edge"
    CENTRALIZED = "centralized"


def _parse(enum_cls, value, label):
    try:
        return enum_cls(str(getattr(value, "value", value)).lower())
    except ValueError:
        valid = ", ".join(m.value for m in enum_cls)
        raise ConfigurationError(f"Unknown {label} '{value}' (expected one of: {valid})")


@dataclass(frozen=True)
class ActionSpace:
    """Interference budget (IA) or transmit power (PA) range in dBm."""

    mode: ActionMode
    low_dbm: float
    high_dbm: float
    size: int = DEFAULT_ACTION_LEVELS

    @classmethod
    def for_tech(cls, mode, tech, size: int = DEFAULT_ACTION_LEVELS) -> "ActionSpace":
        mode = _parse(ActionMode, mode, "action mode")
        if mode is ActionMode.IA:
            profile = TECH_PROFILES[Technology.parse(tech)]
            return cls(mode, profile.phi_min_dbm, profile.phi_max_dbm, size)
        return cls(mode, P_MIN_DBM, P_MAX_DBM, size)

    @property
    def levels_dbm(self) -> np.ndarray:
        """Discrete actions, equally spaced in dBm, both bounds included."""
        return np.linspace(self.low_dbm, self.high_dbm, self.size)

    def from_unit(self, u) -> np.ndarray:
        """Continuous action for u in [0, 1]."""
        return self.low_dbm + np.clip(u, 0.0, 1.0) * (self.high_dbm - self.low_dbm)


def interference_to_power(phi_dbm, gain, gamma_max: float, noise_w: float) -> np.ndarray:
    """
    Power that reaches gamma_max when the interference at the serving site equals phi:
    P = min(P_max, gamma_max (N0 + phi) / G).
    """
    gain = np.asarray(gain, dtype=float)
    if np.any(gain <= 0):
        raise DomainError("serving gain must be positive")
    return np.minimum(P_MAX_W, gamma_max * (noise_w + dbm_to_w(np.asarray(phi_dbm, dtype=float))) / gain)


def action_to_power(space: ActionSpace, action_dbm, gain, gamma_max: float, noise_w: float) -> np.ndarray:
    if space.mode is ActionMode.IA:
        return interference_to_power(action_dbm, gain, gamma_max, noise_w)
    return dbm_to_w(np.asarray(action_dbm, dtype=float))


@dataclass
class AgentState:
    """Gain ratios towards the serving site (dB, self first) and the previous power and rate."""

    gain_ratios_db: np.ndarray
    prev_power_dbm: float
    prev_rate: float

    def vector(self, width: int) -> np.ndarray:
        """Fixed-width input: ratios padded with PAD_GAIN_DB, then power and rate."""
        padded = np.full(width, PAD_GAIN_DB)
        padded[:self.gain_ratios_db.size] = self.gain_ratios_db
        return np.concatenate([padded, [self.prev_power_dbm, self.prev_rate]])


def _co_channel_gains(realization: Realization, t: int, device: int) -> np.ndarray:
    """Gains of the co-channel set towards the device's site; self first, others by cell."""
    members = realization.co_channel(device)
    ordered = np.concatenate([[device], members[members != device]])
    return realization.gains[t, ordered, realization.cell_ids[device]]


def build_state(realization: Realization, t: int, device: int, prev_power_w: float, prev_rate: float) -> AgentState:
    gains = _co_channel_gains(realization, t, device)
    ratios_db = 10.0 * np.log10(gains / gains[0])
    power_dbm = float(w_to_dbm(prev_power_w)) if prev_power_w > 0 else PREV_POWER_FLOOR_DBM
    return AgentState(
        gain_ratios_db=ratios_db,
        prev_power_dbm=max(power_dbm, PREV_POWER_FLOOR_DBM),
        prev_rate=float(prev_rate),
    )


def build_critic_state(realization: Realization, t: int, device: int, width: int) -> np.ndarray:
    """Raw co-channel gains towards the serving site in dB, padded to ``width``."""
    gains_db = 10.0 * np.log10(_co_channel_gains(realization, t, device))
    padded = np.full(width, PAD_GAIN_DB)
    padded[:gains_db.size] = gains_db
    return padded


def state_hash(vector: np.ndarray) -> str:
    return hashlib.sha1(np.ascontiguousarray(vector, dtype="<f8").tobytes()).hexdigest()[:12]


@dataclass(frozen=True)
class StateNormalizer:
    """Frozen affine standardization fitted once on a warmup batch."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def identity(cls, width: int) -> "StateNormalizer":
        return cls(mean=np.zeros(width), scale=np.ones(width))

    @classmethod
    def fit(cls, batch) -> "StateNormalizer":
        batch = np.atleast_2d(np.asarray(batch, dtype=float))
        scale = batch.std(axis=0)
        return cls(mean=batch.mean(axis=0), scale=np.where(scale > 1e-6, scale, 1.0))

    def apply(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.mean) / self.scale


def step_rates(
    realization: Realization,
    t: int,
    powers_w,
    tables: Mapping[Technology, McsTable],
) -> np.ndarray:
    """Discrete link rate of every device when each transmits ``powers_w`` on its own SC."""
    powers_w = np.asarray(powers_w, dtype=float)
    grid = np.zeros((realization.num_devices, realization.sc_count))
    grid[np.arange(realization.num_devices), realization.sc_assignment] = powers_w
    gamma = compute_sinr(realization, grid, t).per_device()
    return device_rates(device_levels(gamma, realization.techs, tables), realization.techs, tables)


def compute_reward(mode, rates, co_channel_sets: Sequence[np.ndarray]) -> np.ndarray:
    """
    Per-device reward: own rate (edge) or the summed rate of the device's
    co-channel set (centralized).
    """
    mode = _parse(RewardMode, mode, "reward mode")
    rates = np.asarray(rates, dtype=float)
    if mode is RewardMode.EDGE:
        return rates.copy()
    return np.array([rates[members].sum() for members in co_channel_sets])


class RewardCalculator:
    """Reward path of one run; counts every centralized all-to-all exchange."""

    def __init__(self, mode):
        self.mode = _parse(RewardMode, mode, "reward mode")
        self.centralized_calls = 0

    def __call__(self, realization: Realization, rates, co_channel_sets: Optional[Sequence[np.ndarray]] = None):
        if self.mode is RewardMode.CENTRALIZED:
            self.centralized_calls += 1
            if co_channel_sets is None:
                co_channel_sets = [realization.co_channel(n) for n in range(realization.num_devices)]
        return compute_reward(self.mode, rates, co_channel_sets or [])
