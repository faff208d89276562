"""
Link Adaptation
MCS tables, the three rate functions (Shannon, envelope g, discrete f) and uplink SINR.
"""
import json
import math
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Sequence, Union

import numpy as np

from ..errors import ContractViolation, DomainError
from .technology import TECH_PROFILES, Technology, dbm_to_w

LOG10_E = math.log10(math.e)

# Outage floor of every table (-10 dB) and default lowest MCS threshold.
GAMMA_MIN = 0.1
LOWEST_THRESHOLD_DB = -6.0

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class McsTable:
    """Ordered SINR thresholds and spectral efficiencies for one technology."""

    tech: Technology
    thresholds: np.ndarray
    efficiencies: np.ndarray
    gamma_min: float = GAMMA_MIN

    def __post_init__(self):
        thresholds = np.asarray(self.thresholds, dtype=float)
        efficiencies = np.asarray(self.efficiencies, dtype=float)
        if thresholds.shape != efficiencies.shape or thresholds.ndim != 1 or thresholds.size == 0:
            raise ContractViolation("MCS thresholds and efficiencies must be equal-length 1-D sequences")
        if np.any(np.diff(thresholds) <= 0) or np.any(np.diff(efficiencies) <= 0):
            raise ContractViolation("MCS thresholds and efficiencies must be strictly increasing")
        if not 0 < self.gamma_min < thresholds[0]:
            raise ContractViolation("gamma_min must be positive and below the lowest threshold")
        object.__setattr__(self, "thresholds", thresholds)
        object.__setattr__(self, "efficiencies", efficiencies)

    @property
    def levels(self) -> int:
        return int(self.thresholds.size)

    @property
    def gamma_max(self) -> float:
        return float(self.thresholds[-1])

    @property
    def beta_max(self) -> float:
        return float(self.efficiencies[-1])

    def level(self, gamma: ArrayLike) -> ArrayLike:
        """Index of the highest threshold <= gamma, -1 in outage."""
        idx = np.searchsorted(self.thresholds, gamma, side="right") - 1
        return int(idx) if np.ndim(idx) == 0 else idx

    def rate_of_level(self, level: ArrayLike) -> ArrayLike:
        """Efficiency of an MCS level, 0 for the outage level -1."""
        level = np.asarray(level)
        rates = np.where(level >= 0, self.efficiencies[np.clip(level, 0, None)], 0.0)
        return float(rates) if rates.ndim == 0 else rates

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tech": self.tech.value,
            "thresholds": self.thresholds.tolist(),
            "efficiencies": self.efficiencies.tolist(),
            "gamma_min": self.gamma_min,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "McsTable":
        return cls(
            tech=Technology.parse(data["tech"]),
            thresholds=np.asarray(data["thresholds"], dtype=float),
            efficiencies=np.asarray(data["efficiencies"], dtype=float),
            gamma_min=float(data.get("gamma_min", GAMMA_MIN)),
        )

    @classmethod
    def from_json(cls, text: str) -> "McsTable":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SinrGrid:
    """Linear SINR per (device, sub-carrier); zero where a device does not transmit."""

    values: np.ndarray

    def per_device(self) -> np.ndarray:
        return self.values.max(axis=1)


def shannon_rate(gamma: ArrayLike) -> ArrayLike:
    """Shannon's rate log2(1 + gamma) in bits/symbol."""
    return np.log2(1.0 + np.asarray(gamma, dtype=float)) if np.ndim(gamma) else math.log2(1.0 + gamma)


def envelope_rate_g(gamma: ArrayLike) -> ArrayLike:
    """Continuous envelope g(gamma) = gamma ** log10(e)."""
    arr = np.asarray(gamma, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("envelope rate is defined for gamma > 0 only")
    out = arr ** LOG10_E
    return float(out) if out.ndim == 0 else out


def inverse_envelope(rate: float) -> float:
    """SINR at which g reaches the given rate."""
    return rate ** (1.0 / LOG10_E)


def discrete_rate_f(gamma: ArrayLike, table: McsTable) -> ArrayLike:
    """Piece-wise discrete rate: efficiency of the highest threshold <= gamma."""
    return table.rate_of_level(table.level(gamma))


def build_mcs_table(tech, lowest_threshold_db: float = LOWEST_THRESHOLD_DB) -> McsTable:
    """
    Build the MCS table of a technology.

    Thresholds are equally spaced in dB from ``lowest_threshold_db`` to g^-1(beta_max) and the
    efficiencies are inscribed under the envelope (beta_m = g(gamma_m)), so f <= g everywhere.
    """
    tech = Technology.parse(tech)
    profile = TECH_PROFILES[tech]
    top_db = 10.0 * math.log10(inverse_envelope(profile.beta_max))
    if lowest_threshold_db >= top_db:
        raise DomainError(f"lowest threshold {lowest_threshold_db} dB must lie below {top_db:.2f} dB")
    thresholds = 10.0 ** (np.linspace(lowest_threshold_db, top_db, profile.levels) / 10.0)
    efficiencies = thresholds ** LOG10_E
    # Pin the top level to the exact table value.
    efficiencies[-1] = profile.beta_max
    return McsTable(tech=tech, thresholds=thresholds, efficiencies=efficiencies)


def build_tables(lowest_threshold_db: float = LOWEST_THRESHOLD_DB) -> Dict[Technology, McsTable]:
    return {tech: build_mcs_table(tech, lowest_threshold_db) for tech in Technology}


def device_sinr(
    gains_t: np.ndarray,
    cell_ids: np.ndarray,
    sc: np.ndarray,
    power_w: np.ndarray,
    noise_w: float,
) -> np.ndarray:
    """
    Uplink SINR of every device on its own sub-carrier.

    Args:
        gains_t: (N, B) linear gains of device n towards site b in one timeslot
        cell_ids: (N,) serving site of each device
        sc: (N,) sub-carrier of each device, -1 when idle
        power_w: (N,) transmit power
        noise_w: noise power per sub-carrier

    Returns:
        (N,) linear SINR, 0 for idle or silent devices
    """
    n = gains_t.shape[0]
    idx = np.arange(n)
    active = (sc >= 0) & (power_w > 0)
    signal = np.where(active, power_w * gains_t[idx, cell_ids], 0.0)
    co_channel = (sc[:, None] == sc[None, :]) & active[:, None] & active[None, :]
    co_channel[idx, idx] = False
    # cross[i, j] = gain of device j towards the site serving device i
    cross = gains_t[:, cell_ids].T
    interference = (co_channel * cross) @ np.where(active, power_w, 0.0)
    return np.where(active, signal / (noise_w + interference), 0.0)


def compute_sinr(realization, power: np.ndarray, t: int) -> SinrGrid:
    """
    Uplink SINR per (device, sub-carrier) in timeslot t.

    Args:
        realization: network realization providing gains, cell ids and noise power
        power: (N, S) transmit power of each device on each sub-carrier (watts)
        t: timeslot index

    Raises:
        ContractViolation: a device transmits on more than one sub-carrier
    """
    power = np.asarray(power, dtype=float)
    if power.ndim != 2 or power.shape[0] != realization.num_devices:
        raise ContractViolation("power must be a (devices, sub-carriers) matrix")
    if np.any(power < 0):
        raise ContractViolation("transmit powers must be non-negative")
    carriers = np.count_nonzero(power > 0, axis=1)
    if np.any(carriers > 1):
        bad = np.flatnonzero(carriers > 1).tolist()
        raise ContractViolation(f"devices {bad} transmit on more than one sub-carrier")

    sc = np.where(carriers > 0, power.argmax(axis=1), -1)
    per_device = power.max(axis=1)
    sinr = device_sinr(realization.gains[t], realization.cell_ids, sc, per_device, realization.noise_w)
    values = np.zeros_like(power)
    active = sc >= 0
    values[np.flatnonzero(active), sc[active]] = sinr[active]
    return SinrGrid(values=values)


def noise_power_w(
    density_dbm_hz: float = -174.0,
    sc_spacing_hz: float = 15_000.0,
    noise_figure_db: float = 5.0,
) -> float:
    """Thermal noise per sub-carrier: density + 10log10(bandwidth) + noise figure, in watts."""
    return float(dbm_to_w(density_dbm_hz + 10.0 * math.log10(sc_spacing_hz) + noise_figure_db))


def device_levels(gamma: np.ndarray, techs: Sequence[Technology], tables: Mapping[Technology, McsTable]) -> np.ndarray:
    """MCS level of every device under its own technology's table (-1 in outage)."""
    gamma = np.asarray(gamma, dtype=float)
    levels = np.full(gamma.shape, -1, dtype=int)
    techs = np.asarray([Technology.parse(t).value for t in techs])
    for tech in np.unique(techs):
        mask = techs == tech
        levels[mask] = tables[Technology(tech)].level(gamma[mask])
    return levels


def device_rates(levels: np.ndarray, techs: Sequence[Technology], tables: Mapping[Technology, McsTable]) -> np.ndarray:
    """Efficiency of each device's MCS level, 0 in outage."""
    levels = np.asarray(levels, dtype=int)
    rates = np.zeros(levels.shape)
    techs = np.asarray([Technology.parse(t).value for t in techs])
    for tech in np.unique(techs):
        mask = techs == tech
        rates[mask] = tables[Technology(tech)].rate_of_level(levels[mask])
    return rates
