"""
Device technologies and their physical-layer profiles.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict

import numpy as np

from ..errors import ConfigurationError


class Technology(str, Enum):
    """Uplink device technology sharing the resource block."""

    NB_IOT = "nb-iot"
    LTE_M = "lte-m"
    NR = "5g-nr"

    @classmethod
    def parse(cls, value) -> "Technology":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            valid = ", ".join(t.value for t in cls)
            raise ConfigurationError(f"Unknown technology '{value}' (expected one of: {valid})")


@dataclass(frozen=True)
class TechProfile:
    """MCS size, top spectral efficiency and interference-allocation bounds."""

    levels: int
    beta_max: float
    phi_min_dbm: float
    phi_max_dbm: float


TECH_PROFILES: Dict[Technology, TechProfile] = {
    # NB-IoT's Phi_min has no '=' in the source table; read as -100 dBm.
    Technology.NB_IOT: TechProfile(levels=6, beta_max=1.18, phi_min_dbm=-100.0, phi_max_dbm=-95.0),
    Technology.LTE_M: TechProfile(levels=9, beta_max=2.41, phi_min_dbm=-101.0, phi_max_dbm=-96.0),
    Technology.NR: TechProfile(levels=15, beta_max=5.55, phi_min_dbm=-102.0, phi_max_dbm=-97.0),
}

# Device power range shared by all technologies.
P_MAX_DBM = 23.0
P_MIN_DBM = -40.0
EPSILON_P_W = 1e-12


def dbm_to_w(dbm):
    """Convert dBm to watts (works on scalars and arrays)."""
    return 10.0 ** ((dbm - 30.0) / 10.0)


def w_to_dbm(watts):
    """Convert watts to dBm."""
    return 10.0 * np.log10(watts) + 30.0


P_MAX_W = dbm_to_w(P_MAX_DBM)
