"""Link adaptation: technologies, MCS tables, rate functions and SINR."""
from .adaptation import (
    GAMMA_MIN,
    LOG10_E,
    McsTable,
    SinrGrid,
    build_mcs_table,
    build_tables,
    compute_sinr,
    device_levels,
    device_rates,
    device_sinr,
    discrete_rate_f,
    envelope_rate_g,
    inverse_envelope,
    noise_power_w,
    shannon_rate,
)
from .technology import (
    EPSILON_P_W,
    P_MAX_DBM,
    P_MAX_W,
    P_MIN_DBM,
    TECH_PROFILES,
    TechProfile,
    Technology,
    dbm_to_w,
    w_to_dbm,
)

__all__ = [
    "GAMMA_MIN",
    "LOG10_E",
    "McsTable",
    "SinrGrid",
    "build_mcs_table",
    "build_tables",
    "compute_sinr",
    "device_levels",
    "device_rates",
    "device_sinr",
    "discrete_rate_f",
    "envelope_rate_g",
    "inverse_envelope",
    "noise_power_w",
    "shannon_rate",
    "EPSILON_P_W",
    "P_MAX_DBM",
    "P_MAX_W",
    "P_MIN_DBM",
    "TECH_PROFILES",
    "TechProfile",
    "Technology",
    "dbm_to_w",
    "w_to_dbm",
]
