"""
Baseline Scheduler
Round-robin sub-carrier allocation at maximum power with MCS selection from an
estimated SINR under fixed ICI compensation (noICI, ICI and Re-Tx variants).
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from ..errors import ConfigurationError
from ..link.adaptation import McsTable, SinrGrid, build_tables, device_levels, device_rates, device_sinr
from ..link.technology import P_MAX_W, Technology, dbm_to_w
from ..metrics import METRICS, compute_metrics, summarize
from ..network.channel import Realization, round_robin_sc

logger = logging.getLogger(__name__)

DEFAULT_ICI_GRID_DBM = (-110.0, -105.0, -100.0, -95.0, -90.0)


class BaselineVariant(str, Enum):
    NO_ICI = "noici"
    ICI = "ici"
    RETX = "retx"

    @property
    def compensated(self) -> bool:
        return self is not BaselineVariant.NO_ICI


@dataclass
class BaselineDecision:
    """Scheduling decision and outcome of one frame."""

    t: int
    sc_assignment: np.ndarray
    power: np.ndarray
    estimated_mcs: np.ndarray
    estimated_rate: np.ndarray
    effective_rate: np.ndarray
    retransmit: np.ndarray

    def trace_rows(self) -> List[Dict[str, object]]:
        return [
            {
                "t": self.t,
                "device": n,
                "sc": int(self.sc_assignment[n]),
                "mcs": int(self.estimated_mcs[n]),
                "est_rate": float(self.estimated_rate[n]),
                "eff_rate": float(self.effective_rate[n]),
                "retx": int(self.retransmit[n]),
            }
            for n in range(self.sc_assignment.size)
        ]


def round_robin_assign(realization: Realization) -> Dict[int, int]:
    """Within each cell, device k in id order gets sub-carrier k mod |S|."""
    assignment = round_robin_sc(realization.cell_ids, realization.sc_count)
    return {n: int(sc) for n, sc in enumerate(assignment)}


def estimate_sinr(
    realization: Realization,
    assignment: Mapping[int, int],
    ici_compensation_dbm: Optional[float],
    t: int,
) -> SinrGrid:
    """Interference-free SINR estimate at P_max with a fixed compensation power in the denominator."""
    compensation_w = 0.0 if ici_compensation_dbm is None else float(dbm_to_w(ici_compensation_dbm))
    estimate = P_MAX_W * realization.serving_gain(t) / (realization.noise_w + compensation_w)
    values = np.zeros((realization.num_devices, realization.sc_count))
    for device, sc in assignment.items():
        values[device, sc] = estimate[device]
    return SinrGrid(values=values)


def run_baseline(
    realization: Realization,
    variant,
    compensation_dbm: Optional[float] = None,
    tables: Optional[Mapping[Technology, McsTable]] = None,
) -> List[BaselineDecision]:
    """
    Run one baseline variant over every timeslot of a realization.

    A frame succeeds when the effective SINR (all co-channel devices at P_max) reaches the
    threshold of the estimated MCS; otherwise its rate is 0. Under Re-Tx a failed frame is
    retransmitted in the next frame with the MCS of the failed frame's effective SINR.

    Raises:
        ConfigurationError: a compensated variant without a compensation value
    """
    variant = BaselineVariant(variant)
    if variant.compensated and compensation_dbm is None:
        raise ConfigurationError(f"Baseline variant '{variant.value}' needs an ICI compensation value")
    tables = tables or build_tables()
    _check_tables(realization, tables)
    compensation = compensation_dbm if variant.compensated else None

    sc = round_robin_sc(realization.cell_ids, realization.sc_count)
    assignment = {n: int(s) for n, s in enumerate(sc)}
    power = np.full(realization.num_devices, P_MAX_W)
    pending_level = np.full(realization.num_devices, -1)
    pending = np.zeros(realization.num_devices, dtype=bool)

    decisions = []
    for t in range(realization.timeslots):
        estimate = estimate_sinr(realization, assignment, compensation, t).per_device()
        levels = device_levels(estimate, realization.techs, tables)
        retransmit = pending.copy()
        levels = np.where(retransmit, pending_level, levels)

        effective = device_sinr(realization.gains[t], realization.cell_ids, sc, power, realization.noise_w)
        effective_levels = device_levels(effective, realization.techs, tables)
        scheduled_rate = device_rates(levels, realization.techs, tables)
        success = effective_levels >= levels
        effective_rate = np.where(success, scheduled_rate, 0.0)

        if variant is BaselineVariant.RETX:
            pending = (levels >= 0) & ~success
            pending_level = effective_levels

        decisions.append(
            BaselineDecision(
                t=t,
                sc_assignment=sc,
                power=power,
                estimated_mcs=levels,
                estimated_rate=scheduled_rate,
                effective_rate=effective_rate,
                retransmit=retransmit,
            )
        )
    return decisions


def _check_tables(realization: Realization, tables: Mapping[Technology, McsTable]) -> None:
    missing = set(realization.techs) - set(tables)
    if missing:
        raise ConfigurationError(f"No MCS table for: {', '.join(sorted(t.value for t in missing))}")


def decision_rates(decisions: Sequence[BaselineDecision]) -> np.ndarray:
    """(timeslot, device) grid of effective rates."""
    return np.vstack([d.effective_rate for d in decisions])


def wasted_frames(decisions: Sequence[BaselineDecision]) -> float:
    """Average number of frames per device consumed by a retransmission."""
    return float(np.mean(np.sum([d.retransmit for d in decisions], axis=0)))


def sweep_compensation(
    realizations: Sequence[Realization],
    variant,
    ici_grid: Sequence[float] = DEFAULT_ICI_GRID_DBM,
    tables: Optional[Mapping[Technology, McsTable]] = None,
) -> Dict[str, float]:
    """
    Pick the compensation that maximizes the median of each metric over a realization set.

    Returns:
        Mapping metric name ('am', 'gm', 'hm') -> winning compensation in dBm. Ties keep the
        earliest grid value.
    """
    if not ici_grid:
        raise ConfigurationError("The ICI compensation grid must not be empty")
    tables = tables or build_tables()
    medians = {}
    for compensation in ici_grid:
        records = [
            compute_metrics(decision_rates(run_baseline(r, variant, compensation, tables)))
            for r in realizations
        ]
        medians[compensation] = summarize(records)
        logger.debug("Compensation %.1f dBm: %s", compensation, medians[compensation])

    best = {}
    for metric in METRICS:
        best[metric] = max(ici_grid, key=lambda c: medians[c][metric]["median"])
    logger.info("Selected ICI compensation per metric: %s", best)
    return best
