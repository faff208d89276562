"""
Throughput Metrics
Arithmetic, geometric and harmonic mean throughput, delay accounting and
per-timeslot computational latency.
"""
import logging
import time
from dataclasses import asdict, dataclass, fields
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .errors import ContractViolation

logger = logging.getLogger(__name__)

SYMBOLS_PER_SLOT = 14
SLOT_DURATION_S = 0.0005
METRICS = ("am", "gm", "hm")


@dataclass
class MetricsRecord:
    """Throughput of one realization under one scheduler (bits per second)."""

    realization_id: str
    scheduler: str
    tech: str
    am: float
    gm: float
    hm: float
    zero_rate_count: int
    avg_delay_frames: float = 0.0
    latency_train_ms: Optional[float] = None
    latency_test_ms: Optional[float] = None

    @classmethod
    def columns(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    def to_row(self) -> Dict[str, str]:
        """CSV row with fixed float formatting; latencies are blank when not measured."""
        row = {}
        for key, value in asdict(self).items():
            if value is None:
                row[key] = ""
            elif isinstance(value, float):
                row[key] = repr(value)
            else:
                row[key] = str(value)
        return row


def compute_metrics(
    rates: np.ndarray,
    n_s: int = SYMBOLS_PER_SLOT,
    t_s: float = SLOT_DURATION_S,
    realization_id: str = "omega-0",
    scheduler: str = "",
    tech: str = "",
    avg_delay_frames: float = 0.0,
) -> MetricsRecord:
    """
    AM/GM/HM throughput of a (timeslot, device) grid of link rates in bits/symbol.

    Each timeslot's rates are scaled by n_s / t_s into bits/s, the three means are taken
    over devices and then averaged over timeslots. A zero rate zeroes that timeslot's GM
    and HM (infinite delay).

    Raises:
        ContractViolation: the grid is not 2-D, has missing entries or negative rates
    """
    rates = np.asarray(rates, dtype=float)
    if rates.ndim != 2 or rates.size == 0:
        raise ContractViolation("rates must be a non-empty (timeslot, device) grid")
    if not np.all(np.isfinite(rates)):
        raise ContractViolation("rate grid is incomplete (non-finite entries)")
    if np.any(rates < 0):
        raise ContractViolation("rates must be non-negative")

    throughput = rates * (n_s / t_s)
    am_t = throughput.mean(axis=1)
    gm_t = np.zeros(rates.shape[0])
    hm_t = np.zeros(rates.shape[0])
    positive = np.all(throughput > 0, axis=1)
    if np.any(positive):
        rows = throughput[positive]
        gm_t[positive] = np.exp(np.log(rows).mean(axis=1))
        hm_t[positive] = rows.shape[1] / (1.0 / rows).sum(axis=1)
    # rounding can break the chain when all rates are equal
    gm_t = np.minimum(gm_t, am_t)
    hm_t = np.minimum(hm_t, gm_t)

    return MetricsRecord(
        realization_id=realization_id,
        scheduler=scheduler,
        tech=tech,
        am=float(am_t.mean()),
        gm=float(gm_t.mean()),
        hm=float(hm_t.mean()),
        zero_rate_count=int(np.count_nonzero(rates == 0)),
        avg_delay_frames=float(avg_delay_frames),
    )


def summarize(records: Sequence[MetricsRecord]) -> Dict[str, Dict[str, float]]:
    """Median and quartiles of each metric over a set of records."""
    summary = {}
    for metric in METRICS:
        values = np.array([getattr(r, metric) for r in records], dtype=float)
        if values.size == 0:
            continue
        q1, median, q3 = np.percentile(values, [25, 50, 75])
        summary[metric] = {"q1": float(q1), "median": float(median), "q3": float(q3)}
    delays = [r.avg_delay_frames for r in records]
    if delays:
        summary["avg_delay_frames"] = {"mean": float(np.mean(delays))}
    return summary


def measure_latency(run_fn: Callable[[], object], repetitions: int = 10, timeslots: int = 1) -> float:
    """
    Median wall-clock milliseconds per timeslot of ``run_fn``.

    ``run_fn`` processes ``timeslots`` timeslots per call.
    """
    if repetitions < 10:
        raise ContractViolation(f"latency needs at least 10 repetitions, got {repetitions}")
    samples = []
    for _ in range(repetitions):
        start = time.perf_counter()
        run_fn()
        samples.append((time.perf_counter() - start) * 1000.0 / timeslots)
    latency = float(np.median(samples))
    logger.debug("Latency %.4f ms/timeslot over %d repetitions", latency, repetitions)
    return latency
