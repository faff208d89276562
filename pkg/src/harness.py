"""
Experiment Harness
Orchestrates realization generation, scheduler execution and result aggregation
for one run configuration, and aligns several runs for comparison.
"""
import copy
import csv
import io
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .agents.environment import TRACE_COLUMNS, MultiAgentEnvironment
from .agents.mdp import RewardCalculator, RewardMode
from .config import RunConfig
from .errors import ConfigurationError, SolverInfeasibleError
from .link.adaptation import McsTable, build_tables
from .link.technology import Technology, w_to_dbm
from .metrics import METRICS, MetricsRecord, compute_metrics, measure_latency, summarize
from .network.channel import Realization, realize
from .network.layout import build_layout, place_devices
from .schedulers.baseline import BaselineVariant, decision_rates, run_baseline, sweep_compensation, wasted_frames
from .schedulers.benchmark import INFEASIBLE, build_transformed, discretize_solution, solve_local

logger = logging.getLogger(__name__)

SPLITS = {"train": 0, "test": 1}

# (higher, lower) pairs of the expected median-GM ordering
EXPECTED_ORDER = (
    ("benchmark_g", "benchmark_f"),
    ("benchmark_f", "ddpgn_ia"),
    ("ddpgn_ia", "baseline_ici"),
    ("baseline_ici", "baseline_noici"),
    ("dqn_ia", "dqn_pa"),
    ("pgn_ia", "pgn_pa"),
    ("ddpgn_ia", "ddpgn_pa"),
)

BASELINE_TRACE_COLUMNS = ("realization_id", "t", "device", "sc", "mcs", "est_rate", "eff_rate", "retx")
BENCHMARK_TRACE_COLUMNS = ("realization_id", "t", "device", "sc", "power_dbm", "sinr", "rate")


def records_to_csv(records: Sequence[MetricsRecord]) -> str:
    """Render metrics records with a fixed column order and float formatting."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=MetricsRecord.columns(), lineterminator="\n")
    writer.writeheader()
    for record in records:
        writer.writerow(record.to_row())
    return buffer.getvalue()


def rows_to_csv(rows: Sequence[Mapping[str, Any]], columns: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


@dataclass
class ExperimentResult:
    """Everything one run produced."""

    config: RunConfig
    records: List[MetricsRecord]
    summary: Dict[str, Any]
    train_records: List[MetricsRecord] = field(default_factory=list)
    traces: List[Dict[str, Any]] = field(default_factory=list)
    run_path: Optional[Path] = None

    @property
    def run_id(self) -> str:
        return run_id_for(self.config)

    def metrics_csv(self) -> str:
        return records_to_csv(self.records)

    def to_report(self) -> Dict[str, Any]:
        return {
            "run_id": self.run_id,
            "config": self.config.to_dict(),
            "summary": self.summary,
            "records": [asdict(r) for r in self.records],
        }


def run_id_for(config: RunConfig) -> str:
    return f"{config.scheduler}-{config.tech}-seed{config.seed}"


class ExperimentRunner:
    """Runs one scheduler over the train and test realization sets of a configuration."""

    def __init__(self, config: RunConfig, tables: Optional[Mapping[Technology, McsTable]] = None):
        self.config = config.validate()
        self.tables = tables or build_tables(config.channel.lowest_threshold_db)
        self.layout = build_layout(config.cells, config.isd, config.wraparound)
        self.environment: Optional[MultiAgentEnvironment] = None
        self.compensation: Dict[str, float] = {}
        self.trained = False

    def generate(self, split: str) -> List[Realization]:
        """
        Realization set of one split.

        Realization k of a split draws placements and gains from the seed streams
        (seed, split, k, 0) and (seed, split, k, 1), so train and test never share a stream.
        """
        if split not in SPLITS:
            raise ConfigurationError(f"Unknown split '{split}' (expected one of: {', '.join(SPLITS)})")
        cfg = self.config
        count = cfg.omega_train if split == "train" else cfg.omega_test
        realizations = []
        for k in range(count):
            stream = [cfg.seed, SPLITS[split], k]
            placements = place_devices(
                self.layout, cfg.devices_per_cell, cfg.tech, stream + [0], mixed_tech=cfg.mixed_tech
            )
            realizations.append(
                realize(
                    self.layout,
                    placements,
                    cfg.timeslots,
                    cfg.fading,
                    stream + [1],
                    sc_count=cfg.sc_count,
                    params=cfg.channel,
                    realization_id=f"{split}-{k}",
                )
            )
        logger.debug("Generated %d %s realizations", count, split)
        return realizations

    def _needs_training_set(self) -> bool:
        return self._is_drl() or self.config.scheduler in ("baseline_ici", "baseline_retx")

    def _environment(self) -> MultiAgentEnvironment:
        if self.environment is None:
            cfg = self.config
            self.environment = MultiAgentEnvironment(
                cfg.scheduler, cfg.cells, hyper=cfg.hyper, tables=self.tables, seed=cfg.seed
            )
        return self.environment

    def _is_drl(self) -> bool:
        return self.config.scheduler.split("_")[0] in ("dqn", "pgn", "ddpgn")

    # training

    def train(self, train_set: Sequence[Realization]) -> List[MetricsRecord]:
        """
        Training phase: DRL agents learn on the set, compensated baselines calibrate their
        ICI compensation on it. The benchmark has nothing to learn.
        """
        cfg = self.config
        records: List[MetricsRecord] = []
        if self._is_drl():
            results, reward = self._environment().train(train_set, RewardMode(cfg.reward_mode))
            records = [self._record(r.realization_id, r.rates) for r in results]
            logger.info(
                "Trained %s on %d realizations (%d centralized reward exchanges)",
                cfg.scheduler, len(train_set), reward.centralized_calls,
            )
        elif self._needs_training_set():
            self.compensation = sweep_compensation(train_set, self._baseline_variant(), cfg.ici_grid_dbm, self.tables)
        self.trained = True
        return records

    def load_checkpoints(self, directory, realization: Realization) -> None:
        """Restore trained DRL agents instead of training them."""
        if not self._is_drl():
            raise ConfigurationError(f"Scheduler '{self.config.scheduler}' has no checkpoints")
        directory = Path(directory)
        if not directory.is_dir():
            raise ConfigurationError(f"Checkpoint directory not found: {directory}")
        self._environment().load(directory, realization)
        self.trained = True

    # evaluation

    def _baseline_variant(self) -> BaselineVariant:
        return BaselineVariant(self.config.scheduler.split("_", 1)[1])

    def _record(self, realization_id: str, rates: np.ndarray, delay: float = 0.0) -> MetricsRecord:
        return compute_metrics(
            rates,
            realization_id=realization_id,
            scheduler=self.config.scheduler,
            tech="mixed" if self.config.mixed_tech else self.config.tech,
            avg_delay_frames=delay,
        )

    def _baseline(self, realization: Realization, compensation: Optional[float]):
        decisions = run_baseline(realization, self._baseline_variant(), compensation, self.tables)
        trace = [
            dict(row, realization_id=realization.realization_id)
            for decision in decisions
            for row in decision.trace_rows()
        ]
        return decision_rates(decisions), wasted_frames(decisions), trace

    def _benchmark(self, realization: Realization):
        """Rates of every timeslot; without fading one solve serves all timeslots."""
        cfg = self.config
        slots = range(realization.timeslots) if cfg.fading else [0]
        rows, spreads, trace = [], [], []
        for t in slots:
            solution = solve_local(build_transformed(realization, t, self.tables), cfg.solver)
            if solution.solver_status == INFEASIBLE:
                raise SolverInfeasibleError(
                    f"No feasible benchmark point for {realization.realization_id} at timeslot {t}"
                )
            if cfg.scheduler == "benchmark_g":
                rates = solution.ub_rates
            else:
                rates = discretize_solution(solution, self.tables)
            rows.append(rates)
            spreads.append(solution.spread)
            for n, sc in enumerate(solution.active_sc):
                trace.append({
                    "realization_id": realization.realization_id,
                    "t": t,
                    "device": n,
                    "sc": int(sc),
                    "power_dbm": float(w_to_dbm(solution.powers[n, sc])),
                    "sinr": float(solution.sinrs[n, sc]),
                    "rate": float(rates[n]),
                })
        if not cfg.fading:
            rows = rows * realization.timeslots
        return np.vstack(rows), spreads, trace

    def evaluate(self, test_set: Sequence[Realization]) -> Tuple[List[MetricsRecord], Dict[str, Any], List[dict]]:
        """
        Test phase. Returns (records, summary extras, trace rows).

        Raises:
            ConfigurationError: a scheduler that needs training was not trained
            SolverInfeasibleError: the benchmark found no feasible point
        """
        cfg = self.config
        extras: Dict[str, Any] = {}
        traces: List[dict] = []
        records: List[MetricsRecord] = []

        if self._is_drl():
            if not self.trained:
                raise ConfigurationError(f"Scheduler '{cfg.scheduler}' must be trained or loaded before evaluation")
            results, reward = self._environment().evaluate(test_set, keep_trace=cfg.keep_traces)
            records = [self._record(r.realization_id, r.rates) for r in results]
            for result in results:
                traces.extend(result.trace)
            extras["centralized_reward_calls"] = reward.centralized_calls
        elif cfg.scheduler.startswith("baseline"):
            variant = self._baseline_variant()
            if variant.compensated and not self.compensation:
                raise ConfigurationError(f"Scheduler '{cfg.scheduler}' must be calibrated before evaluation")
            primary = self.compensation.get("gm")
            for realization in test_set:
                rates, delay, trace = self._baseline(realization, primary)
                records.append(self._record(realization.realization_id, rates, delay))
                traces.extend(trace)
            if variant.compensated:
                extras["compensation_dbm"] = dict(self.compensation)
                extras["per_metric_best"] = self._per_metric_best(test_set, records)
        else:
            spreads, statuses = [], 0
            for realization in test_set:
                rates, spread, trace = self._benchmark(realization)
                records.append(self._record(realization.realization_id, rates))
                spreads.extend(spread)
                statuses += len(spread)
                traces.extend(trace)
            extras["benchmark_spread"] = {
                "median": float(np.median(spreads)),
                "max": float(np.max(spreads)),
                "solves": statuses,
            }
        if not cfg.keep_traces:
            traces = []
        return records, extras, traces

    def _per_metric_best(self, test_set, primary_records) -> Dict[str, Dict[str, float]]:
        """Statistics of each metric under the compensation calibrated for that metric."""
        best = {}
        cache = {self.compensation.get("gm"): primary_records}
        for metric in METRICS:
            compensation = self.compensation[metric]
            if compensation not in cache:
                cache[compensation] = [
                    self._record(r.realization_id, self._baseline(r, compensation)[0]) for r in test_set
                ]
            best[metric] = summarize(cache[compensation])[metric]
        return best

    # latency

    def measure_latencies(
        self, train_set: Sequence[Realization], test_set: Sequence[Realization]
    ) -> Dict[str, Optional[float]]:
        """
        Median milliseconds per timeslot of the test phase and, for DRL schedulers, of a
        training episode. Training is timed on a copy so the trained agents are untouched.
        """
        cfg = self.config
        reps = cfg.latency_repetitions
        realization = test_set[0]
        latency: Dict[str, Optional[float]] = {"train_ms": None, "test_ms": None}

        if self._is_drl():
            env = self._environment()
            latency["test_ms"] = measure_latency(
                lambda: env.run_episode(realization, train=False), reps, realization.timeslots
            )
            trainable = copy.deepcopy(env)
            for agent in trainable.agents.values():
                agent.frozen = False
            sample = train_set[0] if train_set else realization
            reward = RewardCalculator(cfg.reward_mode)
            latency["train_ms"] = measure_latency(
                lambda: trainable.run_episode(sample, train=True, reward=reward), reps, sample.timeslots
            )
        elif cfg.scheduler.startswith("baseline"):
            compensation = self.compensation.get("gm")
            latency["test_ms"] = measure_latency(
                lambda: run_baseline(realization, self._baseline_variant(), compensation, self.tables),
                reps,
                realization.timeslots,
            )
        else:
            latency["test_ms"] = measure_latency(lambda: self._benchmark(realization), reps, realization.timeslots)
        logger.info("Latency per timeslot for %s: %s", cfg.scheduler, latency)
        return latency

    def bench_latency(self) -> Dict[str, Optional[float]]:
        """Train on the training set when needed, then time both phases."""
        train_set = self.generate("train") if self._needs_training_set() else []
        test_set = self.generate("test")
        if not self.trained:
            self.train(train_set)
        return self.measure_latencies(train_set, test_set)

    # orchestration

    def run_experiment(
        self,
        train_set: Optional[Sequence[Realization]] = None,
        test_set: Optional[Sequence[Realization]] = None,
        write: bool = True,
    ) -> ExperimentResult:
        """
        Generate (or reuse) both realization sets, train, evaluate frozen on the test set
        and write the run directory.

        Raises:
            ConfigurationError: inconsistent settings, detected before any compute
            SolverInfeasibleError: the benchmark found no feasible point
        """
        cfg = self.config
        logger.info("Starting %s run for %s (seed %d)", cfg.scheduler, cfg.tech, cfg.seed)

        logger.info("Generating realizations")
        if train_set is None:
            train_set = self.generate("train") if self._needs_training_set() and not self.trained else []
        if test_set is None:
            test_set = self.generate("test")

        train_records: List[MetricsRecord] = []
        if not self.trained:
            logger.info("Training on %d realizations", len(train_set))
            train_records = self.train(train_set)

        logger.info("Evaluating on %d realizations", len(test_set))
        records, extras, traces = self.evaluate(test_set)

        if cfg.measure_latency:
            latency = self.measure_latencies(train_set, test_set)
            for record in records:
                record.latency_train_ms = latency["train_ms"]
                record.latency_test_ms = latency["test_ms"]
            extras["latency_ms"] = latency

        summary = {
            "run_id": run_id_for(cfg),
            "scheduler": cfg.scheduler,
            "tech": cfg.tech,
            "omega_test": len(test_set),
            "metrics": summarize(records),
            **extras,
        }
        if train_records:
            summary["train_metrics"] = summarize(train_records)

        result = ExperimentResult(
            config=cfg, records=records, summary=summary, train_records=train_records, traces=traces
        )
        if write:
            logger.info("Writing results")
            result.run_path = self.write(result)
        return result

    def write(self, result: ExperimentResult, directory=None) -> Path:
        """Write config.json, metrics.csv, summary.json, checkpoints/ and traces/."""
        path = Path(directory) if directory else Path(self.config.run_dir) / result.run_id
        path.mkdir(parents=True, exist_ok=True)
        (path / "config.json").write_text(self.config.to_json())
        (path / "metrics.csv").write_text(records_to_csv(result.records))
        (path / "summary.json").write_text(json.dumps(result.summary, indent=2, sort_keys=True))
        if result.train_records:
            (path / "train_metrics.csv").write_text(records_to_csv(result.train_records))
        if self._is_drl() and self.environment is not None:
            self.environment.save(path / "checkpoints")
        if result.traces:
            if self._is_drl():
                columns = TRACE_COLUMNS
            elif self.config.scheduler.startswith("baseline"):
                columns = BASELINE_TRACE_COLUMNS
            else:
                columns = BENCHMARK_TRACE_COLUMNS
            traces = path / "traces"
            traces.mkdir(exist_ok=True)
            (traces / f"{self.config.scheduler}.csv").write_text(rows_to_csv(result.traces, columns))
        logger.debug("Wrote run directory %s", path)
        return path


@dataclass
class Comparison:
    """Aligned per-scheduler statistics of runs sharing the same network settings."""

    settings: Dict[str, Any]
    rows: List[Dict[str, Any]]
    violations: List[str]

    def to_dict(self) -> Dict[str, Any]:
        return {"settings": self.settings, "rows": self.rows, "violations": self.violations}


def _comparison_row(result: ExperimentResult) -> Dict[str, Any]:
    row: Dict[str, Any] = {"scheduler": result.config.scheduler}
    for metric in METRICS:
        stats = result.summary["metrics"].get(metric, {})
        for stat in ("q1", "median", "q3"):
            row[f"{metric}_{stat}"] = stats.get(stat)
    latency = result.summary.get("latency_ms", {})
    row["latency_train_ms"] = latency.get("train_ms")
    row["latency_test_ms"] = latency.get("test_ms")
    return row


def ordering_violations(rows: Sequence[Mapping[str, Any]]) -> List[str]:
    """Pairs of the expected ordering whose median GM comes out the wrong way round."""
    gm = {row["scheduler"]: row["gm_median"] for row in rows}
    violations = []
    for higher, lower in EXPECTED_ORDER:
        if higher in gm and lower in gm and gm[higher] < gm[lower]:
            violations.append(f"{higher} median GM {gm[higher]:.1f} < {lower} median GM {gm[lower]:.1f}")
    return violations


def compare_schedulers(
    configs: Sequence[RunConfig],
    results: Optional[Sequence[ExperimentResult]] = None,
    write: bool = False,
) -> Comparison:
    """
    Run (or take the given results of) several schedulers and align their statistics.

    Raises:
        ConfigurationError: the configurations disagree on network settings
    """
    if not configs:
        raise ConfigurationError("Nothing to compare")
    settings = configs[0].network_settings()
    mismatched = [
        f"{c.scheduler}: {k}={v!r} (expected {settings[k]!r})"
        for c in configs[1:]
        for k, v in c.network_settings().items()
        if v != settings[k]
    ]
    if mismatched:
        raise ConfigurationError("Compared runs must share network settings: " + "; ".join(mismatched), mismatched)

    if results is None:
        results = [ExperimentRunner(config).run_experiment(write=write) for config in configs]
    rows = [_comparison_row(result) for result in results]
    violations = ordering_violations(rows)
    for violation in violations:
        logger.warning("Ordering check: %s", violation)
    return Comparison(settings=settings, rows=rows, violations=violations)
