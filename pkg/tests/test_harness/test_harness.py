"""
Tests for the experiment harness: realization sets, runs, outputs and comparisons.
"""
import json

import numpy as np
import pytest

from src.config import RunConfig, load_config
from src.errors import ConfigurationError, SolverInfeasibleError
from src.harness import ExperimentRunner, compare_schedulers, ordering_violations, records_to_csv
from src.schedulers.benchmark import INFEASIBLE


class TestRealizationSets:
    """Test suite for train/test realization generation."""

    def test_sizes_and_ids(self, make_config):
        """Test each split has its configured size and its own identifiers."""
        runner = ExperimentRunner(make_config())

        train, test = runner.generate("train"), runner.generate("test")

        assert [r.realization_id for r in train] == ["train-0", "train-1", "train-2"]
        assert [r.realization_id for r in test] == ["test-0", "test-1"]
        assert train[0].gains.shape == (2, 6, 3)

    def test_splits_are_disjoint(self, make_config):
        """Test the k-th train and test realizations differ."""
        runner = ExperimentRunner(make_config(omega_test=3))

        train, test = runner.generate("train"), runner.generate("test")

        for a, b in zip(train, test):
            assert not np.array_equal(a.gains, b.gains)

    def test_reproducible(self, make_config):
        """Test the same seed regenerates identical gains."""
        a = ExperimentRunner(make_config()).generate("test")
        b = ExperimentRunner(make_config()).generate("test")

        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.gains, y.gains)

    def test_unknown_split(self, make_config):
        """Test only 'train' and 'test' exist."""
        with pytest.raises(ConfigurationError):
            ExperimentRunner(make_config()).generate("validation")


class TestRunExperiment:
    """Test suite for single-scheduler runs."""

    def test_invalid_config_fails_before_compute(self, make_config):
        """Test an invalid configuration is refused by the runner."""
        config = make_config()
        config.devices_per_cell = 5

        with pytest.raises(ConfigurationError):
            ExperimentRunner(config)

    def test_uncompensated_baseline_skips_training_set(self, make_config, mocker):
        """Test Baseline-noICI only generates the test set."""
        runner = ExperimentRunner(make_config())
        spy = mocker.spy(runner, "generate")

        result = runner.run_experiment(write=False)

        spy.assert_called_once_with("test")
        assert len(result.records) == 2
        assert all(r.hm <= r.gm <= r.am for r in result.records)

    def test_run_directory(self, make_config):
        """Test the run directory holds the resolved config, metrics and summary."""
        result = ExperimentRunner(make_config(keep_traces=True)).run_experiment()
        path = result.run_path

        assert path.name == "baseline_noici-5g-nr-seed0"
        assert RunConfig.from_dict(json.loads((path / "config.json").read_text())) == result.config
        assert (path / "metrics.csv").read_text() == records_to_csv(result.records)
        summary = json.loads((path / "summary.json").read_text())
        assert set(summary["metrics"]) >= {"am", "gm", "hm"}
        trace_lines = (path / "traces" / "baseline_noici.csv").read_text().splitlines()
        assert trace_lines[0] == "realization_id,t,device,sc,mcs,est_rate,eff_rate,retx"
        assert len(trace_lines) == 1 + 2 * 2 * 6

    def test_compensation_calibrated_on_training_set(self, make_config):
        """Test compensated baselines report the calibrated compensation per metric."""
        config = make_config(scheduler="baseline_ici")

        result = ExperimentRunner(config).run_experiment(write=False)

        assert set(result.summary["compensation_dbm"]) == {"am", "gm", "hm"}
        assert set(result.summary["compensation_dbm"].values()) <= set(config.ici_grid_dbm)
        assert set(result.summary["per_metric_best"]) == {"am", "gm", "hm"}

    def test_metrics_csv_is_byte_identical(self, make_config, tmp_path):
        """Test two runs of the same DRL configuration write identical metrics files."""
        paths = []
        for name in ("a", "b"):
            runner = ExperimentRunner(make_config(scheduler="dqn_ia"))
            result = runner.run_experiment(write=False)
            paths.append(runner.write(result, tmp_path / name))

        assert (paths[0] / "metrics.csv").read_bytes() == (paths[1] / "metrics.csv").read_bytes()

    def test_drl_outputs(self, make_config):
        """Test DRL runs write train metrics and checkpoints and evaluate without reward exchange."""
        result = ExperimentRunner(make_config(scheduler="pgn_ia", reward_mode="centralized")).run_experiment()

        assert result.summary["centralized_reward_calls"] == 0
        assert len(result.train_records) == 3
        assert (result.run_path / "train_metrics.csv").exists()
        assert len(list((result.run_path / "checkpoints").glob("pgn_*_policy.bin"))) == 3

    def test_untrained_drl_evaluation(self, make_config):
        """Test a DRL scheduler must be trained before it is evaluated."""
        runner = ExperimentRunner(make_config(scheduler="ddpgn_ia"))

        with pytest.raises(ConfigurationError):
            runner.evaluate(runner.generate("test"))

    def test_checkpoints_restore_policy(self, make_config):
        """Test loading saved checkpoints reproduces the evaluated metrics."""
        config = make_config(scheduler="dqn_pa")
        first = ExperimentRunner(config).run_experiment()

        restored = ExperimentRunner(config)
        test_set = restored.generate("test")
        restored.load_checkpoints(first.run_path / "checkpoints", test_set[0])
        second = restored.run_experiment(test_set=test_set, write=False)

        assert records_to_csv(second.records) == records_to_csv(first.records)

    def test_checkpoints_need_drl(self, make_config, tmp_path):
        """Test baselines have no checkpoints to load."""
        runner = ExperimentRunner(make_config())

        with pytest.raises(ConfigurationError):
            runner.load_checkpoints(tmp_path, None)

    def test_benchmark_run(self, make_config):
        """Test the benchmark solves once per realization without fading."""
        config = make_config(scheduler="benchmark_g", cells=1)

        result = ExperimentRunner(config).run_experiment(write=False)

        assert result.summary["benchmark_spread"]["solves"] == 2
        assert all(r.am > 0 for r in result.records)

    def test_benchmark_infeasible(self, make_config, mocker):
        """Test an infeasible benchmark solve aborts the run."""
        mocker.patch("src.harness.solve_local", return_value=mocker.Mock(solver_status=INFEASIBLE))

        with pytest.raises(SolverInfeasibleError):
            ExperimentRunner(make_config(scheduler="benchmark_f")).run_experiment(write=False)

    def test_latency_columns(self, make_config):
        """Test measured latencies are attached to every record."""
        result = ExperimentRunner(make_config(measure_latency=True)).run_experiment(write=False)

        assert all(r.latency_test_ms is not None and r.latency_test_ms >= 0 for r in result.records)
        assert all(r.latency_train_ms is None for r in result.records)
        assert result.summary["latency_ms"]["train_ms"] is None

    def test_drl_latency_leaves_agents_untouched(self, make_config):
        """Test timing a training episode does not change the trained agents."""
        runner = ExperimentRunner(make_config(scheduler="dqn_ia"))
        train, test = runner.generate("train"), runner.generate("test")
        runner.train(train)
        before, _, _ = runner.evaluate(test)

        latency = runner.measure_latencies(train, test)
        after, _, _ = runner.evaluate(test)

        assert latency["train_ms"] > 0 and latency["test_ms"] > 0
        assert records_to_csv(before) == records_to_csv(after)


class TestCompareSchedulers:
    """Test suite for aligned comparisons."""

    def test_settings_must_match(self, make_config):
        """Test runs over different networks cannot be compared."""
        configs = [make_config(), make_config(scheduler="baseline_ici", fading=True)]

        with pytest.raises(ConfigurationError, match="fading"):
            compare_schedulers(configs)

    def test_identical_configs(self, make_config):
        """Test identical configurations give identical columns."""
        comparison = compare_schedulers([make_config(), make_config()])

        assert comparison.rows[0] == comparison.rows[1]
        assert comparison.rows[0]["scheduler"] == "baseline_noici"
        assert comparison.violations == []

    def test_ordering_violations(self):
        """Test only expected pairs in the wrong order are flagged."""
        rows = [
            {"scheduler": "benchmark_f", "gm_median": 1.0},
            {"scheduler": "ddpgn_ia", "gm_median": 2.0},
            {"scheduler": "baseline_retx", "gm_median": 9.0},
        ]

        violations = ordering_violations(rows)

        assert len(violations) == 1
        assert violations[0].startswith("benchmark_f")


def tiny_run(tmp_path, scheduler, **overrides):
    """Tiny-preset configuration with 100 training and 30 test realizations."""
    settings = {
        "scheduler": scheduler,
        "seed": 0,
        "omega_train": 100,
        "omega_test": 30,
        "run_dir": str(tmp_path / "runs"),
        **overrides,
    }
    return load_config(preset="tiny", overrides=settings.items())


def median_gm(config):
    return ExperimentRunner(config).run_experiment(write=False).summary["metrics"]["gm"]["median"]


@pytest.mark.slow
class TestSchedulerOrdering:
    """Test suite for the qualitative ordering of schedulers on the tiny preset."""

    def test_chain_without_fading(self, tmp_path):
        """Test median GM: benchmark_f >= ddpgn_ia >= baseline_ici without fading."""
        gm = {
            name: median_gm(tiny_run(tmp_path, name, fading=False))
            for name in ("benchmark_f", "ddpgn_ia", "baseline_ici")
        }

        assert gm["benchmark_f"] >= gm["ddpgn_ia"] >= gm["baseline_ici"]

    def test_interference_allocation_beats_power_allocation(self, tmp_path):
        """Test DDPGN with interference actions reaches at least the GM of power actions under fading."""
        ia = median_gm(tiny_run(tmp_path, "ddpgn_ia", fading=True))
        pa = median_gm(tiny_run(tmp_path, "ddpgn_pa", fading=True))

        assert ia >= pa

    def test_latency_ordering(self, tmp_path):
        """Test DQN trains fastest and every algorithm runs faster frozen than training."""
        latency = {
            name: ExperimentRunner(tiny_run(tmp_path, name, fading=False)).bench_latency()
            for name in ("dqn_ia", "pgn_ia", "ddpgn_ia")
        }

        assert latency["dqn_ia"]["train_ms"] < latency["pgn_ia"]["train_ms"]
        assert latency["dqn_ia"]["train_ms"] < latency["ddpgn_ia"]["train_ms"]
        for phases in latency.values():
            assert phases["test_ms"] < phases["train_ms"]
