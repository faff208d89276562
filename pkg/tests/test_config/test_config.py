"""
Tests for run configuration loading, overrides and validation.
"""
import json

import pytest

from src.config import PRESETS, SCHEDULERS, RunConfig, load_config, parse_override
from src.errors import ConfigurationError


class TestDefaults:
    """Test suite for defaults and presets."""

    def test_defaults(self):
        """Test defaults use 20 timeslots, 7 cells and 12 sub-carriers."""
        config = RunConfig()

        assert (config.timeslots, config.cells, config.sc_count, config.devices_per_cell) == (20, 7, 12, 12)
        assert config.hyper.epsilon == 0.2
        assert config.hyper.batch_size == 500

    def test_tiny_preset(self):
        """Test the tiny preset shrinks the network and realization sets."""
        config = load_config(preset="tiny")

        assert (config.cells, config.sc_count, config.devices_per_cell) == (3, 3, 3)
        assert config.omega_train == config.omega_test == 100

    def test_unknown_preset(self):
        """Test an unknown preset is refused."""
        with pytest.raises(ConfigurationError):
            load_config(preset="huge")

    def test_eleven_schedulers(self):
        """Test every scheduler name is known."""
        assert len(SCHEDULERS) == 11
        assert set(PRESETS) == {"default", "tiny"}

    def test_run_dir_from_environment(self, monkeypatch):
        """Test UPLINK_RUN_DIR sets the default run root."""
        monkeypatch.setenv("UPLINK_RUN_DIR", "/tmp/uplink-runs")

        assert RunConfig().run_dir == "/tmp/uplink-runs"


class TestLoading:
    """Test suite for documents and overrides."""

    def test_json_document(self, tmp_path):
        """Test a JSON document sets top-level and nested values."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"scheduler": "dqn_ia", "hyper": {"epsilon": 0.1}, "fading": False}))

        config = load_config(str(path), preset="tiny")

        assert config.scheduler == "dqn_ia"
        assert config.hyper.epsilon == 0.1
        assert config.fading is False
        assert config.cells == 3

    def test_yaml_document(self, tmp_path):
        """Test YAML documents are accepted too."""
        path = tmp_path / "run.yaml"
        path.write_text("scheduler: pgn_pa\nsolver:\n  starts: 2\n")

        config = load_config(str(path))

        assert config.scheduler == "pgn_pa"
        assert config.solver.starts == 2

    def test_missing_document(self, tmp_path):
        """Test an unreadable document is a configuration error."""
        with pytest.raises(ConfigurationError):
            load_config(str(tmp_path / "absent.json"))

    def test_override_parsing(self):
        """Test override values are read as YAML scalars."""
        assert parse_override("hyper.epsilon=0.5") == ("hyper.epsilon", 0.5)
        assert parse_override("fading=false") == ("fading", False)
        assert parse_override("ici_grid_dbm=[-100, -95]") == ("ici_grid_dbm", [-100, -95])

    def test_malformed_override(self):
        """Test an override without '=' is refused."""
        with pytest.raises(ConfigurationError):
            parse_override("hyper.epsilon")

    def test_override_replaces_one_path(self):
        """Test a dotted override changes exactly one nested field."""
        config = RunConfig().with_overrides([("hyper.lr_q", "0.001"), ("channel.doppler_hz", 5)])

        assert config.hyper.lr_q == 0.001
        assert config.channel.doppler_hz == 5.0
        assert config.hyper.lr_policy == 1e-4

    def test_unknown_key(self):
        """Test unknown keys are reported with their full path."""
        with pytest.raises(ConfigurationError, match="hyper.gamma"):
            RunConfig().with_overrides([("hyper.gamma", 0.9)])

    def test_invalid_number(self):
        """Test non-numeric values for numeric fields are refused."""
        with pytest.raises(ConfigurationError):
            RunConfig.from_dict({"cells": "seven"})

    def test_null_value(self):
        """Test null values are refused."""
        with pytest.raises(ConfigurationError):
            RunConfig.from_dict({"seed": None})

    def test_json_round_trip(self):
        """Test the resolved configuration reloads to an equal object."""
        config = RunConfig(scheduler="ddpgn_pa", seed=4)

        assert RunConfig.from_dict(json.loads(config.to_json())) == config


class TestValidation:
    """Test suite for up-front validation."""

    def test_valid_default(self):
        """Test the defaults validate."""
        assert RunConfig().validate().scheduler == "baseline_ici"

    def test_lists_every_problem(self):
        """Test all problems are collected into one error."""
        config = RunConfig(scheduler="greedy", cells=5, tech="wifi", reward_mode="global")

        with pytest.raises(ConfigurationError) as excinfo:
            config.validate()

        assert len(excinfo.value.problems) == 4

    def test_too_many_devices(self):
        """Test more devices per cell than sub-carriers is refused."""
        with pytest.raises(ConfigurationError, match="devices_per_cell"):
            RunConfig(devices_per_cell=4, sc_count=3).validate()

    @pytest.mark.parametrize("field,value", [
        ("timeslots", 0),
        ("omega_test", 0),
        ("latency_repetitions", 5),
        ("seed", -1),
        ("isd", 0.0),
    ])
    def test_out_of_range(self, field, value):
        """Test non-positive counts and short latency runs are refused."""
        with pytest.raises(ConfigurationError):
            RunConfig(**{field: value}).validate()

    def test_lowest_threshold_above_table(self):
        """Test a lowest MCS threshold above the top threshold is refused."""
        with pytest.raises(ConfigurationError, match="lowest_threshold_db"):
            RunConfig().with_overrides([("channel.lowest_threshold_db", 40.0)]).validate()

    def test_network_settings(self):
        """Test schedulers and hyper-parameters are not network settings."""
        a = RunConfig(scheduler="dqn_ia", reward_mode="centralized")
        b = RunConfig(scheduler="benchmark_f").with_overrides([("hyper.epsilon", 0.0)])

        assert a.network_settings() == b.network_settings()
        assert RunConfig(fading=False).network_settings() != a.network_settings()
