"""
Shared test fixtures for the uplink scheduling simulator test suite.
"""
import pytest

from src.config import RunConfig
from src.link import build_tables
from src.network import build_layout, place_devices, realize, ChannelParams


@pytest.fixture
def tables():
    """MCS tables of every technology."""
    return build_tables()


@pytest.fixture
def tiny_layout():
    """Three-cell wraparound layout with 500 m ISD."""
    return build_layout(3, 500, True)


@pytest.fixture
def make_realization(tiny_layout):
    """Factory for tiny-preset realizations (3 cells, 3 devices per cell, 3 SCs)."""
    def _make(seed=1, T=4, fading=False, tech="5g-nr", per_cell=3, sc_count=3, shadowing_std_db=10.0):
        placements = place_devices(tiny_layout, per_cell, tech, rng_seed=[seed, 0])
        return realize(
            tiny_layout,
            placements,
            T=T,
            fading_enabled=fading,
            rng_seed=[seed, 1],
            sc_count=sc_count,
            params=ChannelParams(shadowing_std_db=shadowing_std_db),
            realization_id=f"omega-{seed}",
        )
    return _make


@pytest.fixture
def make_config(tmp_path):
    """Factory for run configurations small enough to train and evaluate in seconds."""
    def _make(**overrides):
        settings = {
            "tech": "5g-nr",
            "scheduler": "baseline_noici",
            "fading": False,
            "cells": 3,
            "devices_per_cell": 2,
            "sc_count": 2,
            "timeslots": 2,
            "omega_train": 3,
            "omega_test": 2,
            "run_dir": str(tmp_path / "runs"),
            "hyper": {"replay_capacity": 200, "batch_size": 8},
            "solver": {"starts": 1},
        }
        settings.update(overrides)
        return RunConfig.from_dict(settings).validate()
    return _make


@pytest.fixture
def sample_report():
    """Report document of a finished two-realization run."""
    record = {
        "realization_id": "test-0",
        "scheduler": "baseline_ici",
        "tech": "5g-nr",
        "am": 120000.0,
        "gm": 90000.0,
        "hm": 60000.0,
        "zero_rate_count": 0,
        "avg_delay_frames": 0.0,
        "latency_train_ms": None,
        "latency_test_ms": 0.25,
    }
    return {
        "run_id": "baseline_ici-5g-nr-seed0",
        "config": RunConfig(scheduler="baseline_ici", tech="5g-nr").to_dict(),
        "summary": {
            "run_id": "baseline_ici-5g-nr-seed0",
            "scheduler": "baseline_ici",
            "tech": "5g-nr",
            "omega_test": 2,
            "metrics": {
                "am": {"q1": 110000.0, "median": 120000.0, "q3": 130000.0},
                "gm": {"q1": 80000.0, "median": 90000.0, "q3": 100000.0},
                "hm": {"q1": 50000.0, "median": 60000.0, "q3": 70000.0},
                "avg_delay_frames": {"mean": 0.0},
            },
            "compensation_dbm": {"am": -100.0, "gm": -95.0, "hm": -95.0},
        },
        "records": [record, dict(record, realization_id="test-1", am=100000.0, gm=0.0, hm=0.0, zero_rate_count=1)],
    }
