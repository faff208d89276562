"""
Run Configuration
RunConfig with nested DRL, channel and solver parameters, named presets,
JSON/YAML documents and dotted-path overrides.
"""
import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields, is_dataclass, replace
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

import yaml

from .agents.base import HyperParams
from .agents.mdp import RewardMode
from .errors import ConfigurationError, DomainError
from .link.adaptation import build_tables
from .link.technology import Technology
from .network.channel import ChannelParams
from .network.layout import SUPPORTED_SITE_COUNTS
from .schedulers.baseline import DEFAULT_ICI_GRID_DBM
from .schedulers.benchmark import SolverParams

logger = logging.getLogger(__name__)

BASELINE_SCHEDULERS = ("baseline_noici", "baseline_ici", "baseline_retx")
BENCHMARK_SCHEDULERS = ("benchmark_g", "benchmark_f")
DRL_SCHEDULERS = ("dqn_ia", "dqn_pa", "pgn_ia", "pgn_pa", "ddpgn_ia", "ddpgn_pa")
SCHEDULERS = BASELINE_SCHEDULERS + BENCHMARK_SCHEDULERS + DRL_SCHEDULERS

PRESETS: Dict[str, Dict[str, Any]] = {
    "default": {"cells": 7, "sc_count": 12, "devices_per_cell": 12, "omega_train": 500, "omega_test": 500},
    "tiny": {"cells": 3, "sc_count": 3, "devices_per_cell": 3, "omega_train": 100, "omega_test": 100},
}

NETWORK_SETTINGS = (
    "tech", "fading", "cells", "devices_per_cell", "sc_count", "timeslots",
    "omega_test", "seed", "isd", "wraparound", "mixed_tech",
)


def default_run_dir() -> str:
    return os.getenv("UPLINK_RUN_DIR", "runs")


@dataclass
class RunConfig:
    """One experiment: network, scheduler and training settings."""

    tech: str = "nb-iot"
    scheduler: str = "baseline_ici"
    reward_mode: str = "edge"
    fading: bool = True
    cells: int = 7
    devices_per_cell: int = 12
    sc_count: int = 12
    timeslots: int = 20
    omega_train: int = 500
    omega_test: int = 500
    seed: int = 0
    isd: float = 500.0
    wraparound: bool = True
    mixed_tech: bool = False
    ici_grid_dbm: List[float] = field(default_factory=lambda: list(DEFAULT_ICI_GRID_DBM))
    measure_latency: bool = False
    latency_repetitions: int = 10
    keep_traces: bool = False
    run_dir: str = field(default_factory=default_run_dir)
    hyper: HyperParams = field(default_factory=HyperParams)
    channel: ChannelParams = field(default_factory=ChannelParams)
    solver: SolverParams = field(default_factory=SolverParams)

    def validate(self) -> "RunConfig":
        """
        Check every setting before any compute.

        Raises:
            ConfigurationError: listing all problems found
        """
        problems = []
        if self.scheduler not in SCHEDULERS:
            problems.append(f"unknown scheduler '{self.scheduler}' (expected one of: {', '.join(SCHEDULERS)})")
        try:
            Technology.parse(self.tech)
        except ConfigurationError as e:
            problems.append(str(e))
        if self.reward_mode not in {m.value for m in RewardMode}:
            problems.append(f"unknown reward mode '{self.reward_mode}'")
        if self.cells not in SUPPORTED_SITE_COUNTS:
            problems.append(f"cells must be one of {SUPPORTED_SITE_COUNTS}, got {self.cells}")
        for name in ("devices_per_cell", "sc_count", "timeslots", "omega_train", "omega_test"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be at least 1")
        if self.devices_per_cell > self.sc_count:
            problems.append(
                f"devices_per_cell ({self.devices_per_cell}) exceeds sc_count ({self.sc_count}); "
                "round-robin needs one sub-carrier per device"
            )
        if self.seed < 0:
            problems.append("seed must be non-negative")
        if self.isd <= 0:
            problems.append("isd must be positive")
        if self.latency_repetitions < 10:
            problems.append("latency_repetitions must be at least 10")
        if self.scheduler in ("baseline_ici", "baseline_retx") and not self.ici_grid_dbm:
            problems.append("ici_grid_dbm must not be empty for compensated baselines")
        if self.hyper.action_levels < 2:
            problems.append("hyper.action_levels must be at least 2")
        if not 0.0 <= self.hyper.epsilon <= 1.0:
            problems.append("hyper.epsilon must lie in [0, 1]")
        if self.hyper.batch_size < 1 or self.hyper.replay_capacity < self.hyper.batch_size:
            problems.append("hyper.replay_capacity must be at least hyper.batch_size >= 1")
        if self.solver.starts < 1:
            problems.append("solver.starts must be at least 1")
        try:
            build_tables(self.channel.lowest_threshold_db)
        except DomainError as e:
            problems.append(f"channel.lowest_threshold_db: {e}")
        if problems:
            raise ConfigurationError("Invalid configuration: " + "; ".join(problems), problems)
        return self

    def network_settings(self) -> Dict[str, Any]:
        """Settings that must match for schedulers to be compared."""
        return {name: getattr(self, name) for name in NETWORK_SETTINGS}

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        return _merge(cls(), data or {}, prefix="")

    def with_overrides(self, overrides: Iterable[Tuple[str, Any]]) -> "RunConfig":
        """Apply (dotted.path, value) pairs; each replaces exactly one field."""
        config = self
        for path, value in overrides:
            nested: Dict[str, Any] = {}
            cursor = nested
            parts = path.split(".")
            for part in parts[:-1]:
                cursor = cursor.setdefault(part, {})
            cursor[parts[-1]] = value
            config = _merge(config, nested, prefix="")
        return config


def _merge(obj, data: Dict[str, Any], prefix: str):
    if not isinstance(data, dict):
        raise ConfigurationError(f"'{prefix or 'config'}' must be a mapping")
    known = {f.name: f for f in fields(obj)}
    changes = {}
    for key, value in data.items():
        path = f"{prefix}{key}"
        if key not in known:
            raise ConfigurationError(f"Unknown configuration key '{path}'")
        current = getattr(obj, key)
        if is_dataclass(current):
            changes[key] = _merge(current, value, prefix=f"{path}.")
        else:
            changes[key] = _coerce(current, value, path)
    return replace(obj, **changes)


def _coerce(current, value, path: str):
    if value is None:
        raise ConfigurationError(f"'{path}' must not be null")
    try:
        if isinstance(current, bool):
            if isinstance(value, str):
                return value.strip().lower() in {"1", "true", "yes", "on"}
            return bool(value)
        if isinstance(current, int):
            return int(value)
        if isinstance(current, float):
            return float(value)
        if isinstance(current, list):
            return [float(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigurationError(f"Invalid value for '{path}': {value!r}")
    return value


def parse_override(text: str) -> Tuple[str, Any]:
    """Split 'path=value'; the value is read as YAML (numbers, booleans, lists)."""
    path, sep, raw = text.partition("=")
    if not sep or not path.strip():
        raise ConfigurationError(f"Override must look like path=value, got '{text}'")
    return path.strip(), yaml.safe_load(raw)


def load_config(
    path: Optional[str] = None,
    preset: str = "default",
    overrides: Iterable[Tuple[str, Any]] = (),
) -> RunConfig:
    """
    Resolve a RunConfig: preset, then the JSON/YAML document, then overrides.

    Raises:
        ConfigurationError: unknown preset, unreadable document or invalid values
    """
    if preset not in PRESETS:
        raise ConfigurationError(f"Unknown preset '{preset}' (expected one of: {', '.join(PRESETS)})")
    config = RunConfig.from_dict(PRESETS[preset])
    if path:
        try:
            document = yaml.safe_load(Path(path).read_text())
        except (OSError, yaml.YAMLError) as e:
            raise ConfigurationError(f"Cannot read configuration '{path}': {e}")
        config = _merge(config, document or {}, prefix="")
    config = config.with_overrides(overrides)
    logger.debug("Resolved configuration: %s", config.to_dict())
    return config.validate()
