"""
Channel Model
Per-timeslot channel gains: path loss, log-normal shadowing, penetration, antenna
gains, sector directivity and Jakes-correlated Rayleigh fading.
"""
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy.special import j0

from ..errors import ConfigurationError, ContractViolation
from ..link.adaptation import LOWEST_THRESHOLD_DB, noise_power_w
from ..link.technology import Technology
from .layout import (
    MIN_DISTANCE_M,
    CellLayout,
    NodePlacement,
    build_layout,
    directivity_attenuation_db,
    min_image_offsets,
    path_loss_db,
)

logger = logging.getLogger(__name__)

REALIZATION_FORMAT_VERSION = 1


@dataclass
class ChannelParams:
    """Physical-layer constants of the channel model."""

    site_gain_dbi: float = 15.0
    device_gain_dbi: float = 0.0
    penetration_db: float = 20.0
    shadowing_std_db: float = 10.0
    doppler_hz: float = 10.0
    frame_interval_s: float = 0.01
    noise_density_dbm_hz: float = -174.0
    sc_spacing_hz: float = 15_000.0
    noise_figure_db: float = 5.0
    lowest_threshold_db: float = LOWEST_THRESHOLD_DB

    @property
    def noise_w(self) -> float:
        return noise_power_w(self.noise_density_dbm_hz, self.sc_spacing_hz, self.noise_figure_db)


def fading_correlation(doppler_hz: float, frame_interval_s: float) -> float:
    """Jakes correlation J0(2 pi f_d T_f)."""
    return float(j0(2.0 * math.pi * doppler_hz * frame_interval_s))


@dataclass(frozen=True)
class FadingProcess:
    """First-order complex Gauss-Markov fading state for a set of links."""

    rho: float
    state: np.ndarray
    doppler_hz: float = 10.0
    frame_interval_s: float = 0.01

    @classmethod
    def start(cls, shape, rng: np.random.Generator, doppler_hz: float = 10.0, frame_interval_s: float = 0.01):
        """Draw a stationary initial state (unit-power circular Gaussian)."""
        return cls(
            rho=fading_correlation(doppler_hz, frame_interval_s),
            state=_complex_gaussian(rng, shape),
            doppler_hz=doppler_hz,
            frame_interval_s=frame_interval_s,
        )

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.state) ** 2


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def jakes_step(process: FadingProcess, rng: np.random.Generator) -> FadingProcess:
    """Advance every link one frame: h' = rho h + sqrt(1 - rho^2) w."""
    if not 0.0 <= process.rho <= 1.0:
        raise ContractViolation(f"fading correlation must lie in [0, 1], got {process.rho}")
    innovation = _complex_gaussian(rng, process.state.shape)
    state = process.rho * process.state + math.sqrt(1.0 - process.rho ** 2) * innovation
    return replace(process, state=state)


def round_robin_sc(cell_ids: Sequence[int], sc_count: int) -> np.ndarray:
    """Within each cell, the k-th device in id order gets sub-carrier k mod sc_count."""
    cell_ids = np.asarray(cell_ids, dtype=int)
    assignment = np.empty(cell_ids.size, dtype=int)
    for cell in np.unique(cell_ids):
        members = np.flatnonzero(cell_ids == cell)
        if members.size > sc_count:
            raise ConfigurationError(
                f"Cell {cell} has {members.size} devices but the resource block only has {sc_count} sub-carriers"
            )
        assignment[members] = np.arange(members.size) % sc_count
    return assignment


@dataclass
class Realization:
    """One network snapshot: placements, sub-carrier assignment and gains over T timeslots."""

    gains: np.ndarray
    cell_ids: np.ndarray
    techs: List[Technology]
    sc_assignment: np.ndarray
    sc_count: int
    noise_w: float
    realization_id: str = "omega-0"
    large_scale_db: Optional[np.ndarray] = None
    layout: Optional[CellLayout] = None
    placements: List[NodePlacement] = field(default_factory=list)

    def __post_init__(self):
        self.gains = np.asarray(self.gains, dtype=float)
        self.cell_ids = np.asarray(self.cell_ids, dtype=int)
        self.sc_assignment = np.asarray(self.sc_assignment, dtype=int)
        if self.gains.ndim != 3 or self.gains.shape[1] != self.cell_ids.size:
            raise ContractViolation("gains must be shaped (timeslots, devices, sites)")
        if not np.all(np.isfinite(self.gains)) or np.any(self.gains <= 0):
            raise ContractViolation("channel gains must be strictly positive and finite")

    @property
    def timeslots(self) -> int:
        return self.gains.shape[0]

    @property
    def num_devices(self) -> int:
        return self.gains.shape[1]

    @property
    def num_cells(self) -> int:
        return self.gains.shape[2]

    def serving_gain(self, t: int) -> np.ndarray:
        return self.gains[t, np.arange(self.num_devices), self.cell_ids]

    def co_channel(self, device: int) -> np.ndarray:
        """Devices sharing ``device``'s sub-carrier, ordered by cell (self included)."""
        members = np.flatnonzero(self.sc_assignment == self.sc_assignment[device])
        return members[np.lexsort((members, self.cell_ids[members]))]

    @classmethod
    def from_gains(
        cls,
        gains,
        cell_ids,
        sc_count: int,
        noise_w: float = 1e-15,
        sc_assignment=None,
        techs=None,
        realization_id: str = "omega-0",
    ) -> "Realization":
        """Build a realization directly from a gain tensor (T, N, B) or matrix (N, B)."""
        gains = np.asarray(gains, dtype=float)
        if gains.ndim == 2:
            gains = gains[None, :, :]
        cell_ids = np.asarray(cell_ids, dtype=int)
        if sc_assignment is None:
            sc_assignment = round_robin_sc(cell_ids, sc_count)
        techs = [Technology.parse(t) for t in techs] if techs is not None else [Technology.NR] * cell_ids.size
        return cls(
            gains=gains,
            cell_ids=cell_ids,
            techs=techs,
            sc_assignment=sc_assignment,
            sc_count=sc_count,
            noise_w=noise_w,
            realization_id=realization_id,
        )

    def to_document(self) -> Dict[str, Any]:
        """Versioned JSON document with gains in dB rounded to 6 decimals."""
        return {
            "format_version": REALIZATION_FORMAT_VERSION,
            "realization_id": self.realization_id,
            "layout": self.layout.to_dict() if self.layout is not None else None,
            "placements": [p.to_dict() for p in self.placements],
            "cell_ids": self.cell_ids.tolist(),
            "techs": [t.value for t in self.techs],
            "sc_count": self.sc_count,
            "sc_assignment": self.sc_assignment.tolist(),
            "noise_w": self.noise_w,
            "gains_db": np.round(10.0 * np.log10(self.gains), 6).tolist(),
        }

    @classmethod
    def from_document(cls, doc: Dict[str, Any]) -> "Realization":
        version = doc.get("format_version")
        if version != REALIZATION_FORMAT_VERSION:
            raise ConfigurationError(f"Unsupported realization format version: {version}")
        layout_doc = doc.get("layout")
        layout = build_layout(**layout_doc) if layout_doc else None
        return cls(
            gains=10.0 ** (np.asarray(doc["gains_db"], dtype=float) / 10.0),
            cell_ids=np.asarray(doc["cell_ids"], dtype=int),
            techs=[Technology.parse(t) for t in doc["techs"]],
            sc_assignment=np.asarray(doc["sc_assignment"], dtype=int),
            sc_count=int(doc["sc_count"]),
            noise_w=float(doc["noise_w"]),
            realization_id=doc.get("realization_id", "omega-0"),
            layout=layout,
            placements=[NodePlacement.from_dict(p) for p in doc.get("placements", [])],
        )


def large_scale_gain_db(
    layout: CellLayout,
    placements: Sequence[NodePlacement],
    params: ChannelParams,
    shadowing_db: np.ndarray,
) -> np.ndarray:
    """
    Large-scale gain (N, B) in dB from every device to every site.

    Distances and bearings use the nearest wraparound image of each site. The directivity
    attenuation is taken relative to the boresight of the device's own sector number, so
    a site only sees full gain from devices its same-numbered sector faces.
    """
    positions = np.array([p.position for p in placements], dtype=float)
    offsets = min_image_offsets(layout, positions[:, None, :] - layout.sites[None, :, :])
    distance = np.maximum(np.hypot(offsets[..., 0], offsets[..., 1]), MIN_DISTANCE_M)
    bearing = np.degrees(np.arctan2(offsets[..., 1], offsets[..., 0]))
    boresight = 120.0 * np.array([p.sector for p in placements], dtype=float)
    attenuation = directivity_attenuation_db(bearing - boresight[:, None])
    return (
        -path_loss_db(distance)
        - params.penetration_db
        - shadowing_db
        + params.site_gain_dbi
        + params.device_gain_dbi
        - attenuation
    )


def realize(
    layout: CellLayout,
    placements: Sequence[NodePlacement],
    T: int,
    fading_enabled: bool,
    rng_seed,
    sc_count: Optional[int] = None,
    params: Optional[ChannelParams] = None,
    fading_seed=None,
    realization_id: str = "omega-0",
) -> Realization:
    """
    Generate the gains of one realization over T timeslots.

    Shadowing and fading draw from independent child streams of ``rng_seed``; passing
    ``fading_seed`` replaces only the fading stream, so large-scale gains stay identical.
    """
    if T < 1:
        raise ConfigurationError(f"Number of timeslots must be at least 1, got {T}")
    if not placements:
        raise ConfigurationError("A realization needs at least one device")
    params = params or ChannelParams()
    cell_ids = np.array([p.cell_id for p in placements], dtype=int)
    if sc_count is None:
        sc_count = int(np.bincount(cell_ids).max())

    shadow_seq, fading_seq = np.random.SeedSequence(rng_seed).spawn(2)
    if fading_seed is not None:
        fading_seq = np.random.SeedSequence(fading_seed)
    shadow_rng = np.random.default_rng(shadow_seq)
    fading_rng = np.random.default_rng(fading_seq)

    shape = (len(placements), layout.num_sites)
    shadowing = shadow_rng.normal(0.0, params.shadowing_std_db, size=shape)
    large_db = large_scale_gain_db(layout, placements, params, shadowing)
    large_lin = 10.0 ** (large_db / 10.0)

    if fading_enabled:
        gains = np.empty((T,) + shape)
        process = FadingProcess.start(shape, fading_rng, params.doppler_hz, params.frame_interval_s)
        for t in range(T):
            gains[t] = large_lin * process.power
            process = jakes_step(process, fading_rng)
    else:
        gains = np.broadcast_to(large_lin, (T,) + shape).copy()

    logger.debug("Realized %s: %d devices, %d sites, %d timeslots", realization_id, shape[0], shape[1], T)
    return Realization(
        gains=gains,
        cell_ids=cell_ids,
        techs=[p.tech for p in placements],
        sc_assignment=round_robin_sc(cell_ids, sc_count),
        sc_count=sc_count,
        noise_w=params.noise_w,
        realization_id=realization_id,
        large_scale_db=large_db,
        layout=layout,
        placements=list(placements),
    )


def save_realizations(path, realizations: Sequence[Realization]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"format_version": REALIZATION_FORMAT_VERSION, "realizations": [r.to_document() for r in realizations]}
    path.write_text(json.dumps(doc))
    return path


def load_realizations(path) -> List[Realization]:
    doc = json.loads(Path(path).read_text())
    if doc.get("format_version") != REALIZATION_FORMAT_VERSION:
        raise ConfigurationError(f"Unsupported realization format version: {doc.get('format_version')}")
    return [Realization.from_document(r) for r in doc["realizations"]]
