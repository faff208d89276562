"""
Cell Layout
Hexagonal site grid with optional wraparound, uniform device placement and the
large-scale propagation terms (path loss, sector directivity).
"""
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import ConfigurationError, DomainError
from ..link.technology import Technology

MIN_DISTANCE_M = 35.0
SECTOR_BORESIGHTS_DEG = (0.0, 120.0, 240.0)
SUPPORTED_SITE_COUNTS = (1, 3, 7)

# Neighbor directions of a hexagonal site grid.
_RING = np.array(
    [[math.cos(math.radians(30.0 + 60.0 * k)), math.sin(math.radians(30.0 + 60.0 * k))] for k in range(6)]
)


@dataclass(frozen=True)
class CellLayout:
    """Site coordinates plus the lattice translations used for wraparound."""

    num_sites: int
    isd: float
    wraparound: bool
    sites: np.ndarray
    translations: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    sectors_per_site: int = 3

    @property
    def cell_radius(self) -> float:
        return self.isd / math.sqrt(3.0)

    def to_dict(self) -> dict:
        return {"num_sites": self.num_sites, "isd": self.isd, "wraparound": self.wraparound}


@dataclass(frozen=True)
class NodePlacement:
    """One device: its serving cell, position, technology and serving sector."""

    device_id: int
    cell_id: int
    position: Tuple[float, float]
    tech: Technology
    sector: int = 0

    def to_dict(self) -> dict:
        return {
            "device_id": self.device_id,
            "cell_id": self.cell_id,
            "position": [self.position[0], self.position[1]],
            "tech": self.tech.value,
            "sector": self.sector,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NodePlacement":
        return cls(
            device_id=int(data["device_id"]),
            cell_id=int(data["cell_id"]),
            position=(float(data["position"][0]), float(data["position"][1])),
            tech=Technology.parse(data["tech"]),
            sector=int(data.get("sector", 0)),
        )


def build_layout(num_sites: int, isd: float, wraparound: bool) -> CellLayout:
    """
    Build a hexagonal cluster of 1, 3 or 7 sites.

    With wraparound the cluster tiles the plane; the six returned translations are the
    nearest cluster replicas (length isd, isd*sqrt(3) and isd*sqrt(7) respectively).

    Raises:
        ConfigurationError: unsupported site count or non-positive isd
    """
    if num_sites not in SUPPORTED_SITE_COUNTS:
        raise ConfigurationError(
            f"Unsupported number of sites: {num_sites} (supported: {', '.join(map(str, SUPPORTED_SITE_COUNTS))})"
        )
    if isd <= 0:
        raise ConfigurationError(f"Inter-site distance must be positive, got {isd}")

    if num_sites == 1:
        sites = np.zeros((1, 2))
        replicas = isd * _RING
    elif num_sites == 3:
        sites = np.vstack([np.zeros(2), isd * _RING[0], isd * _RING[1]])
        replicas = isd * (_RING + np.roll(_RING, -1, axis=0))
    else:
        sites = np.vstack([np.zeros(2), isd * _RING])
        replicas = isd * (2.0 * _RING + np.roll(_RING, -1, axis=0))

    translations = replicas if wraparound else np.zeros((0, 2))
    return CellLayout(
        num_sites=num_sites, isd=float(isd), wraparound=wraparound, sites=sites, translations=translations
    )


def min_image_offsets(layout: CellLayout, offsets: np.ndarray) -> np.ndarray:
    """
    Map raw offsets (..., 2) to their shortest representative under the layout lattice.

    Offsets are first reduced into the fundamental rhombus of the lattice and then
    compared against the six nearest images, which is exact for a hexagonal lattice.
    """
    offsets = np.asarray(offsets, dtype=float)
    if not layout.wraparound:
        return offsets
    basis = np.column_stack([layout.translations[0], layout.translations[1]])
    coeffs = np.linalg.solve(basis, offsets.reshape(-1, 2).T)
    reduced = offsets.reshape(-1, 2) - (basis @ np.round(coeffs)).T
    candidates = reduced[:, None, :] + np.vstack([np.zeros((1, 2)), layout.translations])[None, :, :]
    best = np.argmin(np.einsum("nkd,nkd->nk", candidates, candidates), axis=1)
    return candidates[np.arange(len(reduced)), best].reshape(offsets.shape)


def min_image_distance(layout: CellLayout, point: Sequence[float], site: Sequence[float]) -> float:
    offset = np.asarray(point, dtype=float) - np.asarray(site, dtype=float)
    return float(np.linalg.norm(min_image_offsets(layout, offset)))


def in_hexagon(layout: CellLayout, point: Sequence[float], cell_id: int) -> bool:
    """True if the point lies in the hexagon served by ``cell_id`` (boundary included)."""
    offset = np.asarray(point, dtype=float) - layout.sites[cell_id]
    return bool(np.all(_RING @ offset <= layout.isd / 2.0 + 1e-9))


def serving_sector(offset: Sequence[float]) -> int:
    """Sector whose boresight is nearest to the bearing of ``offset`` seen from the site."""
    bearing = math.degrees(math.atan2(offset[1], offset[0])) % 360.0
    return int(round(bearing / 120.0)) % 3


def place_devices(
    layout: CellLayout,
    per_cell: int,
    tech,
    rng_seed,
    mixed_tech: bool = False,
) -> List[NodePlacement]:
    """
    Drop ``per_cell`` devices uniformly in every cell's hexagon.

    Points are rejection-sampled from the bounding box and kept only when inside the
    hexagon and at least 35 m from the serving site. With ``mixed_tech`` the devices of
    a cell cycle through NB-IoT, LTE-M and 5G-NR in id order.
    """
    if per_cell < 1:
        raise ConfigurationError(f"Devices per cell must be at least 1, got {per_cell}")
    tech = Technology.parse(tech)
    cycle = list(Technology)
    rng = np.random.default_rng(rng_seed)
    radius = layout.cell_radius

    placements = []
    device_id = 0
    for cell_id, site in enumerate(layout.sites):
        for k in range(per_cell):
            while True:
                offset = rng.uniform(-radius, radius, size=2)
                if np.hypot(*offset) >= MIN_DISTANCE_M and np.all(_RING @ offset <= layout.isd / 2.0):
                    break
            position = site + offset
            placements.append(
                NodePlacement(
                    device_id=device_id,
                    cell_id=cell_id,
                    position=(float(position[0]), float(position[1])),
                    tech=cycle[k % len(cycle)] if mixed_tech else tech,
                    sector=serving_sector(offset),
                )
            )
            device_id += 1
    return placements


def path_loss_db(distance):
    """
    Urban macro path loss 128.1 + 37.6 log10(d / 1 km).

    Raises:
        DomainError: distance below 35 m
    """
    d = np.asarray(distance, dtype=float)
    if np.any(d < MIN_DISTANCE_M):
        raise DomainError(f"Path-loss model requires distance >= {MIN_DISTANCE_M} m")
    loss = 128.1 + 37.6 * np.log10(d / 1000.0)
    return float(loss) if loss.ndim == 0 else loss


def directivity_attenuation_db(angle_off_boresight, cap_db: float = 20.0):
    """Sector pattern attenuation min(12 (theta / 65)^2, 20) dB."""
    theta = (np.asarray(angle_off_boresight, dtype=float) + 180.0) % 360.0 - 180.0
    # +180 folds onto -180, both saturate
    att = np.minimum(12.0 * (theta / 65.0) ** 2, cap_db)
    return float(att) if att.ndim == 0 else att
