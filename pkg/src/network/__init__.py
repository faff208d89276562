"""Network geometry and channel realizations."""
from .channel import (
    ChannelParams,
    FadingProcess,
    Realization,
    fading_correlation,
    jakes_step,
    load_realizations,
    realize,
    round_robin_sc,
    save_realizations,
)
from .layout import (
    CellLayout,
    NodePlacement,
    build_layout,
    directivity_attenuation_db,
    in_hexagon,
    min_image_distance,
    path_loss_db,
    place_devices,
)

__all__ = [
    "ChannelParams",
    "FadingProcess",
    "Realization",
    "fading_correlation",
    "jakes_step",
    "load_realizations",
    "realize",
    "round_robin_sc",
    "save_realizations",
    "CellLayout",
    "NodePlacement",
    "build_layout",
    "directivity_attenuation_db",
    "in_hexagon",
    "min_image_distance",
    "path_loss_db",
    "place_devices",
]
