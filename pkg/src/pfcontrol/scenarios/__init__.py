from .presets import ScenarioSpec, available, builtin, preset
from .profiles import (
    Disc,
    Interval,
    Rectangle,
    Segment,
    extract_interface,
    indicator_profile,
    region_profile,
    solid_fraction,
    tanh_profile,
)


__all__ = [
    "ScenarioSpec",
    "available",
    "builtin",
    "preset",
    "Disc",
    "Interval",
    "Rectangle",
    "Segment",
    "extract_interface",
    "indicator_profile",
    "region_profile",
    "solid_fraction",
    "tanh_profile",
]
