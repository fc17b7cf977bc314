"""Configuration package for the simulator."""

from .settings import Settings, settings  # isort: skip
from .loader import (
    ValidationResult,
    load_config,
    parse_config,
    serialize_config,
    validate_config,
)
from .presets import PresetScale, get_preset, preset_fig4

__all__ = [
    "Settings",
    "settings",
    "ValidationResult",
    "load_config",
    "parse_config",
    "serialize_config",
    "validate_config",
    "PresetScale",
    "get_preset",
    "preset_fig4",
]
