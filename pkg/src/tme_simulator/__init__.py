"""TME Simulator - synthetic multiplexed tissue images with ground-truth masks."""

__version__ = "0.1.0"
__description__ = (
    "Deterministic simulator of multiplexed immunofluorescence tissue images"
)

from .config import parse_config, preset_fig4, settings, validate_config
from .models import SimulationConfig
from .pipeline import CohortGenerator, generate_cohort, simulate_image

__all__ = [
    "settings",
    "SimulationConfig",
    "parse_config",
    "validate_config",
    "preset_fig4",
    "CohortGenerator",
    "generate_cohort",
    "simulate_image",
]
