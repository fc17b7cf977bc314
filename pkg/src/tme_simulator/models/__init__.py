"""Domain models for the simulator."""

from .image import MultiplexImage
from .manifest import DatasetManifest, FileRecord, ImageRecord
from .masks import IterationTelemetry, NeighborhoodMask, PhenotypeState, TelemetrySeries
from .report import MetricsReport, PhenotypeMorphology
from .simulation import SimulationConfig

__all__ = [
    "SimulationConfig",
    "NeighborhoodMask",
    "PhenotypeState",
    "IterationTelemetry",
    "TelemetrySeries",
    "MultiplexImage",
    "MetricsReport",
    "PhenotypeMorphology",
    "DatasetManifest",
    "ImageRecord",
    "FileRecord",
]
