"""Cohort manifest models."""

from typing import Dict, List

from pydantic import BaseModel, ConfigDict, Field

from .simulation import SimulationConfig

MANIFEST_VERSION = "1.0"


class FileRecord(BaseModel):
    """One file written for an image, relative to the manifest."""

    model_config = ConfigDict(frozen=True)

    path: str = Field(..., description="POSIX path relative to the manifest")
    bytes: int = Field(..., ge=0, description="File length in bytes")
    sha256: str = Field(..., description="Hex SHA-256 digest")


class ImageRecord(BaseModel):
    """All artifacts generated for one seed."""

    index: int = Field(..., ge=0, description="Position in the seed list")
    seed: int = Field(..., ge=0, description="Seed used for this image")
    directory: str = Field(..., description="Image directory relative to the manifest")
    neighborhood_iterations: int = Field(..., ge=0)
    phenotype_iterations: int = Field(..., ge=0)
    num_cells: int = Field(..., ge=0)
    files: Dict[str, FileRecord] = Field(
        default_factory=dict, description="Artifacts keyed by role"
    )


class DatasetManifest(BaseModel):
    """Index of a generated cohort."""

    format_version: str = Field(default=MANIFEST_VERSION)
    config: SimulationConfig
    seeds: List[int] = Field(default_factory=list)
    images: List[ImageRecord] = Field(default_factory=list)
