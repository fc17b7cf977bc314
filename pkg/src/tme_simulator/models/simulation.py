"""Simulation parameter model."""

from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt

Vector = Tuple[float, ...]
Matrix = Tuple[Tuple[float, ...], ...]
Tensor = Tuple[Tuple[Tuple[float, ...], ...], ...]


class SimulationConfig(BaseModel):
    """All user-defined parameters of one simulated tissue.

    Percentages are stored on a 0-100 scale. Label indices (neighborhoods,
    phenotypes, markers) are 1-based throughout, matching the ``Nb1``,
    ``Ph1`` and ``Mk1`` naming used in reports.

    Structural problems (missing fields, wrong types, non-positive sizes)
    are rejected on construction; cross-field invariants are checked by
    :func:`tme_simulator.config.validate_config`.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    # Tissue geometry
    width: PositiveInt = Field(..., description="Image width in pixels (m_x)")
    height: PositiveInt = Field(..., description="Image height in pixels (m_y)")

    # Cellular neighborhoods
    num_neighborhoods: PositiveInt = Field(..., description="Number of neighborhoods N")
    neighborhood_abundance: Vector = Field(
        ..., description="Target share of each neighborhood, summing to 100"
    )
    neighborhood_interaction: Matrix = Field(
        ..., description="N x N interactions: >0 attraction, <0 repulsion"
    )
    background_neighborhood: int = Field(
        ..., description="1-based index of the cell-free neighborhood"
    )

    # Cell phenotypes
    num_phenotypes: PositiveInt = Field(
        ..., description="Number of phenotypes P, background included"
    )
    background_phenotype: int = Field(
        ..., description="1-based index of the 'no cell' phenotype"
    )
    phenotype_abundance: Matrix = Field(
        ..., description="P x N phenotype shares per neighborhood, columns sum to 100"
    )
    phenotype_interaction: Tensor = Field(
        ..., description="P x P x N phenotype interactions per neighborhood"
    )
    phenotype_eccentricity: Vector = Field(
        ..., description="Cell eccentricity per phenotype, in [0, 1)"
    )
    phenotype_size: Vector = Field(
        ..., description="Semi-major axis per phenotype, in pixels"
    )

    # Markers and acquisition
    num_markers: PositiveInt = Field(..., description="Number of markers C")
    marker_expression: Matrix = Field(
        ..., description="P x C relative expression level in [0, 1]"
    )
    leakage_sigma: PositiveFloat = Field(
        default=0.5, description="Spectral leakage std, in channels"
    )
    psf_sigma: PositiveFloat = Field(
        default=0.75, description="Point spread function std, in pixels"
    )
    snr_db: float = Field(default=20.0, description="Dark-current noise SNR in dB")

    # Reproducibility
    seed: int = Field(
        default=0, ge=0, le=2**64 - 1, description="Default 64-bit seed"
    )

    # Optimizer geometry
    window_radius: PositiveInt = Field(
        default=12,
        description="Optimization windows cover Chebyshev distance < radius",
    )
    graph_radius: PositiveFloat = Field(
        default=12.0, description="Cell graph connection radius, in pixels"
    )
    max_provisional_visits: PositiveInt = Field(
        default=8,
        description="Provisional rewrites a pixel tolerates before its window settles",
    )

    # Output options
    marker_names: Optional[Tuple[str, ...]] = Field(
        default=None, description="Display names of the markers"
    )
    phenotype_names: Optional[Tuple[str, ...]] = Field(
        default=None, description="Display names of the phenotypes"
    )
    neighborhood_names: Optional[Tuple[str, ...]] = Field(
        default=None, description="Display names of the neighborhoods"
    )

    @property
    def shape(self) -> Tuple[int, int]:
        """Image shape as (rows, columns)."""
        return (self.height, self.width)

    @property
    def pixel_count(self) -> int:
        return self.width * self.height

    @property
    def marker_labels(self) -> List[str]:
        return list(self.marker_names or _numbered("Mk", self.num_markers))

    @property
    def phenotype_labels(self) -> List[str]:
        return list(self.phenotype_names or _numbered("Ph", self.num_phenotypes))

    @property
    def neighborhood_labels(self) -> List[str]:
        return list(
            self.neighborhood_names or _numbered("Nb", self.num_neighborhoods)
        )

    def neighborhood_abundance_array(self) -> np.ndarray:
        return np.asarray(self.neighborhood_abundance, dtype=np.float64)

    def neighborhood_interaction_array(self) -> np.ndarray:
        return np.asarray(self.neighborhood_interaction, dtype=np.float64)

    def phenotype_abundance_array(self) -> np.ndarray:
        return np.asarray(self.phenotype_abundance, dtype=np.float64)

    def phenotype_interaction_array(self) -> np.ndarray:
        return np.asarray(self.phenotype_interaction, dtype=np.float64)

    def marker_expression_array(self) -> np.ndarray:
        return np.asarray(self.marker_expression, dtype=np.float64)


def _numbered(prefix: str, count: int) -> List[str]:
    return [f"{prefix}{index}" for index in range(1, count + 1)]
