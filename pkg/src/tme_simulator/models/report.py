"""Metrics report types."""

from dataclasses import dataclass
from typing import List

import numpy as np


@dataclass(frozen=True)
class PhenotypeMorphology:
    """Median shape of the well-preserved cells of one phenotype."""

    phenotype: int
    cells: int
    median_semi_major_axis: float
    median_eccentricity: float


@dataclass
class MetricsReport:
    """Measured counterparts of the configured tissue rules.

    Matrix axes follow the config: neighborhoods and phenotypes are indexed
    0-based here for label ``k`` at position ``k - 1``.
    """

    neighborhood_adjacency: np.ndarray  # N x N
    neighborhood_areas: np.ndarray  # N
    phenotype_interactions: np.ndarray  # P x P x N
    phenotype_abundance_pct: np.ndarray  # P x N
    phenotype_cell_counts: np.ndarray  # P x N
    expression_mean: np.ndarray  # P x C
    expression_std: np.ndarray  # P x C
    morphology: List[PhenotypeMorphology]

    @property
    def expression_stats(self) -> np.ndarray:
        """P x C x 2 table of (mean, std)."""
        return np.stack([self.expression_mean, self.expression_std], axis=-1)
