"""Tissue metrics."""

from .graph import CellGraph, build_cell_graph, cell_centroids
from .metrics import (
    cell_neighborhoods,
    cell_table,
    compute_metrics,
    marker_expression_stats,
    morphology_summary,
    neighborhood_adjacency,
    normalized_adjacency,
    normalized_interactions,
    phenotype_abundance_stats,
    phenotype_cell_counts,
    phenotype_interaction_counts,
)

__all__ = [
    "CellGraph",
    "build_cell_graph",
    "cell_centroids",
    "cell_neighborhoods",
    "cell_table",
    "compute_metrics",
    "marker_expression_stats",
    "morphology_summary",
    "neighborhood_adjacency",
    "normalized_adjacency",
    "normalized_interactions",
    "phenotype_abundance_stats",
    "phenotype_cell_counts",
    "phenotype_interaction_counts",
]
