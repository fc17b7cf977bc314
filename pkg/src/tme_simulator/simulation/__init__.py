"""Tissue optimization models."""

from .geometry import (
    EllipseStamp,
    generate_ellipse,
    pick_unassigned,
    rasterize_ellipse,
    window_slices,
)
from .neighborhoods import (
    NeighborhoodModel,
    abundance_percentages,
    init_neighborhood_mask,
    measure_abundance,
    neighborhood_loss,
    neighborhood_step,
    run_neighborhood_model,
    update_rule_matrix,
)
from .phenotypes import (
    PhenotypeModel,
    background_state,
    init_phenotype_state,
    measure_phenotype_abundance,
    phenotype_loss,
    phenotype_percentages,
    phenotype_step,
    phenotype_update_tensor,
    run_phenotype_model,
)

__all__ = [
    "EllipseStamp",
    "generate_ellipse",
    "pick_unassigned",
    "rasterize_ellipse",
    "window_slices",
    "NeighborhoodModel",
    "abundance_percentages",
    "init_neighborhood_mask",
    "measure_abundance",
    "neighborhood_loss",
    "neighborhood_step",
    "run_neighborhood_model",
    "update_rule_matrix",
    "PhenotypeModel",
    "background_state",
    "init_phenotype_state",
    "measure_phenotype_abundance",
    "phenotype_loss",
    "phenotype_percentages",
    "phenotype_step",
    "phenotype_update_tensor",
    "run_phenotype_model",
]
