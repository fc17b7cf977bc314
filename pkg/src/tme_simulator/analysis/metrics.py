"""Measurements comparing a generated tissue with its config."""

from typing import List, Tuple

import numpy as np
import pandas as pd
from skimage.measure import regionprops_table

from tme_simulator.models import (
    MetricsReport,
    MultiplexImage,
    NeighborhoodMask,
    PhenotypeMorphology,
    PhenotypeState,
    SimulationConfig,
)
from tme_simulator.simulation.neighborhoods import measure_abundance
from tme_simulator.simulation.phenotypes import measure_phenotype_abundance
from tme_simulator.utils.logging import get_logger

from .graph import CellGraph, build_cell_graph

logger = get_logger(__name__)

MORPHOLOGY_MIN_COVERAGE = 0.9


def neighborhood_adjacency(nb: NeighborhoodMask, num_neighborhoods: int) -> np.ndarray:
    """Count 4-adjacent pixel pairs between every two neighborhoods.

    The result is symmetric with a zero diagonal.
    """
    labels = nb.labels - 1
    n = num_neighborhoods
    counts = np.zeros(n * n, dtype=np.int64)
    for a, b in (
        (labels[:, :-1], labels[:, 1:]),
        (labels[:-1, :], labels[1:, :]),
    ):
        boundary = a != b
        counts += np.bincount(
            (a[boundary] * n + b[boundary]).ravel(), minlength=n * n
        )[: n * n]
    adjacency = counts.reshape(n, n)
    return adjacency + adjacency.T


def cell_neighborhoods(graph: CellGraph, nb: NeighborhoodMask) -> np.ndarray:
    """Neighborhood label under each cell's rounded centroid."""
    if graph.num_cells == 0:
        return np.zeros(0, dtype=np.int32)
    height, width = nb.shape
    rows = np.clip(np.rint(graph.centroids[:, 0]).astype(np.int64), 0, height - 1)
    cols = np.clip(np.rint(graph.centroids[:, 1]).astype(np.int64), 0, width - 1)
    return nb.labels[rows, cols].astype(np.int32)


def phenotype_interaction_counts(
    graph: CellGraph,
    nb: NeighborhoodMask,
    num_phenotypes: int,
    num_neighborhoods: int,
) -> np.ndarray:
    """P x P x N count of graph edges per phenotype pair and neighborhood.

    An edge belongs to the neighborhood of its lower-id endpoint. Mixed
    pairs are counted in both ``(p, q)`` and ``(q, p)``; same-phenotype
    pairs once on the diagonal.
    """
    counts = np.zeros((num_phenotypes, num_phenotypes, num_neighborhoods), np.int64)
    if graph.num_edges == 0:
        return counts

    homes = cell_neighborhoods(graph, nb)
    first, second = graph.edges[:, 0], graph.edges[:, 1]
    p = graph.phenotypes[first] - 1
    q = graph.phenotypes[second] - 1
    n = homes[first] - 1
    np.add.at(counts, (p, q, n), 1)
    mixed = p != q
    np.add.at(counts, (q[mixed], p[mixed], n[mixed]), 1)
    return counts


def phenotype_cell_counts(
    graph: CellGraph,
    nb: NeighborhoodMask,
    num_phenotypes: int,
    num_neighborhoods: int,
) -> np.ndarray:
    """P x N number of cells by phenotype and centroid neighborhood."""
    counts = np.zeros((num_phenotypes, num_neighborhoods), dtype=np.int64)
    if graph.num_cells:
        homes = cell_neighborhoods(graph, nb)
        np.add.at(counts, (graph.phenotypes - 1, homes - 1), 1)
    return counts


def phenotype_abundance_stats(
    state: PhenotypeState,
    nb: NeighborhoodMask,
    num_phenotypes: int,
    num_neighborhoods: int,
) -> np.ndarray:
    """P x N pixel percentages per neighborhood; empty neighborhoods are zeros."""
    counts = measure_phenotype_abundance(
        state, nb, num_phenotypes, num_neighborhoods
    ).astype(np.float64)
    areas = counts.sum(axis=0)
    return np.divide(
        counts * 100.0,
        areas[None, :],
        out=np.zeros_like(counts),
        where=areas[None, :] > 0,
    )


def marker_expression_stats(
    img: MultiplexImage, state: PhenotypeState, num_phenotypes: int
) -> Tuple[np.ndarray, np.ndarray]:
    """P x C mean and standard deviation of each channel per phenotype.

    Phenotypes without pixels get NaN.
    """
    labels = state.labels.ravel() - 1
    pixels = np.bincount(labels, minlength=num_phenotypes)[:num_phenotypes]
    mean = np.full((num_phenotypes, img.num_channels), np.nan)
    std = np.full((num_phenotypes, img.num_channels), np.nan)
    present = pixels > 0

    for c in range(img.num_channels):
        values = img.channels[c].ravel().astype(np.float64)
        sums = np.bincount(labels, weights=values, minlength=num_phenotypes)
        channel_mean = np.divide(
            sums[:num_phenotypes], pixels, out=np.zeros(num_phenotypes), where=present
        )
        deviation = values - channel_mean[labels]
        squares = np.bincount(labels, weights=deviation**2, minlength=num_phenotypes)
        channel_var = np.divide(
            squares[:num_phenotypes],
            pixels,
            out=np.zeros(num_phenotypes),
            where=present,
        )
        mean[present, c] = channel_mean[present]
        std[present, c] = np.sqrt(channel_var[present])

    return mean, std


def normalized_adjacency(adjacency: np.ndarray, areas: np.ndarray) -> np.ndarray:
    """Adjacency divided by the geometric mean of the two areas."""
    areas = np.asarray(areas, dtype=np.float64)
    scale = np.sqrt(np.outer(areas, areas))
    return np.divide(
        adjacency.astype(np.float64),
        scale,
        out=np.zeros(adjacency.shape),
        where=scale > 0,
    )


def normalized_interactions(
    interactions: np.ndarray, cell_counts: np.ndarray
) -> np.ndarray:
    """Edge counts divided by the product of the two phenotypes' cell counts."""
    counts = np.asarray(cell_counts, dtype=np.float64)
    scale = counts[:, None, :] * counts[None, :, :]
    return np.divide(
        interactions.astype(np.float64),
        scale,
        out=np.zeros(interactions.shape),
        where=scale > 0,
    )


def cell_table(state: PhenotypeState) -> pd.DataFrame:
    """One row per cell: phenotype, stamp coverage and measured shape."""
    table = pd.DataFrame(
        regionprops_table(
            state.instance_ids,
            properties=("label", "axis_major_length", "eccentricity"),
        )
    )
    if table.empty:
        return pd.DataFrame(
            columns=[
                "cell_id",
                "phenotype",
                "stamp_coverage",
                "semi_major_axis",
                "eccentricity",
            ]
        )

    flat = state.instance_ids.ravel()
    present, first = np.unique(flat, return_index=True)
    phenotype_of = dict(zip(present.tolist(), state.labels.ravel()[first].tolist()))
    ids = table["label"].to_numpy()
    coverage = np.full(ids.size, np.nan)
    known = ids <= state.stamp_coverage.size
    coverage[known] = state.stamp_coverage[ids[known] - 1]

    return pd.DataFrame(
        {
            "cell_id": ids,
            "phenotype": [phenotype_of[i] for i in ids.tolist()],
            "stamp_coverage": coverage,
            "semi_major_axis": table["axis_major_length"].to_numpy() / 2.0,
            "eccentricity": table["eccentricity"].to_numpy(),
        }
    )


def morphology_summary(
    state: PhenotypeState,
    num_phenotypes: int,
    background_phenotype: int,
    min_coverage: float = MORPHOLOGY_MIN_COVERAGE,
) -> List[PhenotypeMorphology]:
    """Median shape of cells that kept at least ``min_coverage`` of their stamp."""
    cells = cell_table(state)
    kept = cells[cells["stamp_coverage"] >= min_coverage]
    grouped = kept.groupby("phenotype")
    summary = []
    for phenotype in range(1, num_phenotypes + 1):
        if phenotype == background_phenotype:
            continue
        if phenotype in grouped.groups:
            group = grouped.get_group(phenotype)
            summary.append(
                PhenotypeMorphology(
                    phenotype=phenotype,
                    cells=int(len(group)),
                    median_semi_major_axis=float(group["semi_major_axis"].median()),
                    median_eccentricity=float(group["eccentricity"].median()),
                )
            )
        else:
            summary.append(
                PhenotypeMorphology(phenotype, 0, float("nan"), float("nan"))
            )
    return summary


def compute_metrics(
    cfg: SimulationConfig,
    nb: NeighborhoodMask,
    state: PhenotypeState,
    image: MultiplexImage,
) -> MetricsReport:
    """Full metrics report for one generated image."""
    n, p = cfg.num_neighborhoods, cfg.num_phenotypes
    graph = build_cell_graph(state, cfg.graph_radius)
    mean, std = marker_expression_stats(image, state, p)
    report = MetricsReport(
        neighborhood_adjacency=neighborhood_adjacency(nb, n),
        neighborhood_areas=measure_abundance(nb, n).astype(np.int64),
        phenotype_interactions=phenotype_interaction_counts(graph, nb, p, n),
        phenotype_abundance_pct=phenotype_abundance_stats(state, nb, p, n),
        phenotype_cell_counts=phenotype_cell_counts(graph, nb, p, n),
        expression_mean=mean,
        expression_std=std,
        morphology=morphology_summary(state, p, cfg.background_phenotype),
    )
    logger.debug("Computed metrics", cells=graph.num_cells, edges=graph.num_edges)
    return report
