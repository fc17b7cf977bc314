"""Radius graph over cell centroids."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.spatial import cKDTree

from tme_simulator.models import PhenotypeState

DEFAULT_GRAPH_RADIUS = 12.0


@dataclass
class CellGraph:
    """Cells ordered by instance id, with undirected edges ``i < j``.

    ``edges`` holds positions into the cell arrays, sorted row-wise.
    """

    ids: np.ndarray  # K
    centroids: np.ndarray  # K x 2, (row, col)
    phenotypes: np.ndarray  # K
    edges: np.ndarray  # E x 2

    @property
    def num_cells(self) -> int:
        return int(self.ids.size)

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])


def cell_centroids(instance_ids: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Ids present in the map and the mean pixel position of each."""
    flat = instance_ids.ravel()
    rows, cols = np.indices(instance_ids.shape)
    area = np.bincount(flat)
    ids = np.flatnonzero(area)
    ids = ids[ids > 0]
    row_sum = np.bincount(flat, weights=rows.ravel())
    col_sum = np.bincount(flat, weights=cols.ravel())
    centroids = np.column_stack([row_sum[ids], col_sum[ids]]) / area[ids, None]
    return ids, centroids.reshape(-1, 2)


def build_cell_graph(
    state: PhenotypeState, radius: float = DEFAULT_GRAPH_RADIUS
) -> CellGraph:
    """Connect cells whose centroids are closer than ``radius``.

    Background (id 0) contributes no nodes.
    """
    ids, centroids = cell_centroids(state.instance_ids)

    flat_ids = state.instance_ids.ravel()
    present, first = np.unique(flat_ids, return_index=True)
    lookup = dict(zip(present.tolist(), state.labels.ravel()[first].tolist()))
    phenotypes = np.array([lookup[i] for i in ids.tolist()], dtype=np.int32)

    if ids.size < 2:
        edges = np.zeros((0, 2), dtype=np.int64)
    else:
        tree = cKDTree(centroids)
        pairs = tree.query_pairs(radius, output_type="ndarray").astype(np.int64)
        if pairs.size:
            delta = centroids[pairs[:, 0]] - centroids[pairs[:, 1]]
            pairs = pairs[np.hypot(delta[:, 0], delta[:, 1]) < radius]
            pairs = np.sort(pairs, axis=1)
            pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
        edges = pairs.reshape(-1, 2)

    return CellGraph(
        ids=ids.astype(np.int64),
        centroids=centroids,
        phenotypes=phenotypes,
        edges=edges,
    )
