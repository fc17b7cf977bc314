"""Label grids produced by the two optimization models."""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np


@dataclass(frozen=True)
class IterationTelemetry:
    """One optimization step: loss at the start, unassigned pixels after."""

    iteration: int
    loss: float
    unassigned: int


TelemetrySeries = List[IterationTelemetry]


@dataclass
class NeighborhoodMask:
    """Neighborhood label grid with its unassigned-pixel tracker.

    ``labels`` holds values in ``1..N``; ``unassigned`` is ``True`` where a
    pixel has not been permanently set yet. Fixed pixels never change.
    """

    labels: np.ndarray
    unassigned: np.ndarray

    def __post_init__(self) -> None:
        if self.labels.shape != self.unassigned.shape:
            raise ValueError(
                f"labels {self.labels.shape} and unassigned "
                f"{self.unassigned.shape} differ in shape"
            )

    @property
    def shape(self) -> Tuple[int, int]:
        return self.labels.shape  # type: ignore[return-value]

    @property
    def unassigned_count(self) -> int:
        return int(np.count_nonzero(self.unassigned))

    @property
    def is_converged(self) -> bool:
        return not self.unassigned.any()

    def copy(self) -> "NeighborhoodMask":
        return NeighborhoodMask(self.labels.copy(), self.unassigned.copy())


@dataclass
class PhenotypeState:
    """Phenotype label grid, its tracker, and the per-cell instance map.

    ``instance_ids`` is 0 for background and ``k > 0`` for the k-th cell.
    After convergence ids are compact (``1..num_cells``) and
    ``stamp_coverage[k - 1]`` is the fraction of cell k's ellipse stamp
    that survived into the final mask.
    """

    labels: np.ndarray
    unassigned: np.ndarray
    instance_ids: np.ndarray
    stamp_coverage: np.ndarray = field(
        default_factory=lambda: np.zeros(0, dtype=np.float64)
    )

    @property
    def shape(self) -> Tuple[int, int]:
        return self.labels.shape  # type: ignore[return-value]

    @property
    def unassigned_count(self) -> int:
        return int(np.count_nonzero(self.unassigned))

    @property
    def is_converged(self) -> bool:
        return not self.unassigned.any()

    @property
    def num_cells(self) -> int:
        return int(self.instance_ids.max(initial=0))

    def copy(self) -> "PhenotypeState":
        return PhenotypeState(
            self.labels.copy(),
            self.unassigned.copy(),
            self.instance_ids.copy(),
            self.stamp_coverage.copy(),
        )
