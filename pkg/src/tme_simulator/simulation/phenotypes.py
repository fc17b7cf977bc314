"""Cell phenotype model.

Elliptical cells are stamped into the neighborhood mask one window at a
time. The neighborhood that dominates the window selects the abundance
targets and the interaction plane. Each candidate phenotype is scored by
how far its fixed pixels lag behind its target share, weighted by how
strongly the fixed phenotypes already in the window attract it.
"""

from typing import Dict, Optional, Tuple

import numpy as np
from skimage.measure import label as label_components

from tme_simulator.config.settings import settings
from tme_simulator.exceptions import ConvergenceError, SimulationStateError
from tme_simulator.models import (
    IterationTelemetry,
    NeighborhoodMask,
    PhenotypeState,
    SimulationConfig,
    TelemetrySeries,
)
from tme_simulator.utils.logging import LoggerMixin

from .geometry import EllipseStamp, generate_ellipse, pick_unassigned, window_slices
from .neighborhoods import measure_abundance

FIX_SHARE = 0.8
BACKGROUND_SHARE = 0.2
FORCED_FIX_SHARE = 0.5
ATTRACTION_GAIN = 4.0
MIN_ATTRACTION = 0.05


def measure_phenotype_abundance(
    state: PhenotypeState,
    nb: NeighborhoodMask,
    num_phenotypes: int,
    num_neighborhoods: int,
) -> np.ndarray:
    """P x N matrix of pixel counts of each phenotype inside each neighborhood."""
    flat = (state.labels.ravel() - 1) * num_neighborhoods + (nb.labels.ravel() - 1)
    counts = np.bincount(flat, minlength=num_phenotypes * num_neighborhoods)
    return counts[: num_phenotypes * num_neighborhoods].reshape(
        num_phenotypes, num_neighborhoods
    )


def phenotype_percentages(
    counts: np.ndarray, areas: np.ndarray, epsilon: float
) -> np.ndarray:
    """Per-neighborhood percentages with zeros clamped to ``epsilon``."""
    areas = np.asarray(areas, dtype=np.float64)
    pct = np.divide(
        np.asarray(counts, dtype=np.float64) * 100.0,
        areas[None, :],
        out=np.zeros(np.shape(counts), dtype=np.float64),
        where=areas[None, :] > 0,
    )
    return np.where(pct > 0, pct, epsilon)


def phenotype_update_tensor(
    interaction: np.ndarray, target: np.ndarray, actual_pct: np.ndarray
) -> np.ndarray:
    """``U(i, j, n) = P_int(i, j, n) * (P_ab(j, n) / actual(j, n))**2``."""
    deficit = (np.asarray(target, dtype=np.float64) / actual_pct) ** 2
    return np.asarray(interaction, dtype=np.float64) * deficit[None, :, :]


def phenotype_loss(
    interaction: np.ndarray, target: np.ndarray, actual_pct: np.ndarray
) -> float:
    """Sum of absolute entries of the update tensor."""
    return float(np.abs(phenotype_update_tensor(interaction, target, actual_pct)).sum())


def init_phenotype_state(
    cfg: SimulationConfig, rng: np.random.Generator
) -> PhenotypeState:
    """Uniform random phenotypes, every pixel unassigned, no cells yet."""
    labels = rng.integers(1, cfg.num_phenotypes + 1, size=cfg.shape, dtype=np.int32)
    return PhenotypeState(
        labels=labels,
        unassigned=np.ones(cfg.shape, dtype=bool),
        instance_ids=np.zeros(cfg.shape, dtype=np.int32),
    )


def background_state(cfg: SimulationConfig) -> PhenotypeState:
    """Fully assigned tissue without cells."""
    return PhenotypeState(
        labels=np.full(cfg.shape, cfg.background_phenotype, dtype=np.int32),
        unassigned=np.zeros(cfg.shape, dtype=bool),
        instance_ids=np.zeros(cfg.shape, dtype=np.int32),
    )


class PhenotypeModel(LoggerMixin):
    """Step-wise cell placement over a fixed neighborhood mask."""

    def __init__(
        self,
        cfg: SimulationConfig,
        nb: NeighborhoodMask,
        rng: np.random.Generator,
        state: Optional[PhenotypeState] = None,
    ) -> None:
        if nb.shape != cfg.shape:
            raise ValueError(f"neighborhood mask {nb.shape} does not match {cfg.shape}")
        self.cfg = cfg
        self.nb = nb
        self.rng = rng
        self.state = state if state is not None else init_phenotype_state(cfg, rng)
        self.iteration = 0

        self._p = cfg.num_phenotypes
        self._n = cfg.num_neighborhoods
        self._background = cfg.background_phenotype
        self._interaction = cfg.phenotype_interaction_array()
        self._target = cfg.phenotype_abundance_array()
        self._areas = measure_abundance(nb, self._n).astype(np.float64)
        self._epsilon = 100.0 / float(cfg.pixel_count)
        self._counts = measure_phenotype_abundance(
            self.state, nb, self._p, self._n
        ).astype(np.int64)
        fixed = ~self.state.unassigned
        self._fixed_counts = np.bincount(
            (self.state.labels[fixed] - 1) * self._n + (nb.labels[fixed] - 1),
            minlength=self._p * self._n,
        ).reshape(self._p, self._n)
        self._visits = np.zeros(cfg.shape, dtype=np.int32)
        self._unassigned = self.state.unassigned_count
        self._next_id = self.state.num_cells + 1
        self._stamp_sizes: Dict[int, int] = {}

    @property
    def unassigned_count(self) -> int:
        return self._unassigned

    def percentages(self) -> np.ndarray:
        return phenotype_percentages(self._counts, self._areas, self._epsilon)

    def step(self) -> IterationTelemetry:
        """Place one stamp in place."""
        if self._unassigned == 0:
            raise SimulationStateError("phenotype mask is fully assigned")

        pct = self.percentages()
        loss = phenotype_loss(self._interaction, self._target, pct)

        center = pick_unassigned(self.state.unassigned, self.rng)
        window = window_slices(center, self.cfg.shape, self.cfg.window_radius)
        neighborhood = self._dominant_neighborhood(window)
        phenotype = self._choose(window, neighborhood)

        stamp = generate_ellipse(center, phenotype, self.cfg, self.rng)
        free = self.state.unassigned[stamp.index]
        share = float(np.count_nonzero(free)) / stamp.size
        forced = self._visits[center] >= self.cfg.max_provisional_visits

        if share > FIX_SHARE or (forced and share >= FORCED_FIX_SHARE):
            self._stamp(stamp, free, phenotype, fix=True)
        elif share < BACKGROUND_SHARE or forced:
            self._stamp(stamp, free, self._background, fix=True)
        else:
            self._stamp(stamp, free, phenotype, fix=False)
            self._visits[stamp.index] += 1

        telemetry = IterationTelemetry(self.iteration, loss, self._unassigned)
        self.iteration += 1
        return telemetry

    def _dominant_neighborhood(self, window: Tuple[slice, slice]) -> int:
        labels = self.nb.labels[window]
        return int(np.argmax(np.bincount(labels.ravel() - 1, minlength=self._n))) + 1

    def _choose(self, window: Tuple[slice, slice], neighborhood: int) -> int:
        """Phenotype with the largest attraction-weighted abundance debt.

        The debt of phenotype ``j`` is its target share of the fixed pixels
        of ``neighborhood`` plus 100, minus the pixels already fixed as ``j``
        there. Attraction comes from the fixed pixels in the window.
        """
        column = neighborhood - 1
        target = self._target[:, column]
        fixed = self._fixed_counts[:, column].astype(np.float64)
        debt = target / 100.0 * (fixed.sum() + 100.0) - fixed

        labels = self.state.labels[window][~self.state.unassigned[window]]
        histogram = np.bincount(labels - 1, minlength=self._p)[: self._p]
        weights = histogram / max(labels.size, 1)
        attraction = weights @ self._interaction[:, :, column]
        factor = np.maximum(1.0 + ATTRACTION_GAIN * attraction, MIN_ATTRACTION)

        return int(np.argmax(debt * factor)) + 1

    def _stamp(
        self, stamp: EllipseStamp, free: np.ndarray, phenotype: int, fix: bool
    ) -> None:
        """Write ``phenotype`` to the free stamp pixels."""
        rows, cols = stamp.rows[free], stamp.cols[free]
        if phenotype == self._background:
            cell_id = 0
        else:
            cell_id = self._next_id
            self._next_id += 1
            self._stamp_sizes[cell_id] = stamp.full_size

        old = self.state.labels[rows, cols]
        neighborhoods = self.nb.labels[rows, cols] - 1
        size = self._p * self._n
        self._counts -= np.bincount(
            (old - 1) * self._n + neighborhoods, minlength=size
        ).reshape(self._p, self._n)
        self._counts[phenotype - 1] += np.bincount(neighborhoods, minlength=self._n)

        self.state.labels[rows, cols] = phenotype
        self.state.instance_ids[rows, cols] = cell_id
        if fix:
            self.state.unassigned[rows, cols] = False
            self._fixed_counts[phenotype - 1] += np.bincount(
                neighborhoods, minlength=self._n
            )
            self._unassigned -= rows.size

    def finalize(self) -> PhenotypeState:
        """Compact instance ids to ``1..K`` and record stamp coverage.

        Cells whose fixed pixels are not 4-connected are split into one
        cell per component.
        """
        ids = self.state.instance_ids
        components = label_components(ids, background=0, connectivity=1)
        flat = components.ravel()
        present, first = np.unique(flat, return_index=True)
        present, first = present[present > 0], first[present > 0]

        raw = ids.ravel()[first]
        areas = np.bincount(flat)[present]
        sizes = np.array(
            [self._stamp_sizes.get(int(r), 0) for r in raw], dtype=np.float64
        )
        coverage = np.divide(
            areas, sizes, out=np.full(areas.shape, np.nan), where=sizes > 0
        )

        self.state.instance_ids = components.astype(np.int32)
        self.state.stamp_coverage = coverage
        return self.state

    def run(
        self, max_iterations: Optional[int] = None
    ) -> Tuple[PhenotypeState, TelemetrySeries]:
        """Place cells until every pixel is fixed, then compact instances."""
        cap = max_iterations or settings.iteration_cap_factor * self.cfg.pixel_count
        context = self.log_operation(
            "run_phenotype_model",
            shape=self.cfg.shape,
            phenotypes=self._p,
            cap=cap,
        )
        telemetry: TelemetrySeries = []
        while self._unassigned > 0:
            if self.iteration >= cap:
                error = ConvergenceError(
                    f"phenotype model did not converge within {cap} steps "
                    f"({self._unassigned} pixels unassigned)",
                    partial=self.state,
                    telemetry=telemetry,
                )
                self.log_error(context, error)
                raise error
            record = self.step()
            telemetry.append(record)
            if record.iteration % settings.telemetry_log_every == 0:
                self.logger.debug(
                    "Phenotype progress",
                    iteration=record.iteration,
                    loss=record.loss,
                    unassigned=record.unassigned,
                )

        state = self.finalize()
        self.log_success(context, iterations=self.iteration, cells=state.num_cells)
        return state, telemetry


def phenotype_step(
    state: PhenotypeState,
    nb: NeighborhoodMask,
    cfg: SimulationConfig,
    rng: np.random.Generator,
) -> Tuple[PhenotypeState, IterationTelemetry]:
    """Apply one step to ``state`` in place."""
    model = PhenotypeModel(cfg, nb, rng, state=state)
    telemetry = model.step()
    return model.state, telemetry


def run_phenotype_model(
    cfg: SimulationConfig,
    nb: NeighborhoodMask,
    rng: np.random.Generator,
    max_iterations: Optional[int] = None,
) -> Tuple[PhenotypeState, TelemetrySeries]:
    """Populate a fully assigned neighborhood mask with cells."""
    if not nb.is_converged:
        raise SimulationStateError("neighborhood mask still has unassigned pixels")
    if cfg.num_phenotypes == 1:
        return background_state(cfg), []
    return PhenotypeModel(cfg, nb, rng).run(max_iterations)
