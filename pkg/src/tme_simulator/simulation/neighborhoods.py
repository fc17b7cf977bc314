"""Cellular neighborhood model.

A random label grid is turned into a mask of contiguous regions whose
abundances follow ``neighborhood_abundance`` and whose adjacencies follow
``neighborhood_interaction``. Each step picks an unassigned pixel, looks at
the window around it and either fixes the window by majority, applies the
row-argmax rule of the update matrix, or settles the window by consensus
once the rule stops making progress there.
"""

from typing import Optional, Tuple

import numpy as np

from tme_simulator.config.settings import settings
from tme_simulator.exceptions import ConvergenceError, SimulationStateError
from tme_simulator.models import (
    IterationTelemetry,
    NeighborhoodMask,
    SimulationConfig,
    TelemetrySeries,
)
from tme_simulator.utils.logging import LoggerMixin

from .geometry import pick_unassigned, window_slices

MAJORITY_SHARE = 0.9


def init_neighborhood_mask(
    cfg: SimulationConfig, rng: np.random.Generator
) -> NeighborhoodMask:
    """Uniform random labels in ``1..N``, every pixel unassigned."""
    labels = rng.integers(
        1, cfg.num_neighborhoods + 1, size=cfg.shape, dtype=np.int32
    )
    return NeighborhoodMask(labels, np.ones(cfg.shape, dtype=bool))


def measure_abundance(mask: NeighborhoodMask, num_neighborhoods: int) -> np.ndarray:
    """Pixel count of each label."""
    return np.bincount(mask.labels.ravel() - 1, minlength=num_neighborhoods)[
        :num_neighborhoods
    ]


def abundance_percentages(
    counts: np.ndarray, total: float, epsilon: float
) -> np.ndarray:
    """Counts as percentages of ``total`` with zeros clamped to ``epsilon``."""
    pct = np.asarray(counts, dtype=np.float64) * (100.0 / total)
    return np.where(pct > 0, pct, epsilon)


def update_rule_matrix(
    interaction: np.ndarray, target: np.ndarray, actual_pct: np.ndarray
) -> np.ndarray:
    """``U(i, j) = N_int(i, j) * (N_ab(j) / actual(j))**2``.

    ``actual_pct`` must already be clamped away from zero.
    """
    deficit = (np.asarray(target, dtype=np.float64) / actual_pct) ** 2
    return np.asarray(interaction, dtype=np.float64) * deficit[None, :]


def neighborhood_loss(
    interaction: np.ndarray, target: np.ndarray, actual_pct: np.ndarray
) -> float:
    """Sum of absolute entries of the update matrix."""
    return float(np.abs(update_rule_matrix(interaction, target, actual_pct)).sum())


class NeighborhoodModel(LoggerMixin):
    """Step-wise optimizer holding the mask and its running statistics."""

    def __init__(
        self,
        cfg: SimulationConfig,
        rng: np.random.Generator,
        mask: Optional[NeighborhoodMask] = None,
    ) -> None:
        self.cfg = cfg
        self.rng = rng
        self.mask = mask if mask is not None else init_neighborhood_mask(cfg, rng)
        self.iteration = 0

        self._n = cfg.num_neighborhoods
        self._interaction = cfg.neighborhood_interaction_array()
        self._target = cfg.neighborhood_abundance_array()
        self._total = float(cfg.pixel_count)
        self._epsilon = 100.0 / self._total
        self._counts = measure_abundance(self.mask, self._n).astype(np.int64)
        self._visits = np.zeros(self.mask.shape, dtype=np.int32)
        self._unassigned = self.mask.unassigned_count

    @property
    def unassigned_count(self) -> int:
        return self._unassigned

    def percentages(self) -> np.ndarray:
        return abundance_percentages(self._counts, self._total, self._epsilon)

    def step(self) -> IterationTelemetry:
        """Run one optimization step in place."""
        if self._unassigned == 0:
            raise SimulationStateError("neighborhood mask is fully assigned")

        pct = self.percentages()
        rule = update_rule_matrix(self._interaction, self._target, pct)
        loss = float(np.abs(rule).sum())

        center = pick_unassigned(self.mask.unassigned, self.rng)
        window = window_slices(center, self.mask.shape, self.cfg.window_radius)
        labels = self.mask.labels[window]
        free = self.mask.unassigned[window]

        histogram = np.bincount(labels.ravel() - 1, minlength=self._n)
        modal = int(np.argmax(histogram))
        if histogram[modal] > MAJORITY_SHARE * labels.size:
            self._settle(labels, free, modal + 1)
        else:
            mapping = np.argmax(rule, axis=1).astype(np.int32) + 1
            proposed = mapping[labels - 1]
            changed = free & (proposed != labels)
            patient = self._visits[center] < self.cfg.max_provisional_visits
            if patient and changed.any():
                self._write(labels, changed, proposed[changed])
                self._visits[window] += 1
            else:
                self._settle(labels, free, self._consensus(labels, free, rule, pct))

        telemetry = IterationTelemetry(self.iteration, loss, self._unassigned)
        self.iteration += 1
        return telemetry

    def _consensus(
        self, labels: np.ndarray, free: np.ndarray, rule: np.ndarray, pct: np.ndarray
    ) -> int:
        """Label balancing global deficit against the settled context."""
        deficit = (self._target / pct) ** 2
        fixed = labels[~free]
        context = np.bincount(fixed - 1, minlength=self._n) / labels.size
        score = deficit + context @ rule
        return int(np.argmax(score)) + 1

    def _write(self, labels: np.ndarray, where: np.ndarray, values: np.ndarray) -> None:
        old = labels[where]
        self._counts -= np.bincount(old - 1, minlength=self._n)
        self._counts += np.bincount(values - 1, minlength=self._n)
        labels[where] = values

    def _settle(self, labels: np.ndarray, free: np.ndarray, label: int) -> None:
        """Write ``label`` to the free window pixels and fix them."""
        count = int(np.count_nonzero(free))
        self._write(labels, free, np.full(count, label, dtype=labels.dtype))
        free[...] = False
        self._unassigned -= count

    def run(
        self, max_iterations: Optional[int] = None
    ) -> Tuple[NeighborhoodMask, TelemetrySeries]:
        """Step until every pixel is fixed."""
        cap = max_iterations or settings.iteration_cap_factor * self.cfg.pixel_count
        context = self.log_operation(
            "run_neighborhood_model",
            shape=self.mask.shape,
            neighborhoods=self._n,
            cap=cap,
        )
        telemetry: TelemetrySeries = []
        while self._unassigned > 0:
            if self.iteration >= cap:
                error = ConvergenceError(
                    f"neighborhood model did not converge within {cap} steps "
                    f"({self._unassigned} pixels unassigned)",
                    partial=self.mask,
                    telemetry=telemetry,
                )
                self.log_error(context, error)
                raise error
            record = self.step()
            telemetry.append(record)
            if record.iteration % settings.telemetry_log_every == 0:
                self.logger.debug(
                    "Neighborhood progress",
                    iteration=record.iteration,
                    loss=record.loss,
                    unassigned=record.unassigned,
                )

        self.log_success(
            context,
            iterations=self.iteration,
            abundance=np.round(self.percentages(), 2).tolist(),
        )
        return self.mask, telemetry


def neighborhood_step(
    mask: NeighborhoodMask, cfg: SimulationConfig, rng: np.random.Generator
) -> Tuple[NeighborhoodMask, IterationTelemetry]:
    """Apply one step to ``mask`` in place.

    Provisional visit counts are not carried between calls, so repeated
    calls only settle a window by consensus once the argmax rule stops
    changing it. Use :class:`NeighborhoodModel` for full runs.
    """
    model = NeighborhoodModel(cfg, rng, mask=mask)
    telemetry = model.step()
    return model.mask, telemetry


def run_neighborhood_model(
    cfg: SimulationConfig,
    rng: np.random.Generator,
    max_iterations: Optional[int] = None,
) -> Tuple[NeighborhoodMask, TelemetrySeries]:
    """Optimize a fresh random mask until it is fully assigned."""
    return NeighborhoodModel(cfg, rng).run(max_iterations)
