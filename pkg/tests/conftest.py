"""Shared fixtures: a tiny two-neighborhood tissue and helpers."""

from typing import Any

import numpy as np
import pytest

from tme_simulator.models import NeighborhoodMask, PhenotypeState, SimulationConfig

TINY = dict(
    width=32,
    height=32,
    num_neighborhoods=2,
    neighborhood_abundance=(50.0, 50.0),
    neighborhood_interaction=((1.0, 0.0), (0.0, 1.0)),
    background_neighborhood=1,
    num_phenotypes=2,
    background_phenotype=2,
    phenotype_abundance=((0.0, 60.0), (100.0, 40.0)),
    phenotype_interaction=(((0.0, 1.0), (0.0, 0.0)), ((0.0, 0.0), (1.0, 1.0))),
    phenotype_eccentricity=(0.0, 0.0),
    phenotype_size=(2.0, 2.0),
    num_markers=1,
    marker_expression=((1.0,), (0.0,)),
)


def make_config(**overrides: Any) -> SimulationConfig:
    """Tiny config with selected fields replaced."""
    return SimulationConfig(**{**TINY, **overrides})


def fixed_mask(labels: Any) -> NeighborhoodMask:
    """Fully assigned neighborhood mask."""
    grid = np.asarray(labels, dtype=np.int32)
    return NeighborhoodMask(grid, np.zeros(grid.shape, dtype=bool))


def fixed_state(labels: Any, instance_ids: Any = None) -> PhenotypeState:
    """Fully assigned phenotype state."""
    grid = np.asarray(labels, dtype=np.int32)
    ids = (
        np.zeros(grid.shape, dtype=np.int32)
        if instance_ids is None
        else np.asarray(instance_ids, dtype=np.int32)
    )
    return PhenotypeState(grid, np.zeros(grid.shape, dtype=bool), ids)


@pytest.fixture
def tiny_config() -> SimulationConfig:
    return make_config()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
