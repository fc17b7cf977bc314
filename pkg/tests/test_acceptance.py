"""End-to-end checks on the desk-scale tumor microenvironment preset.

These run the full pipeline for five seeds and take a few minutes;
deselect them with ``pytest -m "not slow"``.
"""

from itertools import combinations

import numpy as np
import pytest

from tme_simulator.analysis import normalized_adjacency, normalized_interactions
from tme_simulator.config import preset_fig4
from tme_simulator.pipeline import simulate_image
from tme_simulator.analysis.metrics import cell_table
from tme_simulator.rendering import expression_map, psf_blur, spectral_leakage

pytestmark = pytest.mark.slow

SEEDS = (0, 1, 2, 3, 4)


@pytest.fixture(scope="module")
def cfg():
    return preset_fig4()


@pytest.fixture(scope="module")
def results(cfg):
    return [simulate_image(cfg, seed) for seed in SEEDS]


def mean_over_seeds(values):
    return np.mean(np.stack(list(values)), axis=0)


def quiet_pairs(interaction, members):
    """Unordered label pairs among ``members`` with zero interaction."""
    return [
        (a, b)
        for a, b in combinations(sorted(members), 2)
        if interaction[a - 1][b - 1] == 0.0
    ]


class TestTermination:
    """Convergence, determinism and cell coherence."""

    def test_every_seed_converges(self, results):
        for result in results:
            assert result.neighborhoods.is_converged
            assert result.phenotypes.is_converged

    def test_rerun_is_identical(self, cfg, results):
        again = simulate_image(cfg, SEEDS[0])
        first = results[0]

        np.testing.assert_array_equal(
            again.neighborhoods.labels, first.neighborhoods.labels
        )
        np.testing.assert_array_equal(again.phenotypes.labels, first.phenotypes.labels)
        np.testing.assert_array_equal(
            again.phenotypes.instance_ids, first.phenotypes.instance_ids
        )
        np.testing.assert_array_equal(again.image.channels, first.image.channels)

    def test_cells_are_coherent(self, cfg, results):
        """Test each cell carries one phenotype and background carries no id."""
        for result in results:
            labels = result.phenotypes.labels
            ids = result.phenotypes.instance_ids
            background = labels == cfg.background_phenotype

            assert not ids[background].any()
            assert ids[~background].all()
            flat_ids = ids[ids > 0]
            flat_labels = labels[ids > 0]
            pairs = np.unique(np.stack([flat_ids, flat_labels]), axis=1)
            assert pairs.shape[1] == np.unique(flat_ids).size


class TestNeighborhoods:
    """Neighborhood abundance and adjacency."""

    def test_abundance(self, cfg, results):
        total = cfg.width * cfg.height
        pct = mean_over_seeds(
            100.0 * r.report.neighborhood_areas / total for r in results
        )
        np.testing.assert_allclose(pct, cfg.neighborhood_abundance, atol=5.0)

    def test_attraction_and_repulsion(self, cfg, results):
        """Test Nb2-Nb3 touch more and Nb5-Nb6 less than neutral pairs."""
        adjacency = mean_over_seeds(
            normalized_adjacency(
                r.report.neighborhood_adjacency, r.report.neighborhood_areas
            )
            for r in results
        )
        neutral = quiet_pairs(
            cfg.neighborhood_interaction, range(1, cfg.num_neighborhoods + 1)
        )
        baseline = np.median([adjacency[a - 1, b - 1] for a, b in neutral])

        assert adjacency[1, 2] > baseline
        assert adjacency[4, 5] < baseline


class TestPhenotypes:
    """Phenotype abundance and interactions inside neighborhoods."""

    def test_nb5_abundance(self, cfg, results):
        pct = mean_over_seeds(r.report.phenotype_abundance_pct for r in results)
        for phenotype in (2, 4, 7):
            target = cfg.phenotype_abundance[phenotype - 1][4]
            assert pct[phenotype - 1, 4] == pytest.approx(target, abs=5.0)

    @pytest.mark.parametrize(
        "neighborhood, pair, attracts",
        [(4, (6, 2), True), (6, (5, 7), False)],
    )
    def test_interactions(self, cfg, results, neighborhood, pair, attracts):
        """Test a configured pair against the neutral pairs of its neighborhood."""
        k = neighborhood - 1
        rates = mean_over_seeds(
            normalized_interactions(
                r.report.phenotype_interactions, r.report.phenotype_cell_counts
            )[:, :, k]
            for r in results
        )
        members = [
            p
            for p in range(1, cfg.num_phenotypes + 1)
            if p != cfg.background_phenotype and cfg.phenotype_abundance[p - 1][k] > 0
        ]
        plane = [
            [cfg.phenotype_interaction[a][b][k] for b in range(cfg.num_phenotypes)]
            for a in range(cfg.num_phenotypes)
        ]
        baseline = np.median(
            [rates[a - 1, b - 1] for a, b in quiet_pairs(plane, members)]
        )

        a, b = pair
        if attracts:
            assert rates[a - 1, b - 1] > baseline
        else:
            assert rates[a - 1, b - 1] < baseline


class TestTexture:
    """Noise level and spectral leakage."""

    def test_snr(self, cfg, results):
        """Test the stored images, clamping included, sit at the target SNR."""
        for result in results:
            clean = psf_blur(
                spectral_leakage(
                    expression_map(result.phenotypes, cfg), cfg.leakage_sigma
                ),
                cfg.psf_sigma,
            )
            noise = result.image.channels.astype(np.float64) - clean.channels

            snr = 10 * np.log10(np.mean(clean.channels**2) / np.mean(noise**2))
            assert snr == pytest.approx(cfg.snr_db, abs=0.5)

    def test_ph2_leakage(self, results):
        for result in results:
            mean = result.report.expression_mean
            std = result.report.expression_std
            assert mean[1, 0] > 0
            assert mean[1, 2] > 0
            assert std[1, 1] > 0


class TestMorphology:
    """Shapes of well-preserved cells."""

    def test_medians_match_config(self, cfg, results):
        for result in results:
            for shape in result.report.morphology:
                if shape.cells == 0:
                    continue
                p = shape.phenotype - 1
                assert shape.median_semi_major_axis == pytest.approx(
                    cfg.phenotype_size[p], abs=1.0
                )
                assert shape.median_eccentricity == pytest.approx(
                    cfg.phenotype_eccentricity[p], abs=0.15
                )

    def test_intact_cells_match_config(self, cfg, results):
        """Test every cell that kept its whole stamp has the configured shape."""
        checked = 0
        for result in results:
            cells = cell_table(result.phenotypes)
            intact = cells[cells["stamp_coverage"] >= 1.0]
            for row in intact.itertuples():
                p = int(row.phenotype) - 1
                assert row.semi_major_axis == pytest.approx(
                    cfg.phenotype_size[p], abs=1.0
                )
                assert row.eccentricity == pytest.approx(
                    cfg.phenotype_eccentricity[p], abs=0.15
                )
            checked += len(intact)
        assert checked > 0
