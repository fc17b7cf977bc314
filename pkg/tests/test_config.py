"""Tests for configuration module."""

import json
import math

import numpy as np
import pytest

from tme_simulator.config import (
    PresetScale,
    Settings,
    get_preset,
    load_config,
    parse_config,
    preset_fig4,
    serialize_config,
    validate_config,
)
from tme_simulator.exceptions import ConfigError
from tme_simulator.models import SimulationConfig

from tests.conftest import TINY, make_config


def tiny_document(**overrides):
    return json.dumps({**TINY, **overrides})


class TestSettings:
    """Runtime settings."""

    def test_settings_creation(self):
        """Test that settings can be created with defaults."""
        settings = Settings()

        assert settings.worker_processes == 1
        assert settings.iteration_cap_factor == 50
        assert settings.log_level == "INFO"
        assert settings.log_format == "text"

    def test_settings_from_environment(self, monkeypatch):
        """Test that TME_ variables override defaults."""
        monkeypatch.setenv("TME_WORKER_PROCESSES", "4")
        monkeypatch.setenv("TME_LOG_FORMAT", "json")

        settings = Settings()

        assert settings.worker_processes == 4
        assert settings.log_format == "json"

    def test_settings_validation(self):
        """Test settings validation."""
        with pytest.raises(ValueError):
            Settings(worker_processes=0)

        with pytest.raises(ValueError):
            Settings(log_level="INVALID")

        with pytest.raises(ValueError):
            Settings(iteration_cap_factor=0)


class TestParseConfig:
    """Parsing JSON documents into validated configs."""

    def test_defaults(self):
        """Test acquisition and optimizer defaults."""
        cfg = parse_config(tiny_document())

        assert cfg.psf_sigma == 0.75
        assert cfg.leakage_sigma == 0.5
        assert cfg.snr_db == 20.0
        assert cfg.window_radius == 12
        assert cfg.graph_radius == 12.0
        assert cfg.max_provisional_visits == 8
        assert cfg.seed == 0
        assert cfg.shape == (32, 32)
        assert cfg.phenotype_labels == ["Ph1", "Ph2"]

    def test_abundance_must_sum_to_100(self):
        """Test that the violated invariant is named."""
        with pytest.raises(ConfigError) as exc_info:
            parse_config(tiny_document(neighborhood_abundance=[60, 50]))

        assert "neighborhood_abundance sums to 110, expected 100" in (
            exc_info.value.violations
        )
        assert "sums to 110" in str(exc_info.value)

    def test_malformed_json_reports_position(self):
        """Test that syntax errors carry line and column."""
        with pytest.raises(ConfigError, match="line 2"):
            parse_config('{"width": 32,\n')

    def test_document_must_be_object(self):
        with pytest.raises(ConfigError, match="must be an object"):
            parse_config("[1, 2, 3]")

    def test_missing_and_unknown_fields(self):
        """Test structural errors from the schema."""
        document = dict(TINY)
        del document["width"]
        with pytest.raises(ConfigError) as exc_info:
            parse_config(json.dumps(document))
        assert any(v.startswith("width") for v in exc_info.value.violations)

        with pytest.raises(ConfigError) as exc_info:
            parse_config(tiny_document(bogus=1))
        assert any(v.startswith("bogus") for v in exc_info.value.violations)

    def test_round_trip(self):
        """Test that serialized configs parse back to equal configs."""
        cfg = make_config(seed=42, marker_names=("CD3",))
        restored = parse_config(serialize_config(cfg))
        assert restored.model_dump() == cfg.model_dump()

    def test_load_config_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read config"):
            load_config(tmp_path / "missing.json")

    def test_load_config(self, tmp_path):
        path = tmp_path / "tiny.json"
        path.write_text(tiny_document(), encoding="utf-8")
        assert load_config(path).model_dump() == make_config().model_dump()


class TestValidateConfig:
    """Cross-field invariants."""

    def test_valid_config(self):
        result = validate_config(make_config())
        assert result.ok
        assert bool(result)
        assert result.violations == []

    def test_shape_mismatch(self):
        """Test that wrong lengths are reported with both shapes."""
        result = validate_config(make_config(phenotype_eccentricity=(0.0, 0.0, 0.0)))

        assert not result
        assert "phenotype_eccentricity has shape 3, expected 2" in result.violations

    def test_ragged_matrix(self):
        result = validate_config(
            make_config(neighborhood_interaction=((1.0, 0.0), (0.0,)))
        )
        assert "neighborhood_interaction has shape ragged, expected 2x2" in (
            result.violations
        )

    def test_background_indices(self):
        result = validate_config(make_config(background_phenotype=3))
        assert "background_phenotype is 3, expected 1..2" in result.violations

    def test_background_neighborhood_must_be_cell_free(self):
        """Test that the background column puts 100 on background."""
        result = validate_config(
            make_config(phenotype_abundance=((10.0, 60.0), (90.0, 40.0)))
        )
        assert any("background phenotype" in v for v in result.violations)

    def test_value_ranges(self):
        """Test eccentricity, size and expression ranges."""
        result = validate_config(
            make_config(
                phenotype_eccentricity=(1.0, 0.0),
                phenotype_size=(0.5, 2.0),
                marker_expression=((1.5,), (0.0,)),
            )
        )
        assert "phenotype_eccentricity has entries outside [0, 1)" in (
            result.violations
        )
        assert "phenotype_size has entries below 1 pixel" in result.violations
        assert "marker_expression has entries outside [0, 1]" in result.violations

    def test_non_finite_entries(self):
        """Test NaN and infinity are reported instead of passing the sum checks."""
        result = validate_config(make_config(neighborhood_abundance=(math.nan, 50.0)))
        assert result.violations == ["neighborhood_abundance has non-finite entries"]

        result = validate_config(
            make_config(phenotype_abundance=((0.0, math.nan), (100.0, 40.0)))
        )
        assert result.violations == ["phenotype_abundance has non-finite entries"]

        result = validate_config(
            make_config(phenotype_interaction=(((0.0, math.inf), (0.0, 0.0)),) * 2)
        )
        assert "phenotype_interaction has non-finite entries" in result.violations

    def test_non_finite_scalars(self):
        result = validate_config(make_config(psf_sigma=math.inf, snr_db=math.nan))
        assert result.violations == ["psf_sigma must be finite", "snr_db is NaN"]

    def test_nan_document_is_rejected(self):
        with pytest.raises(ConfigError) as exc_info:
            parse_config(tiny_document(neighborhood_abundance=[math.nan, 50.0]))
        assert "neighborhood_abundance has non-finite entries" in (
            exc_info.value.violations
        )

    def test_name_lengths(self):
        result = validate_config(make_config(marker_names=("a", "b")))
        assert "marker_names has 2 entries, expected 1" in result.violations

    def test_preset_column_violation_names_neighborhood(self):
        """Test that a column summing to 99 is reported as Nb2."""
        document = preset_fig4(PresetScale.DESK).model_dump()
        abundance = [list(row) for row in document["phenotype_abundance"]]
        abundance[8][1] -= 1.0
        document["phenotype_abundance"] = abundance

        result = validate_config(SimulationConfig(**document))

        assert result.violations == [
            "phenotype_abundance column Nb2 sums to 99, expected 100"
        ]

    def test_background_expression_violation(self):
        document = preset_fig4(PresetScale.DESK).model_dump()
        expression = [list(row) for row in document["marker_expression"]]
        expression[8][0] = 0.1
        document["marker_expression"] = expression

        result = validate_config(SimulationConfig(**document))

        assert result.violations == [
            "marker_expression row of background phenotype 9 must be all zeros"
        ]


class TestPresets:
    """Built-in presets."""

    @pytest.mark.parametrize("scale", list(PresetScale))
    def test_presets_validate(self, scale):
        assert validate_config(preset_fig4(scale)).ok

    def test_scales_only_change_dimensions(self):
        """Test that desk and full differ only in image size."""
        full = preset_fig4(PresetScale.FULL)
        desk = preset_fig4(PresetScale.DESK)

        assert (full.width, full.height) == (1000, 2000)
        assert (desk.width, desk.height) == (256, 512)
        resized = full.model_copy(update={"width": 256, "height": 512})
        assert resized.model_dump() == desk.model_dump()

    def test_fig4_structure(self):
        """Test the documented structure of the tumor preset."""
        cfg = preset_fig4()
        n_int = cfg.neighborhood_interaction_array()
        p_int = cfg.phenotype_interaction_array()
        expression = cfg.marker_expression_array()
        abundance = cfg.phenotype_abundance_array()

        assert (cfg.num_markers, cfg.num_phenotypes, cfg.num_neighborhoods) == (6, 9, 6)
        assert cfg.background_neighborhood == 1
        assert cfg.background_phenotype == 9

        assert n_int[1, 2] == n_int[2, 1] == 1.0
        assert n_int[4, 5] == n_int[5, 4] == -1.0

        assert abundance[2, 1] == abundance[6, 1] == 20.0
        assert abundance[3, 1] == abundance[4, 1] == 10.0
        assert p_int[2, 6, 1] == p_int[6, 2, 1] == -1.0
        assert p_int[3, 4, 1] == p_int[4, 3, 1] == 1.0
        assert p_int[5, 1, 3] == p_int[1, 5, 3] == 1.0
        assert p_int[4, 6, 5] == p_int[6, 4, 5] == -1.0
        assert np.all(abundance[[1, 4, 5, 7], 3] > 0)

        for phenotype in range(6):
            assert np.flatnonzero(expression[phenotype]).tolist() == [phenotype]
        assert np.flatnonzero(expression[6]).tolist() == [1, 4]
        assert np.flatnonzero(expression[7]).tolist() == [3, 5]
        assert not expression[8].any()

        sizes = np.asarray(cfg.phenotype_size)
        assert sizes.min() >= 2 and sizes.max() <= 6

    def test_get_preset(self):
        assert get_preset("fig4", PresetScale.FULL) == preset_fig4(PresetScale.FULL)
        with pytest.raises(KeyError):
            get_preset("fig9")
