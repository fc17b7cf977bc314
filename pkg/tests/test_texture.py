"""Tests for multiplex rendering."""

import math

import numpy as np
import pytest

from tme_simulator.analysis import marker_expression_stats
from tme_simulator.config import preset_fig4
from tme_simulator.models import MultiplexImage
from tme_simulator.rendering import (
    add_dark_noise,
    clamped_noise_power,
    dark_noise_sigma,
    expression_map,
    psf_blur,
    render_multiplex,
    sample_dark_noise,
    spectral_leakage,
)
from tme_simulator.simulation import rasterize_ellipse
from tme_simulator.utils import RandomStream

from tests.conftest import fixed_state

ORACLE_CASES = 1000


def volume(channels: np.ndarray) -> MultiplexImage:
    return MultiplexImage(channels, tuple(range(1, channels.shape[0] + 1)))


def gaussian_taps(sigma: float, radius: int) -> np.ndarray:
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-0.5 * (x / sigma) ** 2)
    return taps / taps.sum()


def brute_leakage(channels: np.ndarray, sigma: float) -> np.ndarray:
    """Direct sum over +-2 channels with zeros off the spectrum."""
    taps = gaussian_taps(sigma, 2)
    out = np.zeros_like(channels)
    for c in range(channels.shape[0]):
        for k in range(-2, 3):
            if 0 <= c - k < channels.shape[0]:
                out[c] += taps[k + 2] * channels[c - k]
    return out


def brute_psf(channels: np.ndarray, sigma: float) -> np.ndarray:
    """Direct 2-D sum with half-sample symmetric borders."""
    radius = math.ceil(3 * sigma)
    taps = gaussian_taps(sigma, radius)
    _, height, width = channels.shape
    padded = np.pad(channels, ((0, 0), (radius, radius), (radius, radius)), "symmetric")
    out = np.zeros_like(channels)
    for i in range(2 * radius + 1):
        for j in range(2 * radius + 1):
            out += taps[i] * taps[j] * padded[:, i : i + height, j : j + width]
    return out


@pytest.fixture
def preset():
    return preset_fig4()


@pytest.fixture
def ph2_state(preset):
    """64 x 64 background tissue with one Ph2 cell of radius 6."""
    labels = np.full((64, 64), preset.background_phenotype)
    stamp = rasterize_ellipse((32, 32), 6.0, 0.0, 0.0, (64, 64), 12)
    labels[stamp.index] = 2
    ids = np.zeros((64, 64))
    ids[stamp.index] = 1
    return fixed_state(labels, ids)


class TestExpressionMap:
    """Marker palette."""

    def test_palette_values(self, tiny_config):
        state = fixed_state([[1, 2], [2, 1]])
        img = expression_map(state, tiny_config)

        assert img.channels.shape == (1, 2, 2)
        assert img.channels[0].tolist() == [[1.0, 0.0], [0.0, 1.0]]
        assert img.channel_order == (1,)

    def test_all_background_is_dark(self, preset):
        state = fixed_state(np.full((8, 8), preset.background_phenotype))
        assert not expression_map(state, preset).channels.any()

    def test_single_marker_cell(self, preset, ph2_state):
        """Test a Mk2-only cell lights channel 2 over its pixels only."""
        img = expression_map(ph2_state, preset)
        cell = ph2_state.labels == 2

        assert np.all(img.channels[1][cell] == 0.8)
        assert not img.channels[1][~cell].any()
        assert not np.delete(img.channels, 1, axis=0).any()

    def test_finite_palette(self, preset, rng):
        state = fixed_state(rng.integers(1, 10, size=(20, 20)))
        img = expression_map(state, preset)
        for channel in img.channels:
            assert np.unique(channel).size <= preset.num_phenotypes


class TestSpectralLeakage:
    """Channel-axis blur."""

    def test_single_channel_unchanged(self, rng):
        channels = rng.random((1, 5, 5))
        out = spectral_leakage(volume(channels), 0.5)
        np.testing.assert_array_equal(out.channels, channels)

    def test_impulse(self):
        """Test neighbors receive equal shares and the source keeps most."""
        channels = np.zeros((3, 1, 1))
        channels[1] = 1.0

        out = spectral_leakage(volume(channels), 0.5).channels[:, 0, 0]

        assert out[0] == pytest.approx(out[2])
        assert out[0] > 0
        assert out[1] > 0.5

    def test_two_channels_keep_the_full_kernel(self):
        """Test two channels still use the five-tap kernel, not a truncated one."""
        channels = np.zeros((2, 1, 1))
        channels[0] = 1.0

        out = spectral_leakage(volume(channels), 0.5).channels[:, 0, 0]

        np.testing.assert_allclose(out, [0.786571, 0.106451], atol=1e-6)
        taps = gaussian_taps(0.5, 2)
        np.testing.assert_allclose(out, taps[2:4], rtol=1e-12)

    def test_interior_channel_sum_conserved(self):
        channels = np.zeros((5, 2, 2))
        channels[2] = 3.0
        out = spectral_leakage(volume(channels), 0.5).channels
        np.testing.assert_allclose(out.sum(axis=0), 3.0, rtol=1e-12)

    def test_matches_direct_sum(self, rng):
        """Test against a direct convolution on random 16x16x3 volumes."""
        for _ in range(ORACLE_CASES):
            channels = rng.random((3, 16, 16))
            sigma = rng.uniform(0.3, 1.5)
            out = spectral_leakage(volume(channels), sigma).channels
            np.testing.assert_allclose(
                out, brute_leakage(channels, sigma), rtol=1e-9, atol=0
            )

    def test_linear(self, rng):
        x, y = rng.random((2, 4, 8, 8))
        a, b = 0.7, -1.3
        combined = spectral_leakage(volume(a * x + b * y), 0.5).channels
        separate = (
            a * spectral_leakage(volume(x), 0.5).channels
            + b * spectral_leakage(volume(y), 0.5).channels
        )
        np.testing.assert_allclose(combined, separate, rtol=1e-9, atol=1e-12)


class TestPsfBlur:
    """Spatial blur."""

    def test_constant_unchanged(self):
        channels = np.full((2, 9, 11), 0.4)
        out = psf_blur(volume(channels), 0.75).channels
        np.testing.assert_allclose(out, channels, rtol=1e-12)

    def test_intensity_conserved(self, rng):
        channels = rng.random((3, 16, 16))
        out = psf_blur(volume(channels), 0.75).channels
        np.testing.assert_allclose(
            out.sum(axis=(1, 2)), channels.sum(axis=(1, 2)), rtol=1e-9
        )

    def test_impulse_second_moment(self):
        """Test a bright pixel spreads with variance close to sigma^2."""
        channels = np.zeros((1, 15, 15))
        channels[0, 7, 7] = 1.0

        blob = psf_blur(volume(channels), 0.75).channels[0]

        offsets = np.arange(15) - 7
        row_variance = (blob.sum(axis=1) * offsets**2).sum()
        col_variance = (blob.sum(axis=0) * offsets**2).sum()
        assert row_variance == pytest.approx(0.5625, abs=0.01)
        assert col_variance == pytest.approx(row_variance)
        np.testing.assert_allclose(blob, blob.T, atol=1e-15)

    def test_matches_direct_sum(self, rng):
        """Test against a direct convolution on random 16x16x3 volumes."""
        for _ in range(ORACLE_CASES):
            channels = rng.random((3, 16, 16))
            sigma = rng.uniform(0.3, 1.5)
            out = psf_blur(volume(channels), sigma).channels
            np.testing.assert_allclose(
                out, brute_psf(channels, sigma), rtol=1e-9, atol=0
            )

    def test_linear(self, rng):
        x, y = rng.random((2, 2, 12, 12))
        a, b = 2.0, 0.5
        combined = psf_blur(volume(a * x + b * y), 0.75).channels
        separate = (
            a * psf_blur(volume(x), 0.75).channels
            + b * psf_blur(volume(y), 0.75).channels
        )
        np.testing.assert_allclose(combined, separate, rtol=1e-9)


class TestDarkNoise:
    """Noise calibration."""

    def test_sigma_for_unit_signal(self):
        assert dark_noise_sigma(np.ones((2, 4, 4)), 20.0) == pytest.approx(0.1)

    def test_no_noise_without_signal_or_at_infinite_snr(self, rng):
        assert dark_noise_sigma(np.zeros((1, 3, 3)), 20.0) == 0.0

        channels = rng.random((2, 8, 8))
        out = add_dark_noise(volume(channels), math.inf, RandomStream(1))
        np.testing.assert_array_equal(out.channels, channels)

    def test_output_is_non_negative(self, rng):
        channels = rng.random((2, 16, 16)) * 0.01
        out = add_dark_noise(volume(channels), 0.0, RandomStream(3))
        assert out.channels.min() >= 0.0

    def test_sigma_accounts_for_clamping(self):
        """Test dark pixels only keep the positive half of their noise."""
        channels = np.zeros((1, 8, 8))
        channels[0, :4] = 1.0

        sigma = dark_noise_sigma(channels, 20.0)

        assert sigma == pytest.approx(math.sqrt(0.005 / 0.75), rel=1e-9)
        assert clamped_noise_power(channels, sigma) == pytest.approx(0.005)

    def test_clamped_noise_power_limits(self):
        assert clamped_noise_power(np.zeros((1, 4, 4)), 0.2) == pytest.approx(0.02)
        assert clamped_noise_power(np.full((1, 4, 4), 50.0), 0.2) == pytest.approx(
            0.04
        )
        assert clamped_noise_power(np.ones((1, 2, 2)), 0.0) == 0.0

    def test_snr_calibration(self, preset, ph2_state):
        """Test the stored, clamped image is 20 +- 0.5 dB above its noise."""
        img = psf_blur(
            spectral_leakage(expression_map(ph2_state, preset), preset.leakage_sigma),
            preset.psf_sigma,
        )
        big = volume(np.tile(img.channels, (1, 4, 4)))

        stored = add_dark_noise(big, 20.0, RandomStream(9)).channels

        signal_power = np.mean(big.channels**2)
        noise_power = np.mean((stored - big.channels) ** 2)
        assert 10 * np.log10(signal_power / noise_power) == pytest.approx(20.0, abs=0.5)

    def test_channels_use_separate_substreams(self):
        noise = sample_dark_noise(volume(np.ones((2, 8, 8))), 20.0, RandomStream(4))
        assert not np.array_equal(noise[0], noise[1])


class TestRender:
    """Full acquisition pipeline."""

    def test_stage_order(self, preset, ph2_state):
        """Test expression, leakage, blur and noise run in that order."""
        stream = RandomStream(21)
        expected = add_dark_noise(
            psf_blur(
                spectral_leakage(
                    expression_map(ph2_state, preset), preset.leakage_sigma
                ),
                preset.psf_sigma,
            ),
            preset.snr_db,
            stream,
        ).channels.astype(np.float32)

        img = render_multiplex(ph2_state, preset, RandomStream(21))

        assert img.channels.dtype == np.float32
        np.testing.assert_array_equal(img.channels, expected)

    def test_deterministic(self, preset, ph2_state):
        first = render_multiplex(ph2_state, preset, RandomStream(5))
        second = render_multiplex(ph2_state, preset, RandomStream(5))
        other = render_multiplex(ph2_state, preset, RandomStream(6))

        np.testing.assert_array_equal(first.channels, second.channels)
        assert not np.array_equal(first.channels, other.channels)

    def test_blur_adds_no_variance(self, preset):
        state = fixed_state(np.full((16, 16), 2))
        img = psf_blur(expression_map(state, preset), preset.psf_sigma)
        assert np.ptp(img.channels[1]) == pytest.approx(0.0, abs=1e-12)

    def test_ph2_leaks_into_neighbor_channels(self, preset, ph2_state):
        """Test Ph2 shows Mk1 and Mk3 signal and a spread of Mk2."""
        img = render_multiplex(ph2_state, preset, RandomStream(2))

        mean, std = marker_expression_stats(img, ph2_state, preset.num_phenotypes)

        assert img.channels.shape == (6, 64, 64)
        assert mean[1, 0] > 0
        assert mean[1, 2] > 0
        assert std[1, 1] > 0
        assert mean[1, 1] > mean[1, 0]
