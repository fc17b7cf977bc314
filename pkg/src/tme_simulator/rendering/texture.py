"""Acquisition simulation: marker palette, spectral leakage, PSF blur, noise."""

import math

import numpy as np
from scipy.ndimage import gaussian_filter, gaussian_filter1d
from scipy.optimize import brentq
from scipy.special import ndtr

from tme_simulator.models import MultiplexImage, PhenotypeState, SimulationConfig
from tme_simulator.utils.logging import get_logger
from tme_simulator.utils.random import RandomStream

logger = get_logger(__name__)

LEAKAGE_REACH = 2
PSF_TRUNCATE = 3.0
NOISE_PURPOSE = "noise"
SIGMA_RTOL = 1e-12


def expression_map(state: PhenotypeState, cfg: SimulationConfig) -> MultiplexImage:
    """Paint every pixel with its phenotype's marker expression levels."""
    palette = cfg.marker_expression_array()
    channels = np.moveaxis(palette[state.labels - 1], -1, 0)
    return MultiplexImage(
        np.ascontiguousarray(channels),
        tuple(range(1, cfg.num_markers + 1)),
    )


def spectral_leakage(img: MultiplexImage, leakage_sigma: float) -> MultiplexImage:
    """Blur along the channel axis with a truncated Gaussian.

    The kernel always spans +-2 channels, is normalized to 1 over those five
    taps, and sees zeros beyond the first and last channel. A single channel
    is returned unchanged.
    """
    if img.num_channels == 1:
        return img.with_channels(img.channels.astype(np.float64, copy=True))
    leaked = gaussian_filter1d(
        img.channels.astype(np.float64),
        sigma=leakage_sigma,
        axis=0,
        mode="constant",
        cval=0.0,
        radius=LEAKAGE_REACH,
    )
    return img.with_channels(leaked)


def psf_radius(psf_sigma: float) -> int:
    """Kernel half-width in pixels."""
    return int(math.ceil(PSF_TRUNCATE * psf_sigma))


def psf_blur(img: MultiplexImage, psf_sigma: float) -> MultiplexImage:
    """Isotropic spatial Gaussian blur with reflective borders."""
    radius = psf_radius(psf_sigma)
    blurred = gaussian_filter(
        img.channels.astype(np.float64),
        sigma=(0.0, psf_sigma, psf_sigma),
        mode="reflect",
        radius=(0, radius, radius),
    )
    return img.with_channels(blurred)


def clamped_noise_power(channels: np.ndarray, sigma: float) -> float:
    """Expected power of ``max(x + n, 0) - x`` for ``n ~ N(0, sigma**2)``.

    Averaged over every intensity ``x`` in ``channels``.
    """
    if sigma == 0.0:
        return 0.0
    t = np.asarray(channels, dtype=np.float64) / sigma
    density = np.exp(-0.5 * t**2) / math.sqrt(2.0 * math.pi)
    per_pixel = ndtr(t) - t * density + t**2 * ndtr(-t)
    return sigma**2 * float(np.mean(per_pixel))


def dark_noise_sigma(channels: np.ndarray, snr_db: float) -> float:
    """Noise std giving a power SNR of ``snr_db`` after clamping at zero.

    ``channels`` must be non-negative. The clamped noise power lies between
    half and all of ``sigma**2``, which brackets the root.
    """
    signal_power = float(np.mean(np.square(channels, dtype=np.float64)))
    if signal_power == 0.0 or math.isinf(snr_db):
        return 0.0
    target = signal_power / 10.0 ** (snr_db / 10.0)
    return float(
        brentq(
            lambda sigma: clamped_noise_power(channels, sigma) - target,
            math.sqrt(target),
            math.sqrt(2.0 * target),
            rtol=SIGMA_RTOL,
        )
    )


def sample_dark_noise(
    img: MultiplexImage, snr_db: float, stream: RandomStream
) -> np.ndarray:
    """Zero-mean Gaussian noise field, one substream per channel."""
    sigma = dark_noise_sigma(img.channels, snr_db)
    noise = np.zeros(img.channels.shape, dtype=np.float64)
    if sigma == 0.0:
        return noise
    for channel in range(img.num_channels):
        rng = stream.generator(NOISE_PURPOSE, channel)
        noise[channel] = rng.normal(0.0, sigma, size=noise.shape[1:])
    return noise


def add_dark_noise(
    img: MultiplexImage, snr_db: float, stream: RandomStream
) -> MultiplexImage:
    """Add dark-current noise and clamp negative intensities to zero.

    The noise level is solved so that the clamped output, not the raw noise
    field, has the requested SNR.
    """
    noisy = img.channels.astype(np.float64) + sample_dark_noise(img, snr_db, stream)
    return img.with_channels(np.clip(noisy, 0.0, None))


def render_multiplex(
    state: PhenotypeState, cfg: SimulationConfig, stream: RandomStream
) -> MultiplexImage:
    """Expression, then leakage, then PSF blur, then noise; stored as float32."""
    img = expression_map(state, cfg)
    img = spectral_leakage(img, cfg.leakage_sigma)
    img = psf_blur(img, cfg.psf_sigma)
    img = add_dark_noise(img, cfg.snr_db, stream)
    logger.debug(
        "Rendered multiplex image",
        channels=img.num_channels,
        shape=(img.height, img.width),
        max_intensity=float(img.channels.max(initial=0.0)),
    )
    return img.with_channels(img.channels.astype(np.float32))
