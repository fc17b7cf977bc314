"""Rendering of multiplex images from phenotype masks."""

from .texture import (
    add_dark_noise,
    clamped_noise_power,
    dark_noise_sigma,
    expression_map,
    psf_blur,
    render_multiplex,
    sample_dark_noise,
    spectral_leakage,
)

__all__ = [
    "add_dark_noise",
    "clamped_noise_power",
    "dark_noise_sigma",
    "expression_map",
    "psf_blur",
    "render_multiplex",
    "sample_dark_noise",
    "spectral_leakage",
]
