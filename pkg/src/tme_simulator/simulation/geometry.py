"""Window geometry, random pixel selection and the ellipse generator."""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from tme_simulator.exceptions import SimulationStateError
from tme_simulator.models.simulation import SimulationConfig

Pixel = Tuple[int, int]
Window = Tuple[slice, slice]

REJECTION_DRAWS = 16
# Lattice points exactly on the ellipse boundary must survive rotation.
BOUNDARY_TOLERANCE = 1e-9


def window_slices(center: Pixel, shape: Tuple[int, int], radius: int) -> Window:
    """Pixels at Chebyshev distance < ``radius`` from ``center``, clipped."""
    row, col = center
    height, width = shape
    reach = radius - 1
    return (
        slice(max(0, row - reach), min(height, row + reach + 1)),
        slice(max(0, col - reach), min(width, col + reach + 1)),
    )


def pick_unassigned(unassigned: np.ndarray, rng: np.random.Generator) -> Pixel:
    """Draw a pixel uniformly among those still unassigned."""
    flat = unassigned.ravel()
    for _ in range(REJECTION_DRAWS):
        index = int(rng.integers(flat.size))
        if flat[index]:
            return divmod(index, unassigned.shape[1])  # type: ignore[return-value]

    candidates = np.flatnonzero(flat)
    if candidates.size == 0:
        raise SimulationStateError("no unassigned pixel left")
    index = int(candidates[rng.integers(candidates.size)])
    return divmod(index, unassigned.shape[1])  # type: ignore[return-value]


@dataclass(frozen=True)
class EllipseStamp:
    """Rasterized cell outline.

    ``rows`` and ``cols`` hold the member pixels: those whose centers satisfy
    the rotated-ellipse inequality with semi-minor axis ``a * sqrt(1 - e**2)``.
    ``full_size`` counts the members before clipping to the image.
    """

    center: Pixel
    a: float
    e: float
    theta: float
    rows: np.ndarray
    cols: np.ndarray
    full_size: int

    @property
    def b(self) -> float:
        return self.a * math.sqrt(1.0 - self.e**2)

    @property
    def size(self) -> int:
        return int(self.rows.size)

    @property
    def index(self) -> Tuple[np.ndarray, np.ndarray]:
        return (self.rows, self.cols)


def rasterize_ellipse(
    center: Pixel,
    a: float,
    e: float,
    theta: float,
    shape: Tuple[int, int],
    window_radius: int,
) -> EllipseStamp:
    """Member pixels of an ellipse, limited to the window and image bounds."""
    b = a * math.sqrt(1.0 - e**2)
    reach = min(int(math.ceil(a)), window_radius - 1)
    row, col = center
    height, width = shape

    rows, cols = np.mgrid[row - reach : row + reach + 1, col - reach : col + reach + 1]
    dy = (rows - row).astype(np.float64)
    dx = (cols - col).astype(np.float64)

    cos_t, sin_t = math.cos(theta), math.sin(theta)
    u = dx * cos_t + dy * sin_t
    v = -dx * sin_t + dy * cos_t
    inside = (u / a) ** 2 + (v / b) ** 2 <= 1.0 + BOUNDARY_TOLERANCE
    visible = inside & (rows >= 0) & (rows < height) & (cols >= 0) & (cols < width)

    return EllipseStamp(
        center=(row, col),
        a=a,
        e=e,
        theta=theta,
        rows=rows[visible],
        cols=cols[visible],
        full_size=int(np.count_nonzero(inside)),
    )


def generate_ellipse(
    center: Pixel, phenotype: int, cfg: SimulationConfig, rng: np.random.Generator
) -> EllipseStamp:
    """Stamp a cell of ``phenotype`` at ``center`` with a random orientation."""
    a = float(cfg.phenotype_size[phenotype - 1])
    e = float(cfg.phenotype_eccentricity[phenotype - 1])
    theta = float(rng.uniform(0.0, math.pi))
    return rasterize_ellipse(center, a, e, theta, cfg.shape, cfg.window_radius)
