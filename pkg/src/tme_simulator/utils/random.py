"""Reproducible random streams.

Every stochastic stage draws from its own named substream so that results
do not depend on the order in which stages or images are executed.
"""

import zlib
from typing import Tuple

import numpy as np

SEED_MASK = 0xFFFFFFFFFFFFFFFF


def purpose_key(purpose: str) -> int:
    """Stable 32-bit key for a substream label."""
    # Never the built-in hash(): it is salted per process.
    return zlib.crc32(purpose.encode("utf-8")) & 0xFFFFFFFF


class RandomStream:
    """Seeded source of independent, counter-based substreams.

    A substream is identified by ``(seed, image_index, purpose, *indices)``
    and backed by a Philox generator, so the same identifier always yields
    the same sequence.
    """

    def __init__(self, seed: int, image_index: int = 0) -> None:
        if seed < 0 or seed > SEED_MASK:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self._seed = int(seed)
        self._image_index = int(image_index)

    @property
    def seed(self) -> int:
        return self._seed

    @property
    def image_index(self) -> int:
        return self._image_index

    def substream_id(self, purpose: str, *indices: int) -> Tuple[int, ...]:
        """Spawn key identifying a substream."""
        return (self._image_index, purpose_key(purpose), *(int(i) for i in indices))

    def generator(self, purpose: str, *indices: int) -> np.random.Generator:
        """Return a fresh generator for the named substream."""
        sequence = np.random.SeedSequence(
            entropy=self._seed, spawn_key=self.substream_id(purpose, *indices)
        )
        return np.random.Generator(np.random.Philox(sequence))

    def __repr__(self) -> str:
        return f"RandomStream(seed={self._seed}, image_index={self._image_index})"
