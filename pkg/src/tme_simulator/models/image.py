"""Rendered multiplex image."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np


@dataclass
class MultiplexImage:
    """C x height x width fluorescence volume.

    ``channel_order`` lists the 1-based marker index stored in each channel.
    """

    channels: np.ndarray
    channel_order: Tuple[int, ...]

    def __post_init__(self) -> None:
        if self.channels.ndim != 3:
            raise ValueError(f"expected a 3-D volume, got shape {self.channels.shape}")
        if len(self.channel_order) != self.channels.shape[0]:
            raise ValueError(
                f"channel_order has {len(self.channel_order)} entries for "
                f"{self.channels.shape[0]} channels"
            )

    @property
    def num_channels(self) -> int:
        return int(self.channels.shape[0])

    @property
    def height(self) -> int:
        return int(self.channels.shape[1])

    @property
    def width(self) -> int:
        return int(self.channels.shape[2])

    def with_channels(self, channels: np.ndarray) -> "MultiplexImage":
        """Same channel order, new pixel data."""
        return MultiplexImage(channels, self.channel_order)
