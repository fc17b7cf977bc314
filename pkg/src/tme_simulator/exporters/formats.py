"""Binary file formats for masks and multiplex volumes.

Label masks are binary PGM (P5). Masks use ``maxval`` 255 with one byte per
sample; instance maps use ``maxval`` 65535 with big-endian two-byte samples.
Multiplex volumes are raw little-endian float32, channel-major then
row-major, with a JSON sidecar describing the layout.
"""

import json
import re
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import aiofiles
import numpy as np

from tme_simulator.exceptions import FormatError
from tme_simulator.models import MultiplexImage

PathLike = Union[str, Path]

MASK_MAXVAL = 255
INSTANCE_MAXVAL = 65535
MULTIPLEX_FORMAT_VERSION = "1.0"
MULTIPLEX_DTYPE = np.dtype("<f4")

_PGM_HEADER = re.compile(
    rb"P5(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)\s"
)


def encode_pgm(grid: np.ndarray, maxval: int = MASK_MAXVAL) -> bytes:
    """Encode a 2-D integer grid as a binary PGM."""
    if maxval not in (MASK_MAXVAL, INSTANCE_MAXVAL):
        raise FormatError(f"unsupported PGM maxval {maxval}")
    if grid.ndim != 2:
        raise FormatError(f"PGM needs a 2-D grid, got shape {grid.shape}")
    if grid.size and (grid.min() < 0 or grid.max() > maxval):
        raise FormatError(
            f"label values span {int(grid.min())}..{int(grid.max())}, "
            f"outside 0..{maxval}"
        )
    height, width = grid.shape
    dtype = np.dtype("u1") if maxval == MASK_MAXVAL else np.dtype(">u2")
    header = f"P5\n{width} {height}\n{maxval}\n".encode("ascii")
    return header + np.ascontiguousarray(grid, dtype=dtype).tobytes()


def decode_pgm(data: bytes) -> Tuple[np.ndarray, int]:
    """Decode a binary PGM into ``(grid, maxval)``."""
    match = _PGM_HEADER.match(data)
    if match is None:
        raise FormatError("not a binary PGM (P5) file")
    width, height, maxval = (int(g) for g in match.groups())
    if not 0 < maxval <= INSTANCE_MAXVAL:
        raise FormatError(f"invalid PGM maxval {maxval}")

    dtype = np.dtype("u1") if maxval < 256 else np.dtype(">u2")
    payload = data[match.end() :]
    expected = width * height * dtype.itemsize
    if len(payload) != expected:
        raise FormatError(
            f"PGM payload has {len(payload)} bytes, expected {expected}"
        )
    grid = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return grid.astype(np.int32), maxval


def encode_multiplex(img: MultiplexImage) -> Tuple[bytes, bytes]:
    """Raw float32 payload and its JSON sidecar."""
    payload = np.ascontiguousarray(img.channels, dtype=MULTIPLEX_DTYPE).tobytes()
    sidecar = {
        "format_version": MULTIPLEX_FORMAT_VERSION,
        "channels": img.num_channels,
        "height": img.height,
        "width": img.width,
        "channel_order": list(img.channel_order),
    }
    return payload, (json.dumps(sidecar, indent=2) + "\n").encode("utf-8")


def decode_multiplex(payload: bytes, sidecar: Union[bytes, str]) -> MultiplexImage:
    """Rebuild a multiplex volume from its raw payload and sidecar."""
    try:
        meta: Dict[str, Any] = json.loads(sidecar)
        shape = (int(meta["channels"]), int(meta["height"]), int(meta["width"]))
        order = tuple(int(c) for c in meta["channel_order"])
    except (ValueError, KeyError, TypeError) as e:
        raise FormatError(f"malformed multiplex sidecar: {e}") from e

    if meta.get("format_version") != MULTIPLEX_FORMAT_VERSION:
        raise FormatError(
            f"unsupported multiplex format version {meta.get('format_version')!r}"
        )
    expected = MULTIPLEX_DTYPE.itemsize * shape[0] * shape[1] * shape[2]
    if len(payload) != expected:
        raise FormatError(
            f"multiplex payload has {len(payload)} bytes, expected {expected}"
        )
    channels = np.frombuffer(payload, dtype=MULTIPLEX_DTYPE).reshape(shape)
    return MultiplexImage(channels.astype(np.float32), order)


def sidecar_path(path: PathLike) -> Path:
    """``multiplex.raw`` -> ``multiplex.json``."""
    return Path(path).with_suffix(".json")


async def write_bytes(path: PathLike, data: bytes) -> None:
    """Write ``data`` to ``path``, creating parent directories."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    async with aiofiles.open(target, "wb") as f:
        await f.write(data)


async def read_bytes(path: PathLike) -> bytes:
    async with aiofiles.open(Path(path), "rb") as f:
        return await f.read()


async def write_label_mask(
    grid: np.ndarray, path: PathLike, maxval: int = MASK_MAXVAL
) -> bytes:
    """Write a label grid as PGM and return the bytes written."""
    data = encode_pgm(grid, maxval)
    await write_bytes(path, data)
    return data


async def read_label_mask(path: PathLike) -> np.ndarray:
    grid, _ = decode_pgm(await read_bytes(path))
    return grid


async def write_multiplex(img: MultiplexImage, path: PathLike) -> Tuple[bytes, bytes]:
    """Write the raw volume and its sidecar next to it."""
    payload, sidecar = encode_multiplex(img)
    await write_bytes(path, payload)
    await write_bytes(sidecar_path(path), sidecar)
    return payload, sidecar


async def read_multiplex(path: PathLike) -> MultiplexImage:
    payload = await read_bytes(path)
    sidecar = await read_bytes(sidecar_path(path))
    return decode_multiplex(payload, sidecar)
