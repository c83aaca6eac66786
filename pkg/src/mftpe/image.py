"""Image container, block partitioning, pixel grouping and thumbnails."""
from __future__ import annotations

import hashlib
import io
import math
from dataclasses import dataclass
from pathlib import Path
from importlib import resources
from typing import List, Tuple, Union

import numpy as np
from PIL import Image as PILImage

from .errors import (
    BlockTooSmall,
    DimensionMismatch,
    EmptyImage,
    NonDivisibleBlockSize,
    UnsupportedImage,
)
from .profiles import Factor, FactorProfile

D = 255
PNG_COMPRESS_LEVEL = 9


@dataclass(frozen=True, eq=False)
class Image:
    """An 8-bit image stored as a read-only ``(H, W, C)`` array, C in {1, 3}."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise UnsupportedImage(f"expected HxW or HxWx{{1,3}} array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > D):
                raise ValueError("pixel values must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        arr = np.ascontiguousarray(arr)
        if arr.flags.writeable:
            arr = arr.copy()
            arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.pixels.shape

    def __eq__(self, other):
        if not isinstance(other, Image):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        return hash((self.shape, hashlib.sha256(self.pixels.tobytes()).digest()))

    def __repr__(self):
        return f"Image({self.width}x{self.height}x{self.channels})"

    def to_planar_bytes(self) -> bytes:
        """Row-major, channel-planar raw bytes (all of channel 0, then 1, ...)."""
        return np.ascontiguousarray(self.pixels.transpose(2, 0, 1)).tobytes()

    @classmethod
    def from_planar_bytes(cls, data: bytes, width: int, height: int, channels: int) -> "Image":
        if len(data) != width * height * channels:
            raise DimensionMismatch(
                f"expected {width * height * channels} bytes, got {len(data)}")
        arr = np.frombuffer(data, dtype=np.uint8).reshape(channels, height, width)
        return cls(arr.transpose(1, 2, 0))


# --------------------------------------------------------------------------
# PNG I/O
# --------------------------------------------------------------------------

def encode_png(image: Image) -> bytes:
    arr = image.pixels
    pil = PILImage.fromarray(arr[:, :, 0], mode="L") if image.channels == 1 \
        else PILImage.fromarray(arr, mode="RGB")
    buf = io.BytesIO()
    pil.save(buf, format="PNG", compress_level=PNG_COMPRESS_LEVEL)
    return buf.getvalue()


def decode_png(data: bytes) -> Image:
    try:
        pil = PILImage.open(io.BytesIO(data))
        pil.load()
    except Exception as exc:  # PIL raises a zoo of exception types
        raise UnsupportedImage(f"cannot decode PNG payload: {exc}") from exc
    return _from_pil(pil)


def read_png(path: Union[str, Path]) -> Image:
    with PILImage.open(path) as pil:
        pil.load()
        return _from_pil(pil)


def write_png(image: Image, path: Union[str, Path]) -> None:
    Path(path).write_bytes(encode_png(image))


def sample_image() -> Image:
    """The bundled 512x512 RGB test image (NASA astronaut portrait, public domain)."""
    return decode_png(resources.files("mftpe").joinpath("data/astronaut.png").read_bytes())


def _from_pil(pil) -> Image:
    if pil.mode not in ("L", "RGB"):
        raise UnsupportedImage(f"unsupported PNG mode {pil.mode!r}; need 8-bit L or RGB")
    return Image(np.asarray(pil))


# --------------------------------------------------------------------------
# Blocks
# --------------------------------------------------------------------------

def _check_block_size(image: Image, block_size: int) -> None:
    if image.width == 0 or image.height == 0:
        raise EmptyImage("image has no pixels")
    if block_size < 2:
        raise BlockTooSmall(f"block size must be >= 2, got {block_size}")
    if image.width % block_size or image.height % block_size:
        raise NonDivisibleBlockSize(
            f"block size {block_size} does not divide {image.width}x{image.height}")


@dataclass(frozen=True, eq=False)
class BlockGrid:
    """All blocks of an image as a ``(C, blocks_per_channel, B*B)`` array.

    Blocks are indexed row-major across the image, pixels row-major within a
    block.
    """

    block_size: int
    width: int
    height: int
    blocks: np.ndarray

    @property
    def channels(self) -> int:
        return self.blocks.shape[0]

    @property
    def blocks_per_channel(self) -> int:
        return self.blocks.shape[1]

    @property
    def blocks_per_row(self) -> int:
        return self.width // self.block_size

    def block(self, channel: int, index: int) -> np.ndarray:
        B = self.block_size
        return self.blocks[channel, index].reshape(B, B)


def partition(image: Image, block_size: int) -> BlockGrid:
    _check_block_size(image, block_size)
    return BlockGrid(block_size, image.width, image.height, to_blocks(image.pixels, block_size))


def reassemble(grid: BlockGrid) -> Image:
    return Image(from_blocks(grid.blocks, grid.block_size, grid.width, grid.height))


def to_blocks(pixels: np.ndarray, B: int) -> np.ndarray:
    H, W, C = pixels.shape
    x = pixels.reshape(H // B, B, W // B, B, C).transpose(4, 0, 2, 1, 3)
    return np.ascontiguousarray(x).reshape(C, (H // B) * (W // B), B * B)


def from_blocks(blocks: np.ndarray, B: int, width: int, height: int) -> np.ndarray:
    C = blocks.shape[0]
    x = blocks.reshape(C, height // B, width // B, B, B).transpose(1, 3, 2, 4, 0)
    return np.ascontiguousarray(x).reshape(height, width, C)


def group_pixels(block, n: int) -> Tuple[List[tuple], List[int]]:
    """Split a block (row-major) into consecutive n-tuples plus trailing leftovers."""
    if n not in (2, 3):
        raise ValueError(f"group size must be 2 or 3, got {n}")
    flat = [int(v) for v in np.asarray(block).ravel()]
    full = len(flat) - len(flat) % n
    groups = [tuple(flat[i:i + n]) for i in range(0, full, n)]
    return groups, flat[full:]


# --------------------------------------------------------------------------
# Thumbnails
# --------------------------------------------------------------------------

def thumbnail(image: Image, block_size: int) -> Image:
    """Block-mean thumbnail; each sample is floor(block sum / B^2)."""
    _check_block_size(image, block_size)
    B = block_size
    H, W, C = image.shape
    sums = image.pixels.reshape(H // B, B, W // B, B, C).sum(axis=(1, 3), dtype=np.int64)
    return Image((sums // (B * B)).astype(np.uint8))


@dataclass(frozen=True)
class ExtendedThumbnail:
    """Block-mean thumbnail plus one secondary record per (channel, block).

    Records are: a hex digest of the exact block product (sum-geomean),
    ``(min, max)`` (sum-range), the block weighted sum over its row-major
    groups (sum-weighted), or nothing (sum-only).
    """

    primary: Image
    secondary: tuple
    profile: str


def _product_digest(values) -> str:
    prod = math.prod(int(v) for v in values)
    raw = prod.to_bytes(max(1, (prod.bit_length() + 7) // 8), "little")
    return hashlib.sha256(raw).hexdigest()[:32]


def block_records(blocks: np.ndarray, profile: FactorProfile) -> tuple:
    """Secondary records for a ``(C, nb, N)`` block array, flattened channel-major."""
    C, nb, N = blocks.shape
    if profile.factor is Factor.SUM_ONLY:
        return ()
    if profile.factor is Factor.SUM_RANGE:
        lo = blocks.min(axis=2).ravel().tolist()
        hi = blocks.max(axis=2).ravel().tolist()
        return tuple(zip(lo, hi))
    if profile.factor is Factor.SUM_GEOMEAN:
        flat = blocks.reshape(C * nb, N)
        return tuple(_product_digest(row) for row in flat)
    if profile.weights is None:
        raise ValueError("sum-weighted extended thumbnail needs explicit weights")
    g = N // 3
    groups = blocks[:, :, : 3 * g].reshape(C, nb, g, 3).astype(np.int64)
    w = np.asarray(profile.weights, dtype=np.int64)
    return tuple((groups * w).sum(axis=(2, 3)).ravel().tolist())


def extended_thumbnail(image: Image, block_size: int, profile: FactorProfile) -> ExtendedThumbnail:
    primary = thumbnail(image, block_size)
    blocks = to_blocks(image.pixels, block_size)
    return ExtendedThumbnail(primary, block_records(blocks, profile), profile.name)


def secondary_map(image: Image, block_size: int, profile: FactorProfile) -> Image:
    """Viewable 8-bit rendering of the secondary factor, one sample per block.

    geomean -> block geometric mean, range -> max - min, weighted -> block
    weighted mean. Sum-only renders the plain thumbnail.
    """
    _check_block_size(image, block_size)
    B = block_size
    H, W, C = image.shape
    blocks = to_blocks(image.pixels, B).astype(np.float64)
    if profile.factor is Factor.SUM_ONLY:
        return thumbnail(image, B)
    if profile.factor is Factor.SUM_RANGE:
        vals = blocks.max(axis=2) - blocks.min(axis=2)
    elif profile.factor is Factor.SUM_GEOMEAN:
        with np.errstate(divide="ignore"):
            logs = np.log(blocks)
        vals = np.where(np.isinf(logs).any(axis=2), 0.0, np.exp(logs.mean(axis=2)))
    else:
        if profile.weights is None:
            raise ValueError("sum-weighted rendering needs explicit weights")
        g = blocks.shape[2] // 3
        w = np.asarray(profile.weights, dtype=np.float64)
        ws = (blocks[:, :, : 3 * g].reshape(C, -1, g, 3) * w).sum(axis=(2, 3))
        vals = ws / (w.sum() * g)
    vals = np.clip(np.rint(vals), 0, D).astype(np.uint8)
    return Image(vals.reshape(C, H // B, W // B).transpose(1, 2, 0))
