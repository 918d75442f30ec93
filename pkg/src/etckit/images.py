"""8-bit raster images: buffers, lossless PPM/PGM I/O, block partitioning, PSNR."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ImageBuffer:
    """8-bit raster, 1 (gray) or 3 (RGB) channels, row-major interleaved samples.

    ``data`` is always a ``(height, width, channels)`` uint8 array, which is
    exactly the flat row-major channel-interleaved layout when viewed as bytes.
    """

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        arr = np.asarray(data)
        if arr.dtype != np.uint8:
            raise ValueError(f"samples must be uint8, got {arr.dtype}")
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise ValueError(f"expected (H, W, 1|3) array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"empty image: shape {arr.shape}")
        self.data = np.ascontiguousarray(arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def tobytes(self) -> bytes:
        return self.data.tobytes()

    def copy(self) -> "ImageBuffer":
        return ImageBuffer(self.data.copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(
            np.array_equal(self.data, other.data)
        )

    def __repr__(self) -> str:
        return f"ImageBuffer({self.width}x{self.height}x{self.channels})"


@dataclass(frozen=True)
class BlockGrid:
    """Partition geometry: ``rows x cols`` square blocks of ``block_size`` pixels."""

    block_size: int
    rows: int
    cols: int

    @property
    def n_blocks(self) -> int:
        return self.rows * self.cols


def load_ppm(raw: bytes) -> ImageBuffer:
    """Parse a binary PGM (P5, 1 channel) or PPM (P6, 3 channels), maxval 255.

    Header tokens may be separated by any whitespace and ``#`` comments.
    """
    magic = raw[:2]
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise ValueError(f"not a binary PGM/PPM (magic {magic!r})")

    pos = 2
    fields = []
    while len(fields) < 3:
        if pos >= len(raw):
            raise ValueError("truncated header")
        ch = raw[pos : pos + 1]
        if ch == b"#":
            nl = raw.find(b"\n", pos)
            if nl < 0:
                raise ValueError("unterminated comment")
            pos = nl + 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(raw) and not raw[end : end + 1].isspace():
                end += 1
            token = raw[pos:end]
            if not token.isdigit():
                raise ValueError(f"malformed header token {token!r}")
            fields.append(int(token))
            pos = end
    # exactly one whitespace byte separates the header from the payload
    if pos >= len(raw) or not raw[pos : pos + 1].isspace():
        raise ValueError("missing separator before payload")
    pos += 1

    width, height, maxval = fields
    if maxval != 255:
        raise ValueError(f"unsupported maxval {maxval} (only 255)")
    if width < 1 or height < 1:
        raise ValueError(f"bad dimensions {width}x{height}")
    n = width * height * channels
    payload = raw[pos : pos + n]
    if len(payload) < n:
        raise ValueError(f"truncated payload: need {n} bytes, have {len(payload)}")
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    return ImageBuffer(arr.copy())


def save_ppm(img: ImageBuffer) -> bytes:
    """Serialize to canonical binary PGM/PPM: ``P5|P6\\n<w> <h>\\n255\\n<samples>``."""
    magic = b"P5" if img.channels == 1 else b"P6"
    header = b"%s\n%d %d\n255\n" % (magic, img.width, img.height)
    return header + img.tobytes()


def split_blocks(img: ImageBuffer, block_size: int) -> tuple[np.ndarray, BlockGrid]:
    """Cut into square blocks, raster order by block position.

    Returns a ``(n_blocks, block_size, block_size, channels)`` uint8 array and
    the grid. Dimensions must divide exactly; no implicit padding.
    """
    if block_size < 1:
        raise ValueError(f"block_size must be >= 1, got {block_size}")
    if img.height % block_size or img.width % block_size:
        raise ValueError(
            f"{img.width}x{img.height} not divisible by block size {block_size}"
        )
    rows = img.height // block_size
    cols = img.width // block_size
    b = img.data.reshape(rows, block_size, cols, block_size, img.channels)
    blocks = b.swapaxes(1, 2).reshape(rows * cols, block_size, block_size, img.channels)
    return np.ascontiguousarray(blocks), BlockGrid(block_size, rows, cols)


def merge_blocks(blocks: np.ndarray, grid: BlockGrid, channels: int) -> ImageBuffer:
    """Inverse of :func:`split_blocks`."""
    blocks = np.asarray(blocks)
    expected = (grid.n_blocks, grid.block_size, grid.block_size, channels)
    if blocks.shape != expected:
        raise ValueError(f"expected blocks of shape {expected}, got {blocks.shape}")
    b = blocks.reshape(grid.rows, grid.cols, grid.block_size, grid.block_size, channels)
    arr = b.swapaxes(1, 2).reshape(
        grid.rows * grid.block_size, grid.cols * grid.block_size, channels
    )
    return ImageBuffer(np.ascontiguousarray(arr))


def psnr(a: ImageBuffer, b: ImageBuffer) -> float:
    """Peak signal-to-noise ratio in dB over all samples; ``inf`` when identical."""
    if a.data.shape != b.data.shape:
        raise ValueError(f"shape mismatch: {a.data.shape} vs {b.data.shape}")
    diff = a.data.astype(np.int64) - b.data.astype(np.int64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 * 255.0 / mse)


def pad_replicate(img: ImageBuffer, block_size: int) -> tuple[ImageBuffer, int, int]:
    """Edge-replicate on the right/bottom up to block divisibility.

    Returns ``(padded, pad_right, pad_bottom)``; pads are 0 when already aligned.
    """
    if block_size < 1:
        raise ValueError(f"block_size must be >= 1, got {block_size}")
    pad_b = (-img.height) % block_size
    pad_r = (-img.width) % block_size
    if pad_r == 0 and pad_b == 0:
        return img, 0, 0
    arr = np.pad(img.data, ((0, pad_b), (0, pad_r), (0, 0)), mode="edge")
    return ImageBuffer(arr), pad_r, pad_b
