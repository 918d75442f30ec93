"""Block scrambling-based image encryption and its exact inverse.

The pipeline splits the image into square blocks and applies up to four keyed
steps in a fixed order: block scrambling, per-block rotation/flip, per-block
negative-positive inversion, and per-block RGB channel shuffling. The color
scheme works on 16x16 blocks of the RGB raster; the grayscale-based variant
first stacks the R, G, B planes vertically into one single-channel raster and
uses smaller (8x8) blocks, trading color information for a larger block count.
Every step draws its randomness from an independent keyed stream, so
enabling or disabling one step never shifts another step's draws.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .images import BlockGrid, ImageBuffer, merge_blocks, split_blocks
from .keystream import (
    TAG_COLOR_SHUFFLE,
    TAG_NEGPOS,
    TAG_ROTATE_FLIP,
    TAG_SCRAMBLE,
    MasterKey,
    derive_step_seed,
    gen_permutation,
    gen_symbols,
)

SCRAMBLE = "scramble"
ROTATE_FLIP = "rotate_flip"
NEGPOS = "negpos"
COLOR_SHUFFLE = "color_shuffle"

# Application order is fixed; decryption undoes steps in reverse.
STEP_ORDER = (SCRAMBLE, ROTATE_FLIP, NEGPOS, COLOR_SHUFFLE)

STEP_LETTERS = {SCRAMBLE: "s", ROTATE_FLIP: "r", NEGPOS: "n", COLOR_SHUFFLE: "c"}
_LETTER_STEPS = {v: k for k, v in STEP_LETTERS.items()}

SCHEME_COLOR = "color"
SCHEME_GRAYSCALE = "grayscale_based"

SIDECAR_VERSION = 1

# The 6 RGB channel permutations in lexicographic order; out[c] = in[perm[c]].
CHANNEL_PERMS = ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))
COLOR_INVERSE = (0, 1, 2, 4, 3, 5)

# Dihedral-group inverse of each orientation code (reflections are involutions).
ORIENT_INVERSE = (0, 3, 2, 1, 4, 5, 6, 7)


def normalize_steps(steps) -> frozenset[str]:
    """Accept step names, single-letter codes, or 's,r,n,c' strings."""
    if steps is None:
        return frozenset()
    if isinstance(steps, str):
        text = steps.replace(",", "")
        names = []
        for ch in text:
            if ch not in _LETTER_STEPS:
                raise ValueError(f"unknown step letter {ch!r} (use s, r, n, c)")
            names.append(_LETTER_STEPS[ch])
        return frozenset(names)
    out = set()
    for s in steps:
        if s in STEP_LETTERS:
            out.add(s)
        elif s in _LETTER_STEPS:
            out.add(_LETTER_STEPS[s])
        else:
            raise ValueError(f"unknown step {s!r}")
    return frozenset(out)


def steps_to_letters(steps) -> str:
    enabled = normalize_steps(steps)
    return "".join(STEP_LETTERS[s] for s in STEP_ORDER if s in enabled)


@dataclass(frozen=True)
class CipherConfig:
    """Scheme, block size, and enabled steps.

    ``block_size`` defaults to 16 for the color scheme (the 4:2:0 JPEG MCU)
    and 8 for the grayscale-based scheme (the DCT block).
    """

    scheme: str = SCHEME_COLOR
    block_size: int | None = None
    steps: frozenset[str] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.scheme not in (SCHEME_COLOR, SCHEME_GRAYSCALE):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.block_size is None:
            object.__setattr__(
                self, "block_size", 16 if self.scheme == SCHEME_COLOR else 8
            )
        if self.block_size < 1:
            raise ValueError(f"block_size must be >= 1, got {self.block_size}")
        if self.steps is None:
            default = STEP_ORDER if self.scheme == SCHEME_COLOR else STEP_ORDER[:3]
            object.__setattr__(self, "steps", frozenset(default))
        else:
            object.__setattr__(self, "steps", normalize_steps(self.steps))
        if COLOR_SHUFFLE in self.steps and self.scheme != SCHEME_COLOR:
            raise ValueError("color_shuffle requires the color scheme")


@dataclass(frozen=True)
class CipherSidecar:
    """Everything needed to invert the geometry of an encryption except the key."""

    scheme: str
    block_size: int
    steps: frozenset[str]
    orig_w: int
    orig_h: int
    pad_r: int = 0
    pad_b: int = 0
    version: int = SIDECAR_VERSION

    def to_text(self) -> str:
        lines = [
            f"version={self.version}",
            f"scheme={self.scheme}",
            f"block_size={self.block_size}",
            f"steps={steps_to_letters(self.steps)}",
            f"orig_w={self.orig_w}",
            f"orig_h={self.orig_h}",
            f"pad_r={self.pad_r}",
            f"pad_b={self.pad_b}",
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CipherSidecar":
        fields = {}
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"malformed sidecar line {line!r}")
            k, v = line.split("=", 1)
            fields[k] = v
        try:
            version = int(fields["version"])
            if version != SIDECAR_VERSION:
                raise ValueError(f"unsupported sidecar version {version}")
            return cls(
                scheme=fields["scheme"],
                block_size=int(fields["block_size"]),
                steps=normalize_steps(fields["steps"]),
                orig_w=int(fields["orig_w"]),
                orig_h=int(fields["orig_h"]),
                pad_r=int(fields["pad_r"]),
                pad_b=int(fields["pad_b"]),
                version=version,
            )
        except KeyError as exc:
            raise ValueError(f"sidecar missing field {exc}") from exc

    def config(self) -> CipherConfig:
        return CipherConfig(self.scheme, self.block_size, self.steps)


# ---------------------------------------------------------------------------
# Per-block transforms


def apply_scramble(blocks: np.ndarray, perm) -> np.ndarray:
    """Permute a block stack: ``out[i] = blocks[perm[i]]``."""
    perm = np.asarray(perm, dtype=np.int64)
    if len(blocks) != len(perm):
        raise ValueError(f"{len(blocks)} blocks but permutation of {len(perm)}")
    return blocks[perm]


def inverse_permutation(perm) -> np.ndarray:
    perm = np.asarray(perm, dtype=np.int64)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm), dtype=np.int64)
    return inv


def apply_orientation(block: np.ndarray, code: int) -> np.ndarray:
    """One of the 8 square symmetries: rotate 90deg CCW ``code % 4`` times,
    then mirror horizontally iff ``code >= 4``."""
    if not 0 <= code < 8:
        raise ValueError(f"orientation code must be in [0, 8), got {code}")
    if block.shape[0] != block.shape[1]:
        raise ValueError(f"block must be square, got {block.shape}")
    out = np.rot90(block, code % 4, axes=(0, 1))
    if code >= 4:
        out = np.flip(out, axis=1)
    return np.ascontiguousarray(out)


def invert_orientation(code: int) -> int:
    if not 0 <= code < 8:
        raise ValueError(f"orientation code must be in [0, 8), got {code}")
    return ORIENT_INVERSE[code]


def compose_orientations(first: int, then: int) -> int:
    """Code of applying ``first`` and afterwards ``then`` (both in [0, 8))."""
    f1, r1 = first >= 4, first % 4
    f2, r2 = then >= 4, then % 4
    # then o first: flip parts xor; the later rotation acts mirrored when it
    # lands on an already-flipped block.
    r = (r1 + r2 * (-1 if f1 else 1)) % 4
    return (4 if f1 != f2 else 0) + r


def _orient_stack(blocks: np.ndarray, codes: np.ndarray) -> np.ndarray:
    out = np.empty_like(blocks)
    for code in range(8):
        idx = np.nonzero(codes == code)[0]
        if idx.size == 0:
            continue
        sub = blocks[idx]
        sub = np.rot90(sub, code % 4, axes=(1, 2))
        if code >= 4:
            sub = np.flip(sub, axis=2)
        out[idx] = sub
    return out


def apply_negpos(block: np.ndarray, bit: int) -> np.ndarray:
    """Sample inversion ``p -> 255 - p`` on every channel when ``bit`` is 1."""
    if bit not in (0, 1):
        raise ValueError(f"negpos bit must be 0 or 1, got {bit}")
    if bit == 0:
        return block.copy()
    return (255 - block.astype(np.int16)).astype(np.uint8)


def apply_color_shuffle(block: np.ndarray, perm3: int) -> np.ndarray:
    """Reorder RGB channels by permutation index ``perm3`` (lexicographic)."""
    if not 0 <= perm3 < 6:
        raise ValueError(f"channel permutation index must be in [0, 6), got {perm3}")
    if block.ndim != 3 or block.shape[2] != 3:
        raise ValueError("color shuffle requires a 3-channel block")
    return np.ascontiguousarray(block[..., CHANNEL_PERMS[perm3]])


def invert_color_shuffle(perm3: int) -> int:
    if not 0 <= perm3 < 6:
        raise ValueError(f"channel permutation index must be in [0, 6), got {perm3}")
    return COLOR_INVERSE[perm3]


# ---------------------------------------------------------------------------
# Keyed draws


@dataclass(frozen=True)
class StepDraws:
    """All per-block randomness for one (key, config, block count) triple."""

    perm: np.ndarray | None
    orientations: np.ndarray | None
    negpos_bits: np.ndarray | None
    shuffles: np.ndarray | None


def step_draws(key: MasterKey, cfg: CipherConfig, n_blocks: int) -> StepDraws:
    perm = orients = bits = shuffles = None
    if SCRAMBLE in cfg.steps:
        perm = np.asarray(
            gen_permutation(derive_step_seed(key, TAG_SCRAMBLE), n_blocks),
            dtype=np.int64,
        )
    if ROTATE_FLIP in cfg.steps:
        orients = np.asarray(
            gen_symbols(derive_step_seed(key, TAG_ROTATE_FLIP), n_blocks, 8),
            dtype=np.int64,
        )
    if NEGPOS in cfg.steps:
        bits = np.asarray(
            gen_symbols(derive_step_seed(key, TAG_NEGPOS), n_blocks, 2),
            dtype=np.int64,
        )
    if COLOR_SHUFFLE in cfg.steps:
        shuffles = np.asarray(
            gen_symbols(derive_step_seed(key, TAG_COLOR_SHUFFLE), n_blocks, 6),
            dtype=np.int64,
        )
    return StepDraws(perm, orients, bits, shuffles)


# ---------------------------------------------------------------------------
# Plane stacking for the grayscale-based scheme


def stack_planes(img: ImageBuffer) -> ImageBuffer:
    """(W, H, 3) -> (W, 3H, 1): R plane on top, then G, then B."""
    if img.channels == 1:
        return img
    planes = [img.data[:, :, c : c + 1] for c in range(3)]
    return ImageBuffer(np.concatenate(planes, axis=0))


def unstack_planes(img: ImageBuffer) -> ImageBuffer:
    """Inverse of :func:`stack_planes`; height must be a multiple of 3."""
    if img.channels != 1 or img.height % 3:
        raise ValueError(f"cannot unstack {img!r}")
    h = img.height // 3
    planes = [img.data[c * h : (c + 1) * h, :, 0] for c in range(3)]
    return ImageBuffer(np.stack(planes, axis=2))


# ---------------------------------------------------------------------------
# Full pipeline


def _check_geometry(img: ImageBuffer, cfg: CipherConfig) -> None:
    if cfg.scheme == SCHEME_COLOR and img.channels != 3:
        raise ValueError("color scheme requires a 3-channel image")
    if img.width % cfg.block_size or img.height % cfg.block_size:
        raise ValueError(
            f"{img.width}x{img.height} not divisible by block size "
            f"{cfg.block_size}; pad the image first"
        )


def encrypt(
    img: ImageBuffer,
    key: MasterKey,
    cfg: CipherConfig,
    pad: tuple[int, int] = (0, 0),
) -> tuple[ImageBuffer, CipherSidecar]:
    """Encrypt an already block-aligned image.

    ``pad`` is the (right, bottom) edge padding previously applied to reach
    divisibility; it is recorded in the sidecar so decryption can crop it off.
    """
    _check_geometry(img, cfg)
    pad_r, pad_b = pad
    sidecar = CipherSidecar(
        scheme=cfg.scheme,
        block_size=cfg.block_size,
        steps=cfg.steps,
        orig_w=img.width - pad_r,
        orig_h=img.height - pad_b,
        pad_r=pad_r,
        pad_b=pad_b,
    )

    work = stack_planes(img) if cfg.scheme == SCHEME_GRAYSCALE else img
    blocks, grid = split_blocks(work, cfg.block_size)
    draws = step_draws(key, cfg, grid.n_blocks)

    if draws.perm is not None:
        blocks = apply_scramble(blocks, draws.perm)
    if draws.orientations is not None:
        blocks = _orient_stack(blocks, draws.orientations)
    if draws.negpos_bits is not None:
        blocks = blocks.copy()
        flip = draws.negpos_bits == 1
        blocks[flip] = 255 - blocks[flip]
    if draws.shuffles is not None:
        blocks = blocks.copy()
        for idx in range(6):
            sel = draws.shuffles == idx
            if sel.any():
                blocks[sel] = blocks[sel][..., CHANNEL_PERMS[idx]]

    return merge_blocks(blocks, grid, work.channels), sidecar


def decrypt(img: ImageBuffer, key: MasterKey, sidecar: CipherSidecar) -> ImageBuffer:
    """Exact inverse of :func:`encrypt` (when no lossy codec intervened)."""
    cfg = sidecar.config()
    padded_w = sidecar.orig_w + sidecar.pad_r
    padded_h = sidecar.orig_h + sidecar.pad_b
    stacked = cfg.scheme == SCHEME_GRAYSCALE and img.height == 3 * padded_h
    expect_h = 3 * padded_h if stacked else padded_h
    if img.width != padded_w or img.height != expect_h:
        raise ValueError(
            f"ciphertext is {img.width}x{img.height}, sidecar implies "
            f"{padded_w}x{expect_h}"
        )
    if cfg.scheme == SCHEME_GRAYSCALE and img.channels != 1:
        raise ValueError("grayscale-based ciphertext must be single-channel")

    blocks, grid = split_blocks(img, cfg.block_size)
    draws = step_draws(key, cfg, grid.n_blocks)

    if draws.shuffles is not None:
        blocks = blocks.copy()
        for idx in range(6):
            sel = draws.shuffles == idx
            if sel.any():
                blocks[sel] = blocks[sel][..., CHANNEL_PERMS[COLOR_INVERSE[idx]]]
    if draws.negpos_bits is not None:
        blocks = blocks.copy()
        flip = draws.negpos_bits == 1
        blocks[flip] = 255 - blocks[flip]
    if draws.orientations is not None:
        inv = np.asarray(ORIENT_INVERSE, dtype=np.int64)[draws.orientations]
        blocks = _orient_stack(blocks, inv)
    if draws.perm is not None:
        blocks = apply_scramble(blocks, inverse_permutation(draws.perm))

    out = merge_blocks(blocks, grid, img.channels)
    if stacked:
        out = unstack_planes(out)
    if sidecar.pad_r or sidecar.pad_b:
        out = ImageBuffer(out.data[: sidecar.orig_h, : sidecar.orig_w, :])
    return out
