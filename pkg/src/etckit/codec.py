"""JPEG round-trip experiments: rate-distortion curves and provider recompression.

The codec itself is an external dependency (Pillow's baseline libjpeg binding)
behind a narrow adapter; everything here only assumes it is deterministic for
a fixed input and parameter set and standard-compliant.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace

import numpy as np

from .cipher import CipherConfig, CipherSidecar, MasterKey, decrypt, encrypt
from .images import ImageBuffer, psnr

try:
    from PIL import Image as _PILImage

    _PIL_ERROR = None
except ImportError as exc:  # pragma: no cover - import guard
    _PILImage = None
    _PIL_ERROR = exc

SUBSAMPLING_420 = "420"
SUBSAMPLING_444 = "444"
_PIL_SUBSAMPLING = {SUBSAMPLING_420: 2, SUBSAMPLING_444: 0}

RD_CSV_HEADER = "path,quality,bpp,psnr_db"


class CodecError(RuntimeError):
    """The JPEG codec is unavailable or failed on the given input."""


@dataclass(frozen=True)
class CodecParams:
    quality: int = 85
    subsampling: str = SUBSAMPLING_420
    progressive: bool = False

    def __post_init__(self):
        if not 1 <= self.quality <= 100:
            raise ValueError(f"quality must be in 1..100, got {self.quality}")
        if self.subsampling not in _PIL_SUBSAMPLING:
            raise ValueError(f"subsampling must be 420 or 444, got {self.subsampling}")


@dataclass(frozen=True)
class RDPoint:
    quality: int
    bits_per_pixel: float
    psnr_db: float


@dataclass(frozen=True)
class ProviderProfile:
    """Quality-only recompression model of an image-hosting provider."""

    name: str
    recompress_quality: int
    forced_subsampling: str | None = None

    def __post_init__(self):
        if not 1 <= self.recompress_quality <= 100:
            raise ValueError(f"quality must be in 1..100, got {self.recompress_quality}")


def _require_codec() -> None:
    if _PILImage is None:
        raise CodecError(f"JPEG codec unavailable: {_PIL_ERROR}")


def jpeg_encode(img: ImageBuffer, params: CodecParams) -> bytes:
    """Encode to baseline JPEG bytes."""
    _require_codec()
    arr = img.data[:, :, 0] if img.channels == 1 else img.data
    pil = _PILImage.fromarray(arr, mode="L" if img.channels == 1 else "RGB")
    buf = io.BytesIO()
    kwargs = {"format": "JPEG", "quality": params.quality, "progressive": params.progressive}
    if img.channels == 3:
        kwargs["subsampling"] = _PIL_SUBSAMPLING[params.subsampling]
    try:
        pil.save(buf, **kwargs)
    except OSError as exc:  # pragma: no cover - codec failure path
        raise CodecError(f"JPEG encode failed: {exc}") from exc
    return buf.getvalue()


def jpeg_decode(data: bytes) -> ImageBuffer:
    """Decode JPEG bytes back to a raster."""
    _require_codec()
    try:
        pil = _PILImage.open(io.BytesIO(data))
        pil.load()
    except Exception as exc:
        raise CodecError(f"JPEG decode failed: {exc}") from exc
    if pil.mode not in ("L", "RGB"):
        pil = pil.convert("RGB")
    return ImageBuffer(np.asarray(pil))


def jpeg_roundtrip(img: ImageBuffer, params: CodecParams) -> tuple[ImageBuffer, int]:
    """Encode then decode; returns the decoded raster and the compressed byte count."""
    data = jpeg_encode(img, params)
    decoded = jpeg_decode(data)
    if (decoded.width, decoded.height) != (img.width, img.height):
        raise CodecError(
            f"codec changed dimensions: {img.width}x{img.height} -> "
            f"{decoded.width}x{decoded.height}"
        )
    return decoded, len(data)


def rd_curve(
    img: ImageBuffer,
    key: MasterKey,
    cfg: CipherConfig,
    qualities: list[int],
    params: CodecParams = CodecParams(),
) -> tuple[list[RDPoint], list[RDPoint]]:
    """Rate-distortion sweep of the plain path and the encrypt-compress-decrypt path.

    Plain: jpeg(img) -> decode -> PSNR vs img.
    Encrypted: encrypt -> jpeg -> decode -> decrypt -> PSNR vs img.
    bpp is compressed bits over the original pixel count for both paths.
    """
    if not qualities:
        raise ValueError("qualities must be non-empty")
    n_pixels = img.width * img.height
    cipher_img, sidecar = encrypt(img, key, cfg)

    plain, encrypted = [], []
    for q in qualities:
        p = replace(params, quality=q)

        decoded, size = jpeg_roundtrip(img, p)
        plain.append(RDPoint(q, size * 8.0 / n_pixels, psnr(img, decoded)))

        decoded_c, size_c = jpeg_roundtrip(cipher_img, p)
        restored = decrypt(decoded_c, key, sidecar)
        encrypted.append(RDPoint(q, size_c * 8.0 / n_pixels, psnr(img, restored)))
    return plain, encrypted


def rd_csv(plain: list[RDPoint], encrypted: list[RDPoint]) -> str:
    """CSV with header ``path,quality,bpp,psnr_db`` and 6-decimal fixed formatting."""
    lines = [RD_CSV_HEADER]
    for label, points in (("plain", plain), ("encrypted", encrypted)):
        for pt in points:
            lines.append(
                f"{label},{pt.quality},{pt.bits_per_pixel:.6f},{pt.psnr_db:.6f}"
            )
    return "\n".join(lines) + "\n"


def provider_recompress(jpeg_bytes: bytes, profile: ProviderProfile) -> bytes:
    """Decode and re-encode at the provider's settings; repeatable for
    multi-generation recompression."""
    decoded = jpeg_decode(jpeg_bytes)
    params = CodecParams(
        quality=profile.recompress_quality,
        subsampling=profile.forced_subsampling or SUBSAMPLING_420,
    )
    return jpeg_encode(decoded, params)


def mean_psnr_gap(plain: list[RDPoint], encrypted: list[RDPoint]) -> float:
    """Mean PSNR drop of the encrypted path relative to the plain path, in dB."""
    return float(
        np.mean([p.psnr_db - e.psnr_db for p, e in zip(plain, encrypted, strict=True)])
    )


def mean_bpp_inflation(plain: list[RDPoint], encrypted: list[RDPoint]) -> float:
    """Mean relative bitrate increase of the encrypted path (0.1 = +10%)."""
    return float(
        np.mean(
            [
                (e.bits_per_pixel - p.bits_per_pixel) / p.bits_per_pixel
                for p, e in zip(plain, encrypted, strict=True)
            ]
        )
    )
