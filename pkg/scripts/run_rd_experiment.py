#!/usr/bin/env python3
"""JPEG rate-distortion sweep: plain path vs encrypt-compress-decrypt path.

Emits one CSV row per (image, steps, quality, path) plus per-config summary
rows, for the bundled pseudo-natural 512x512 references. Deterministic.
"""

import argparse
import sys
import time

import numpy as np

from etckit.cipher import CipherConfig
from etckit.codec import CodecParams, mean_bpp_inflation, mean_psnr_gap, rd_curve
from etckit.keystream import MasterKey
from etckit.synth import reference_images

STEP_SETS = ["", "s", "sr", "srn", "srnc"]
QUALITIES = [50, 70, 85, 95]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--key", default="0123456789abcdef", help="16 hex chars")
    ap.add_argument("--count", type=int, default=3, help="number of reference images")
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--subsampling", choices=("420", "444"), default="420")
    ap.add_argument("--out", help="CSV path (default: stdout)")
    args = ap.parse_args()

    key = MasterKey.from_hex(args.key)
    params = CodecParams(subsampling=args.subsampling)
    images = reference_images(count=args.count, size=args.size)

    lines = ["image,steps,quality,path,bpp,psnr_db"]
    summary = ["image,steps,mean_psnr_gap_db,mean_bpp_inflation"]
    started = time.perf_counter()
    for idx, img in enumerate(images):
        for steps in STEP_SETS:
            cfg = CipherConfig(steps=steps)
            plain, enc = rd_curve(img, key, cfg, QUALITIES, params)
            label = steps or "-"
            for pt in plain:
                lines.append(
                    f"ref{idx},{label},{pt.quality},plain,"
                    f"{pt.bits_per_pixel:.6f},{pt.psnr_db:.6f}"
                )
            for pt in enc:
                lines.append(
                    f"ref{idx},{label},{pt.quality},encrypted,"
                    f"{pt.bits_per_pixel:.6f},{pt.psnr_db:.6f}"
                )
            summary.append(
                f"ref{idx},{label},{mean_psnr_gap(plain, enc):.6f},"
                f"{mean_bpp_inflation(plain, enc):.6f}"
            )
        print(f"ref{idx} done", file=sys.stderr)

    text = "\n".join(lines) + "\n\n" + "\n".join(summary) + "\n"
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    print(f"total {time.perf_counter() - started:.1f}s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
