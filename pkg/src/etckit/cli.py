"""Command-line front end: every pipeline as a reproducible, scriptable command.

Exit codes: 0 success, 1 usage error, 2 data error, 3 codec error. All
commands are deterministic functions of their inputs and flags, and write
only to paths named in flags.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import __version__
from .attack import (
    Puzzle,
    attack_report_row,
    greedy_assemble,
    ground_truth_from_key,
    ground_truth_from_plain,
    render_assembly,
    score_assembly,
)
from .cipher import (
    SCHEME_COLOR,
    SCHEME_GRAYSCALE,
    SIDECAR_VERSION,
    CipherConfig,
    CipherSidecar,
    decrypt,
    encrypt,
    normalize_steps,
)
from .codec import CodecError, CodecParams, mean_bpp_inflation, mean_psnr_gap, rd_csv, rd_curve
from .images import ImageBuffer, load_ppm, pad_replicate, save_ppm
from .keystream import MasterKey, format_key_file, keyspace_bits, parse_key_file
from .templates import classify, enroll, format_template_csv, parse_template_csv, protect_template

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_CODEC = 3

_SCHEMES = {"color": SCHEME_COLOR, "gray": SCHEME_GRAYSCALE}


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the taxonomy reserves 2 for data errors
    def error(self, message):
        raise UsageError(message)


def _read_image(path: str) -> ImageBuffer:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return load_ppm(raw)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def _write_image(path: str, img: ImageBuffer) -> None:
    Path(path).write_bytes(save_ppm(img))


def _load_key(args) -> MasterKey:
    if getattr(args, "key", None):
        try:
            return MasterKey.from_hex(args.key)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    if getattr(args, "key_file", None):
        try:
            raw = Path(args.key_file).read_bytes()
        except OSError as exc:
            raise DataError(f"cannot read {args.key_file}: {exc.strerror or exc}") from exc
        try:
            return parse_key_file(raw)
        except ValueError as exc:
            raise DataError(f"{args.key_file}: {exc}") from exc
    raise UsageError("a key is required: pass --key HEX or --key-file PATH")


def _parse_steps(text: str | None, scheme: str):
    if text is None:
        return None  # scheme default
    try:
        return normalize_steps(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _config(args) -> CipherConfig:
    scheme = _SCHEMES[args.scheme]
    steps = _parse_steps(args.steps, scheme)
    kwargs = {"scheme": scheme}
    if args.block_size is not None:
        kwargs["block_size"] = args.block_size
    if steps is not None:
        kwargs["steps"] = steps
    try:
        return CipherConfig(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _add_key_flags(p, gen_key: bool = False):
    p.add_argument("--key", metavar="HEX", help="64-bit key as 16 lowercase hex chars")
    p.add_argument("--key-file", metavar="PATH", help="file holding the hex key")
    if gen_key:
        p.add_argument(
            "--gen-key",
            metavar="PATH",
            help="derive no key from flags; draw a fresh per-image key from the OS "
            "and save it to PATH (recommended: one key per image)",
        )


def _add_cipher_flags(p):
    p.add_argument("--scheme", choices=sorted(_SCHEMES), default="color")
    p.add_argument("--block-size", type=int, metavar="N", help="default: 16 color, 8 gray")
    p.add_argument(
        "--steps",
        metavar="LIST",
        help='comma-separated subset of s,r,n,c (or full names); "" disables all steps',
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="etckit", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--version",
        action="version",
        version=f"etckit {__version__} (sidecar format {SIDECAR_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encrypt", help="encrypt a PPM/PGM image")
    p.add_argument("image")
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--sidecar", metavar="PATH", help="default: OUT + .meta")
    p.add_argument("--pad", action="store_true", help="edge-replicate to block divisibility")
    _add_key_flags(p, gen_key=True)
    _add_cipher_flags(p)

    p = sub.add_parser("decrypt", help="invert an encryption given key + sidecar")
    p.add_argument("image")
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--sidecar", metavar="PATH", help="default: IMAGE + .meta")
    _add_key_flags(p)

    p = sub.add_parser("rd-curve", help="JPEG rate-distortion sweep, plain vs encrypted")
    p.add_argument("image")
    p.add_argument("--qualities", default="50,70,85,95", metavar="LIST")
    p.add_argument("--subsampling", choices=("420", "444"), default="420")
    p.add_argument("--progressive", action="store_true")
    p.add_argument("--out", metavar="PATH", help="CSV path (default: stdout)")
    _add_key_flags(p)
    _add_cipher_flags(p)

    p = sub.add_parser("attack", help="jigsaw-solver attack on a ciphertext")
    p.add_argument("cipher")
    p.add_argument("--plain", required=True, metavar="PATH", help="ground-truth plaintext")
    p.add_argument("--orientation-search", action="store_true")
    p.add_argument("--out-csv", metavar="PATH", help="report CSV (default: stdout)")
    p.add_argument("--out-image", metavar="PATH", help="assembled image (default: none)")
    _add_key_flags(p)
    _add_cipher_flags(p)

    p = sub.add_parser("keyspace", help="key-space size for a geometry")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    _add_cipher_flags(p)

    p = sub.add_parser("protect", help="apply keyed orthogonal protection to a template CSV")
    p.add_argument("templates", help="CSV: client_id,label,v0,...")
    p.add_argument("--out", metavar="PATH", help="protected CSV (default: stdout)")
    _add_key_flags(p)

    p = sub.add_parser("classify", help="nearest-centroid classification of protected queries")
    p.add_argument("queries", help="protected query CSV")
    p.add_argument("--model", required=True, metavar="PATH", help="labeled protected CSV")
    p.add_argument("--out", metavar="PATH", help="prediction CSV (default: stdout)")

    return parser


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _cmd_encrypt(args) -> int:
    if args.gen_key:
        if args.key or args.key_file:
            raise UsageError("--gen-key conflicts with --key/--key-file")
        import secrets

        key = MasterKey(secrets.randbits(64))
        Path(args.gen_key).write_bytes(format_key_file(key))
    else:
        key = _load_key(args)
    cfg = _config(args)
    img = _read_image(args.image)
    pad = (0, 0)
    if args.pad:
        img, pad_r, pad_b = pad_replicate(img, cfg.block_size)
        pad = (pad_r, pad_b)
    try:
        cipher_img, sidecar = encrypt(img, key, cfg, pad=pad)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    _write_image(args.out, cipher_img)
    sidecar_path = args.sidecar or args.out + ".meta"
    Path(sidecar_path).write_text(sidecar.to_text())
    return EXIT_OK


def _cmd_decrypt(args) -> int:
    key = _load_key(args)
    sidecar_path = args.sidecar or args.image + ".meta"
    try:
        sidecar_text = Path(sidecar_path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read {sidecar_path}: {exc.strerror or exc}") from exc
    try:
        sidecar = CipherSidecar.from_text(sidecar_text)
    except ValueError as exc:
        raise DataError(f"{sidecar_path}: {exc}") from exc
    img = _read_image(args.image)
    try:
        plain = decrypt(img, key, sidecar)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    _write_image(args.out, plain)
    return EXIT_OK


def _cmd_rd_curve(args) -> int:
    key = _load_key(args)
    cfg = _config(args)
    img = _read_image(args.image)
    try:
        qualities = [int(q) for q in args.qualities.split(",") if q.strip()]
        params = CodecParams(subsampling=args.subsampling, progressive=args.progressive)
        if not qualities:
            raise ValueError("qualities must be non-empty")
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    try:
        plain_pts, enc_pts = rd_curve(img, key, cfg, qualities, params)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    _emit(rd_csv(plain_pts, enc_pts), args.out)
    return EXIT_OK


def _cmd_attack(args) -> int:
    cipher_img = _read_image(args.cipher)
    plain_img = _read_image(args.plain)
    cfg = _config(args)
    from .cipher import stack_planes

    if (
        plain_img.channels == 3
        and cipher_img.channels == 1
        and cipher_img.height == 3 * plain_img.height
    ):
        plain_img = stack_planes(plain_img)  # gray-scheme ciphertexts are plane-stacked
    if (plain_img.width, plain_img.height) != (cipher_img.width, cipher_img.height):
        raise DataError(
            f"plaintext {plain_img.width}x{plain_img.height} does not match "
            f"ciphertext {cipher_img.width}x{cipher_img.height}"
        )

    started = time.perf_counter()
    try:
        puzzle = Puzzle.from_image(cipher_img, cfg.block_size)
        if args.key or args.key_file:
            gt = ground_truth_from_key(_load_key(args), cfg, puzzle.grid)
        else:
            gt = ground_truth_from_plain(plain_img, puzzle)
        puzzle = Puzzle(puzzle.pieces, puzzle.grid, gt)
        assembly = greedy_assemble(puzzle, orientation_search=args.orientation_search)
        metrics = score_assembly(assembly, puzzle)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    seconds = time.perf_counter() - started

    from .attack import ATTACK_CSV_HEADER

    steps = normalize_steps(args.steps) if args.steps is not None else ()
    row = attack_report_row(steps, cfg.block_size, puzzle.grid.n_blocks, metrics, seconds)
    _emit(ATTACK_CSV_HEADER + "\n" + row + "\n", args.out_csv)
    if args.out_image:
        _write_image(args.out_image, render_assembly(assembly, puzzle))
    return EXIT_OK


def _cmd_keyspace(args) -> int:
    cfg = _config(args)
    if args.width < 1 or args.height < 1:
        raise UsageError("width and height must be positive")
    height = args.height * 3 if cfg.scheme == SCHEME_GRAYSCALE else args.height
    if args.width % cfg.block_size or height % cfg.block_size:
        raise UsageError(
            f"{args.width}x{args.height} not divisible by block size {cfg.block_size}"
        )
    n_blocks = (args.width // cfg.block_size) * (height // cfg.block_size)
    try:
        bits = keyspace_bits(n_blocks, cfg.steps, cfg.scheme)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    sys.stdout.write(f"n_blocks {n_blocks}\nkeyspace_bits {bits:.6f}\n")
    return EXIT_OK


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _cmd_protect(args) -> int:
    key = _load_key(args)
    try:
        templates = parse_template_csv(_read_text(args.templates))
        protected = [protect_template(t, key) for t in templates]
        out = format_template_csv(protected)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    _emit(out, args.out)
    return EXIT_OK


def _cmd_classify(args) -> int:
    try:
        enrolled = parse_template_csv(_read_text(args.model), protected=True)
        queries = parse_template_csv(_read_text(args.queries), protected=True)
        model = enroll(enrolled)
        lines = ["client_id,predicted,distance"]
        for q in queries:
            cid, dist = classify(q, model)
            lines.append(f"{q.client_id},{cid},{dist:.6f}")
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


_COMMANDS = {
    "encrypt": _cmd_encrypt,
    "decrypt": _cmd_decrypt,
    "rd-curve": _cmd_rd_curve,
    "attack": _cmd_attack,
    "keyspace": _cmd_keyspace,
    "protect": _cmd_protect,
    "classify": _cmd_classify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"etckit: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"etckit: {exc}", file=sys.stderr)
        return EXIT_DATA
    except CodecError as exc:
        print(f"etckit: codec error: {exc}", file=sys.stderr)
        return EXIT_CODEC


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
