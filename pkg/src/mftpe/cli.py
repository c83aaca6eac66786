"""Command-line interface: ``mftpe <command> [options]``.

Exit status: 0 success, 1 usage error, 2 I/O or malformed input,
3 verification or golden mismatch.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import metrics
from .collision import ORACLE_MODES, collision_report, image_set_size_total
from .engine import DEFAULT_BLOCK_SIZE, DEFAULT_ROUNDS, CipherParams, Envelope, decrypt, encrypt
from .errors import MFTPEError, MalformedEnvelope, ParamMismatch, UnsupportedImage
from .golden import golden_report, golden_rows
from .image import decode_png, encode_png, extended_thumbnail, read_png, secondary_map, thumbnail
from .keystream import KEY_BYTES, NONCE_BYTES
from .profiles import MAX_WEIGHT, PROFILE_NAMES, FactorProfile

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_MISMATCH = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# Argument helpers
# --------------------------------------------------------------------------

def _hex_bytes(text: str, size: int, what: str) -> bytes:
    try:
        raw = bytes.fromhex(text.strip())
    except ValueError:
        raise UsageError(f"{what} is not valid hex") from None
    if len(raw) != size:
        raise UsageError(f"{what} must be {size} bytes ({2 * size} hex digits), got {len(raw)}")
    return raw


def _file_bytes(path: str, size: int, what: str) -> bytes:
    data = Path(path).read_bytes()
    if len(data) == size:
        return data
    return _hex_bytes(data.decode("ascii", errors="replace"), size, f"{what} file {path}")


def _secret(args, name: str, size: int, required: bool = True) -> Optional[bytes]:
    text, path = getattr(args, name), getattr(args, f"{name}_file")
    if text and path:
        raise UsageError(f"give either --{name} or --{name}-file, not both")
    if text:
        return _hex_bytes(text, size, name)
    if path:
        return _file_bytes(path, size, name)
    if required:
        raise UsageError(f"--{name} or --{name}-file is required")
    return None


def _weights(text: Optional[str]):
    if text is None:
        return None
    try:
        w = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError("--weights expects three comma-separated integers") from None
    if len(w) != 3 or any(not 1 <= x <= 255 for x in w):
        raise UsageError("--weights expects three integers in [1, 255]")
    return w


def _profile(args) -> FactorProfile:
    weights = _weights(getattr(args, "weights", None))
    if weights and args.profile != "sum-weighted":
        raise UsageError("--weights only applies to --profile sum-weighted")
    return FactorProfile.from_name(args.profile, weights)


def _sums(text: Optional[str]):
    if text is None:
        return None
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError("sums must be comma-separated integers") from None


def _load_image_or_envelope(path: str):
    """Returns ``(image, envelope_or_None)``."""
    data = Path(path).read_bytes()
    if data[:4] == b"MFTP":
        env = Envelope.from_bytes(data)
        return env.image, env
    return decode_png(data), None


def _emit_json(obj, out: Optional[str]) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _inf_safe(x: float):
    return "inf" if x == float("inf") else x


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def cmd_encrypt(args) -> int:
    profile = _profile(args)
    if args.gen_key:
        if args.key or args.key_file:
            raise UsageError("--gen-key cannot be combined with --key/--key-file")
        key = os.urandom(KEY_BYTES)
        Path(args.gen_key).write_bytes(key)
    else:
        key = _secret(args, "key", KEY_BYTES)
    nonce = _secret(args, "nonce", NONCE_BYTES)
    params = CipherParams(key, nonce, profile, args.block, args.rounds)
    envelope = encrypt(read_png(args.inp), params)
    Path(args.out).write_bytes(envelope.to_bytes())
    return EXIT_OK


def cmd_decrypt(args) -> int:
    key = _secret(args, "key", KEY_BYTES)
    envelope = Envelope.from_bytes(Path(args.inp).read_bytes())
    Path(args.out).write_bytes(encode_png(decrypt(envelope, key)))
    return EXIT_OK


def cmd_thumbnail(args) -> int:
    image, envelope = _load_image_or_envelope(args.inp)
    profile = _profile(args) if args.profile else None
    if profile is None:
        profile = envelope.profile if envelope else FactorProfile.sum_only()
    elif envelope and profile.weights is None and envelope.profile.name == profile.name:
        profile = envelope.profile
    thumb = thumbnail(image, args.block)
    Path(args.out).write_bytes(encode_png(thumb))
    if args.secondary_out:
        Path(args.secondary_out).write_bytes(encode_png(secondary_map(image, args.block, profile)))
    if args.json:
        ext = extended_thumbnail(image, args.block, profile)
        _emit_json({"profile": ext.profile, "block_size": args.block,
                    "width": thumb.width, "height": thumb.height,
                    "secondary": [list(r) if isinstance(r, tuple) else r for r in ext.secondary]},
                   args.json)
    return EXIT_OK


def cmd_collide(args) -> int:
    try:
        report = collision_report(args.d, args.n, args.m, args.mode, _sums(args.sums),
                                  _sums(args.sums2), oracle=args.oracle)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit_json(report, args.out)
    if args.oracle and not report["agree"]:
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_analyze(args) -> int:
    image, envelope = _load_image_or_envelope(args.inp)
    report = {"width": image.width, "height": image.height, "channels": image.channels}
    hist = metrics.histogram(image)
    report["histogram"] = {"nonzero_bins": [int((h > 0).sum()) for h in hist]}
    if args.histogram_csv:
        metrics.write_histogram_csv(image, args.histogram_csv)
    report["correlation"] = metrics.correlation_report(image, args.pairs, args.seed).to_dict()
    if envelope is not None:
        report["envelope"] = {"profile": envelope.profile.name, "block_size": envelope.block_size,
                              "rounds": envelope.rounds}
    if args.plain:
        plain = read_png(args.plain)
        report["storage_expansion"] = metrics.storage_expansion(plain, image)
        report["psnr_vs_plain"] = _inf_safe(metrics.psnr(plain, image))
    if args.set_sizes:
        profile = _profile(args) if args.profile else (envelope.profile if envelope else None)
        if profile is None:
            raise UsageError("--set-sizes needs --profile for a plain PNG")
        block = args.block or (envelope.block_size if envelope else DEFAULT_BLOCK_SIZE)
        report["set_size_total"] = str(image_set_size_total(image, block, profile))
    _emit_json(report, args.out)
    return EXIT_OK


def cmd_noise(args) -> int:
    spec = metrics.NoiseSpec(args.kind, args.amount, args.seed)
    image, envelope = _load_image_or_envelope(args.inp)
    noisy = metrics.add_noise(image, spec)
    data = envelope.with_image(noisy).to_bytes() if envelope else encode_png(noisy)
    Path(args.out).write_bytes(data)
    return EXIT_OK


def cmd_golden(args) -> int:
    if args.json:
        report = golden_report()
        _emit_json(report, None)
        ok = report["pass"]
    else:
        rows = golden_rows()
        for row in rows:
            print(row.line())
        ok = all(r.ok for r in rows)
        print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_MISMATCH


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

def _add_secret(p, name: str, size: int):
    p.add_argument(f"--{name}", metavar="HEX", help=f"{size}-byte {name} as hex")
    p.add_argument(f"--{name}-file", metavar="PATH", help=f"file holding the {name} (raw or hex)")


def _add_profile(p, default: Optional[str]):
    p.add_argument("--profile", choices=PROFILE_NAMES + ("sum-only",), default=default,
                   help=f"substitution profile (default: {default or 'from input'})")
    p.add_argument("--weights", metavar="W1,W2,W3",
                   help=f"sum-weighted weights; default derives each from key and nonce in [1, {MAX_WEIGHT}]")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mftpe", description="Multi-factor thumbnail-preserving image encryption.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encrypt", help="encrypt a PNG into an envelope")
    p.add_argument("--in", dest="inp", required=True, metavar="PNG")
    p.add_argument("--out", required=True, metavar="ENVELOPE")
    _add_profile(p, "sum-range")
    p.add_argument("--block", type=int, default=DEFAULT_BLOCK_SIZE, help="block size B (default 16)")
    p.add_argument("--rounds", type=int, default=DEFAULT_ROUNDS, help="rounds R (default 3)")
    _add_secret(p, "key", KEY_BYTES)
    _add_secret(p, "nonce", NONCE_BYTES)
    p.add_argument("--gen-key", metavar="PATH", help="generate a fresh random key, write it to PATH and use it")
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="decrypt an envelope into a PNG")
    p.add_argument("--in", dest="inp", required=True, metavar="ENVELOPE")
    p.add_argument("--out", required=True, metavar="PNG")
    _add_secret(p, "key", KEY_BYTES)
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("thumbnail", help="plain and extended thumbnails of a PNG or envelope")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--block", type=int, default=DEFAULT_BLOCK_SIZE)
    p.add_argument("--out", required=True, metavar="PNG", help="plain (block-mean) thumbnail")
    p.add_argument("--secondary-out", metavar="PNG", help="secondary-factor map")
    p.add_argument("--json", metavar="PATH", help="extended thumbnail records as JSON")
    _add_profile(p, None)
    p.set_defaults(func=cmd_thumbnail)

    p = sub.add_parser("collide", help="collision probabilities, optionally checked by enumeration")
    p.add_argument("--d", type=int, default=255)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--mode", choices=ORACLE_MODES, default="pair")
    p.add_argument("--sums", help="block sums of the fixed image, comma-separated")
    p.add_argument("--sums2", help="block sums of the second fixed image (fixed-pair)")
    p.add_argument("--oracle", action="store_true", help="also enumerate exhaustively")
    p.add_argument("--out", metavar="JSON")
    p.set_defaults(func=cmd_collide)

    p = sub.add_parser("analyze", help="histogram, correlation and storage metrics")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--plain", metavar="PNG", help="plaintext for storage expansion and PSNR")
    p.add_argument("--pairs", type=int, default=metrics.DEFAULT_PAIRS)
    p.add_argument("--seed", type=int, default=metrics.DEFAULT_SEED)
    p.add_argument("--histogram-csv", metavar="PATH")
    p.add_argument("--set-sizes", action="store_true", help="total constrained-set size (slow for large images)")
    p.add_argument("--block", type=int)
    _add_profile(p, None)
    p.add_argument("--out", metavar="JSON")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("noise", help="corrupt the image inside a PNG or envelope")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--kind", choices=metrics.NOISE_KINDS, default="salt-pepper")
    p.add_argument("--amount", type=float, default=0.01,
                   help="sigma, density or variance depending on --kind (default 0.01)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("golden", help="replay the built-in golden values")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_golden)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mftpe: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, MalformedEnvelope, ParamMismatch, UnsupportedImage) as exc:
        print(f"mftpe: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, MFTPEError) as exc:
        print(f"mftpe: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
