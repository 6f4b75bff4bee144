"""Command-line interface.

Exit codes: 0 on success, 1 when per-item conversion failures occurred,
2 for configuration or usage errors.
"""

import argparse
import logging
import sys
from pathlib import Path

from .accents import ACCENT_CODES, AccentId, parse_accent_list
from .config import PROFILES, load_config
from .convert import ConversionRequest, batch_convert, convert
from .data import build_synthetic_dataset
from .errors import AccentorError, CheckpointVersionError, ConfigError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="accentor",
                                     description="Voice-preserving accent conversion")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert one WAV to a target accent")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--accent", required=True, choices=ACCENT_CODES)
    p.add_argument("--checkpoint", required=True, type=Path)
    p.add_argument("--output", required=True, type=Path)
    p.add_argument("--frontend", choices=("cached", "synthetic"), default=None)
    p.add_argument("--cache-dir", type=Path, default=None)

    p = sub.add_parser("convert-batch", help="convert a manifest of clips to several accents")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--accents", required=True, help="comma-separated codes, e.g. AM,HI,KO")
    p.add_argument("--checkpoint", required=True, type=Path)
    p.add_argument("--out-dir", required=True, type=Path)
    p.add_argument("--frontend", choices=("cached", "synthetic"), default=None)
    p.add_argument("--cache-dir", type=Path, default=None)

    p = sub.add_parser("train", help="run the training loop")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--out-dir", required=True, type=Path)
    p.add_argument("--config", type=Path, default=None, help="INI config file")
    p.add_argument("--profile", choices=sorted(PROFILES), default="desk")
    p.add_argument("--resume", type=Path, default=None)

    p = sub.add_parser("fixtures", help="write synthetic clips plus a manifest")
    p.add_argument("--out-dir", required=True, type=Path)
    p.add_argument("--clips", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, CheckpointVersionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AccentorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.command == "convert":
        out = convert(ConversionRequest(
            input_path=args.input,
            target_accent=AccentId(args.accent),
            checkpoint_path=args.checkpoint,
            output_path=args.output,
            frontend_kind=args.frontend,
            cache_dir=str(args.cache_dir) if args.cache_dir else None,
        ))
        print(out)
        return 0

    if args.command == "convert-batch":
        report = batch_convert(
            args.manifest,
            parse_accent_list(args.accents),
            args.checkpoint,
            args.out_dir,
            frontend_kind=args.frontend,
            cache_dir=str(args.cache_dir) if args.cache_dir else None,
        )
        print(f"{len(report.outputs)} outputs, {len(report.failures)} failures")
        for clip, accent, message in report.failures:
            print(f"  FAILED {clip} -> {accent}: {message}", file=sys.stderr)
        return 0 if report.ok else 1

    if args.command == "train":
        from .training import train

        cfg = load_config(args.config) if args.config else PROFILES[args.profile]()
        ckpt = train(cfg, args.manifest, args.out_dir, resume=args.resume)
        print(ckpt)
        return 0

    if args.command == "fixtures":
        manifest = build_synthetic_dataset(args.out_dir, n_clips=args.clips, seed=args.seed)
        print(manifest)
        return 0

    raise ConfigError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
