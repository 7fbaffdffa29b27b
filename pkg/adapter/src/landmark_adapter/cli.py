"""Command-line entry point.

    landmark-adapter extract --input <media> --output <trace.jsonl>
                             [--eye left|right|both] [--detector NAME]

Exits 0 on success, 1 with "error: <code>: <message>" on stderr when the
input is unreadable or the detector backend is unavailable, 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import sys

from .detectors import DETECTOR_CHOICES, make_detector
from .errors import AdapterError
from .extract import EYE_CHOICES, extract_trace


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="landmark-adapter",
        description="Extract eye-landmark traces from photos, clips, and videos",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    ex = sub.add_parser(
        "extract", help="convert media into a JSONL landmark trace"
    )
    ex.add_argument("--input", required=True, help="photo, frame directory, or video")
    ex.add_argument("--output", required=True, help="trace file to write (.jsonl)")
    ex.add_argument("--eye", choices=EYE_CHOICES, default="both")
    ex.add_argument(
        "--detector",
        choices=DETECTOR_CHOICES,
        default="mediapipe",
        help="landmark backend (marker reads role-coded synthetic footage)",
    )
    return parser


def _cmd_extract(args: argparse.Namespace) -> int:
    # photos want the mesh in static mode; let extract_trace pick that up
    detector = None if args.detector == "mediapipe" else make_detector(args.detector)
    stats = extract_trace(
        args.input, args.output, eye=args.eye, detector=detector
    )
    print(
        f"wrote {stats.frame_count} frame line(s), "
        f"{stats.detected_frames} detected, {stats.fps:g} fps -> {stats.out_path}"
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _cmd_extract(args)
    except AdapterError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
