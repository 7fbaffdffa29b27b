"""Core extraction: media in, JSONL landmark trace out.

Single process, strictly frame-sequential: decode a frame, run the
detector, append one wire line. Frames where detection fails (or where the
eye filter removes every group) are kept as detected=false lines so the
trace's time axis still covers the whole capture.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from . import wire
from .detectors import make_detector
from .errors import UnreadableInput
from .media import open_media

EYE_CHOICES = ("left", "right", "both")

_GROUPS_FOR_EYE = {
    "left": ("left_eye", "left_iris"),
    "right": ("right_eye", "right_iris"),
    "both": ("left_eye", "right_eye", "left_iris", "right_iris"),
}


@dataclass(frozen=True)
class ExtractStats:
    out_path: Path
    fps: float
    frame_count: int
    detected_frames: int


def filter_groups(groups: dict | None, eye: str) -> dict | None:
    if groups is None:
        return None
    kept = {k: v for k, v in groups.items() if k in _GROUPS_FOR_EYE[eye]}
    return kept or None


def extract_trace(
    input_path: str | Path,
    out_path: str | Path,
    *,
    eye: str = "both",
    detector=None,
) -> ExtractStats:
    """Convert a photo, frame-sequence clip, or video into a trace file.

    fps comes from the container metadata (nominal 1.0 for stills). The
    default detector is the face mesh; pass an explicit detector object to
    run on synthetic footage.
    """
    if eye not in EYE_CHOICES:
        raise ValueError(f"eye must be one of {EYE_CHOICES}")
    stream = open_media(input_path)
    if detector is None:
        detector = make_detector(
            "mediapipe", static_image_mode=stream.kind == "photo"
        )
    lines = []
    detected_n = 0
    try:
        for index, frame in enumerate(stream.frames):
            groups = filter_groups(detector.detect(frame), eye)
            rec = wire.frame_record(index, groups)
            detected_n += rec["detected"]
            lines.append(wire.dump_line(rec))
    finally:
        if hasattr(detector, "close"):
            detector.close()
    if not lines:
        raise UnreadableInput("input yields no decodable frames")
    header = wire.dump_line(wire.header_record(stream.fps, len(lines)))
    out = Path(out_path)
    out.write_text(header + "\n" + "\n".join(lines) + "\n", encoding="utf-8")
    return ExtractStats(
        out_path=out,
        fps=stream.fps,
        frame_count=len(lines),
        detected_frames=detected_n,
    )
