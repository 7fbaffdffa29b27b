"""Media readers: still photos, frame-sequence clip directories, and video
containers, all normalized to (fps, iterator of BGR frames).

Frame-sequence clips are a directory of numbered stills plus a ``clip.json``
manifest carrying the frame rate; the manifest plays the role a container
header plays for real video, which keeps hermetic pipelines codec-free.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import cv2
import numpy as np

from .errors import UnreadableInput

PHOTO_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp"}
VIDEO_SUFFIXES = {".avi", ".mp4", ".mov", ".mkv", ".webm"}
CLIP_MANIFEST = "clip.json"

# a still has no time axis; a nominal 1 fps keeps single-frame traces valid
# for calibration readers, which only consult the geometry
PHOTO_NOMINAL_FPS = 1.0


@dataclass
class MediaStream:
    """A decoded media source: frame rate plus a single-pass frame iterator."""

    fps: float
    kind: str  # "photo" | "frame_dir" | "video"
    frames: Iterator[np.ndarray] = field(repr=False)


def _read_image(path: Path) -> np.ndarray:
    img = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if img is None:
        raise UnreadableInput(f"failed to decode image {path.name}")
    return img


def _frame_dir_fps(root: Path) -> float:
    manifest = root / CLIP_MANIFEST
    if not manifest.is_file():
        raise UnreadableInput(f"frame directory lacks {CLIP_MANIFEST}")
    try:
        meta = json.loads(manifest.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise UnreadableInput(f"unparseable {CLIP_MANIFEST}: {exc}") from exc
    fps = meta.get("fps") if isinstance(meta, dict) else None
    if not isinstance(fps, (int, float)) or isinstance(fps, bool) or fps <= 0:
        raise UnreadableInput(f"{CLIP_MANIFEST} must carry a positive fps")
    return float(fps)


def _iter_frame_dir(paths: list[Path]) -> Iterator[np.ndarray]:
    for p in paths:
        yield _read_image(p)


def _iter_video(cap: cv2.VideoCapture) -> Iterator[np.ndarray]:
    try:
        while True:
            ok, frame = cap.read()
            if not ok:
                return
            yield frame
    finally:
        cap.release()


def open_media(path: str | Path) -> MediaStream:
    """Route a path to the matching reader; raise UnreadableInput otherwise."""
    p = Path(path)
    if p.is_dir():
        fps = _frame_dir_fps(p)
        frames = sorted(q for q in p.iterdir() if q.suffix.lower() in PHOTO_SUFFIXES)
        if not frames:
            raise UnreadableInput(f"frame directory {p.name} holds no image frames")
        return MediaStream(fps=fps, kind="frame_dir", frames=_iter_frame_dir(frames))
    if not p.is_file():
        raise UnreadableInput(f"no such file: {p}")
    suffix = p.suffix.lower()
    if suffix in PHOTO_SUFFIXES:
        img = _read_image(p)
        return MediaStream(fps=PHOTO_NOMINAL_FPS, kind="photo", frames=iter((img,)))
    if suffix in VIDEO_SUFFIXES:
        cap = cv2.VideoCapture(str(p))
        if not cap.isOpened():
            raise UnreadableInput(f"failed to open video {p.name}")
        fps = float(cap.get(cv2.CAP_PROP_FPS))
        if not math.isfinite(fps) or fps <= 0:
            cap.release()
            raise UnreadableInput(f"container metadata of {p.name} reports no frame rate")
        return MediaStream(fps=fps, kind="video", frames=_iter_video(cap))
    raise UnreadableInput(f"unsupported media type {suffix!r}")
