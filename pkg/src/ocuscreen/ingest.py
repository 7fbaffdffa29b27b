"""Input decoding: photos into BGR rasters and landmark traces into typed
frame records.

The trace wire format is JSON Lines, UTF-8. Line 1 is a header:
    {"kind":"header","version":1,"fps":<real>,"frames":<int>}
Each subsequent line is a frame record:
    {"kind":"frame","index":<int>,"detected":<bool>,
     "left_eye":{"p1":[x,y],...,"p6":[x,y]}, "right_eye":{...},
     "left_iris":{"c":[x,y],"r":[[x,y],[x,y],[x,y],[x,y]]}, "right_iris":{...}}
Groups may be omitted on undetected frames. This format is the only contract
between the engine and external landmark extractors.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .colorspace import Bgr8Image
from .errors import (
    CorruptFile,
    NonMonotonicFrames,
    SchemaViolation,
    UnsupportedFormat,
)
from .utils import canonical_json

TRACE_VERSION = 1

Point = tuple[float, float]


@dataclass(frozen=True)
class EyeLandmarks:
    """Periorbital sextet: p1 outer canthus, p4 inner canthus, p2/p3 upper
    lid, p5/p6 lower lid."""

    p1: Point
    p2: Point
    p3: Point
    p4: Point
    p5: Point
    p6: Point

    def points(self) -> tuple[Point, ...]:
        return (self.p1, self.p2, self.p3, self.p4, self.p5, self.p6)


@dataclass(frozen=True)
class IrisLandmarks:
    """Iris center plus four ring points on the iris boundary."""

    c: Point
    r: tuple[Point, Point, Point, Point]


@dataclass(frozen=True)
class FrameRecord:
    index: int
    detected: bool
    left_eye: EyeLandmarks | None = None
    right_eye: EyeLandmarks | None = None
    left_iris: IrisLandmarks | None = None
    right_iris: IrisLandmarks | None = None


@dataclass(frozen=True)
class LandmarkTrace:
    fps: float
    frame_count: int
    frames: tuple[FrameRecord, ...]

    def __post_init__(self):
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if self.frame_count != len(self.frames):
            raise ValueError("frame_count must match the frame list")

    @property
    def duration_s(self) -> float:
        return self.frame_count / self.fps

    def times(self) -> np.ndarray:
        return np.array([f.index / self.fps for f in self.frames])


def decode_photo(data: bytes) -> Bgr8Image:
    """Decode an 8-bit PNG or JPEG; alpha is dropped, palette expanded."""
    try:
        img = Image.open(io.BytesIO(data))
        fmt = img.format
    except UnidentifiedImageError as exc:
        raise UnsupportedFormat("not a decodable PNG or JPEG file") from exc
    if fmt not in ("PNG", "JPEG"):
        raise UnsupportedFormat(f"unsupported container {fmt!r}; need PNG or JPEG")
    if img.mode in ("I", "I;16", "I;16B", "I;16L", "I;16N", "F"):
        raise UnsupportedFormat(f"unsupported bit depth (mode {img.mode}); need 8-bit")
    try:
        rgb = img.convert("RGB")
        rgb.load()
    except OSError as exc:
        raise CorruptFile(f"failed to decode image data: {exc}") from exc
    arr = np.asarray(rgb, dtype=np.uint8)
    return Bgr8Image(arr[:, :, ::-1].copy())


def encode_png(img: Bgr8Image) -> bytes:
    """Lossless PNG bytes for a BGR raster (inverse of decode_photo)."""
    rgb = Image.fromarray(img.data[:, :, ::-1])
    buf = io.BytesIO()
    rgb.save(buf, format="PNG")
    return buf.getvalue()


def _parse_point(obj, line: int, what: str) -> Point:
    if (
        not isinstance(obj, (list, tuple))
        or len(obj) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj)
    ):
        raise SchemaViolation(f"{what} must be a [x, y] pair of numbers", line)
    return (float(obj[0]), float(obj[1]))


def _parse_eye(obj, line: int, name: str) -> EyeLandmarks:
    if not isinstance(obj, dict):
        raise SchemaViolation(f"{name} must be an object", line)
    keys = ("p1", "p2", "p3", "p4", "p5", "p6")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise SchemaViolation(f"{name} missing {','.join(missing)}", line)
    pts = [_parse_point(obj[k], line, f"{name}.{k}") for k in keys]
    return EyeLandmarks(*pts)


def _parse_iris(obj, line: int, name: str) -> IrisLandmarks:
    if not isinstance(obj, dict):
        raise SchemaViolation(f"{name} must be an object", line)
    if "c" not in obj or "r" not in obj:
        raise SchemaViolation(f"{name} requires c and r", line)
    c = _parse_point(obj["c"], line, f"{name}.c")
    r = obj["r"]
    if not isinstance(r, list) or len(r) != 4:
        raise SchemaViolation(f"{name}.r must list exactly 4 ring points", line)
    ring = tuple(_parse_point(p, line, f"{name}.r[{i}]") for i, p in enumerate(r))
    return IrisLandmarks(c=c, r=ring)


def load_trace(data: bytes) -> LandmarkTrace:
    """Parse and validate a JSONL landmark trace."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SchemaViolation(f"trace is not valid UTF-8: {exc}", 1) from exc
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise SchemaViolation("empty trace", 1)

    def parse_line(raw: str, line_no: int) -> dict:
        if raw.strip() == "":
            raise SchemaViolation("blank line", line_no)
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"invalid JSON: {exc.msg}", line_no) from exc
        if not isinstance(obj, dict):
            raise SchemaViolation("each line must be a JSON object", line_no)
        return obj

    header = parse_line(lines[0], 1)
    if header.get("kind") != "header":
        raise SchemaViolation('line 1 must be the {"kind":"header"} record', 1)
    if header.get("version") != TRACE_VERSION:
        raise SchemaViolation(f"unsupported trace version {header.get('version')!r}", 1)
    fps = header.get("fps")
    if not isinstance(fps, (int, float)) or isinstance(fps, bool) or fps <= 0:
        raise SchemaViolation("header fps must be a positive number", 1)
    declared = header.get("frames")
    if not isinstance(declared, int) or isinstance(declared, bool) or declared < 0:
        raise SchemaViolation("header frames must be a non-negative integer", 1)

    frames: list[FrameRecord] = []
    last_index = None
    for offset, raw in enumerate(lines[1:], start=2):
        obj = parse_line(raw, offset)
        if obj.get("kind") != "frame":
            raise SchemaViolation('expected a {"kind":"frame"} record', offset)
        index = obj.get("index")
        if not isinstance(index, int) or isinstance(index, bool) or index < 0:
            raise SchemaViolation("frame index must be a non-negative integer", offset)
        detected = obj.get("detected")
        if not isinstance(detected, bool):
            raise SchemaViolation("frame detected must be a boolean", offset)
        if last_index is not None and index <= last_index:
            raise NonMonotonicFrames(
                f"line {offset}: frame index {index} does not increase past {last_index}"
            )
        last_index = index

        groups = {}
        for name in ("left_eye", "right_eye"):
            if name in obj and obj[name] is not None:
                groups[name] = _parse_eye(obj[name], offset, name)
        for name in ("left_iris", "right_iris"):
            if name in obj and obj[name] is not None:
                groups[name] = _parse_iris(obj[name], offset, name)
        if detected and not groups:
            raise SchemaViolation("detected frame carries no landmark groups", offset)
        frames.append(FrameRecord(index=index, detected=detected, **groups))

    if len(frames) != declared:
        raise SchemaViolation(
            f"header declares {declared} frames but {len(frames)} are present", 1
        )
    return LandmarkTrace(fps=float(fps), frame_count=len(frames), frames=tuple(frames))


def _point_json(p: Point) -> list[float]:
    return [p[0], p[1]]


def serialize_trace(trace: LandmarkTrace) -> bytes:
    """Write a trace back to the JSONL wire format (exact round-trip)."""
    out = [
        canonical_json(
            {
                "kind": "header",
                "version": TRACE_VERSION,
                "fps": trace.fps,
                "frames": trace.frame_count,
            }
        )
    ]
    for f in trace.frames:
        rec: dict = {"kind": "frame", "index": f.index, "detected": f.detected}
        for name in ("left_eye", "right_eye"):
            grp = getattr(f, name)
            if grp is not None:
                rec[name] = {
                    k: _point_json(getattr(grp, k))
                    for k in ("p1", "p2", "p3", "p4", "p5", "p6")
                }
        for name in ("left_iris", "right_iris"):
            grp = getattr(f, name)
            if grp is not None:
                rec[name] = {
                    "c": _point_json(grp.c),
                    "r": [_point_json(p) for p in grp.r],
                }
        out.append(canonical_json(rec))
    return ("\n".join(out) + "\n").encode("utf-8")
