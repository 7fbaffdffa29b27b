"""Writers for the engine's JSONL landmark-trace wire format.

Line 1 is a header:
    {"kind":"header","version":1,"fps":<real>,"frames":<int>}
Every later line is a frame record:
    {"kind":"frame","index":<int>,"detected":<bool>}
plus optional "left_eye"/"right_eye" sextets (p1 outer canthus, p2/p3 upper
lid, p4 inner canthus, p5/p6 lower lid) and "left_iris"/"right_iris" groups
(center "c" plus a four-point boundary ring "r"). A detected frame must
carry at least one group; an undetected frame carries none.

This module rebuilds those records from plain dicts produced by the
detectors. It deliberately has no import edge to the engine: the JSONL
format is the whole integration contract.
"""

from __future__ import annotations

import json

TRACE_VERSION = 1

EYE_KEYS = ("p1", "p2", "p3", "p4", "p5", "p6")
EYE_GROUPS = ("left_eye", "right_eye")
IRIS_GROUPS = ("left_iris", "right_iris")


def dump_line(obj: dict) -> str:
    """One wire line: sorted keys, compact separators, raw UTF-8."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def header_record(fps: float, frames: int) -> dict:
    if fps <= 0:
        raise ValueError("fps must be positive")
    if frames < 0:
        raise ValueError("frame count must be non-negative")
    return {"kind": "header", "version": TRACE_VERSION, "fps": float(fps), "frames": int(frames)}


def _point(p) -> list[float]:
    # detectors may hand back numpy scalars; the wire wants plain numbers
    x, y = p
    return [float(x), float(y)]


def frame_record(index: int, groups: dict | None) -> dict:
    """Build one frame line; detected follows from group presence."""
    rec: dict = {"kind": "frame", "index": int(index), "detected": bool(groups)}
    if not groups:
        return rec
    for name in EYE_GROUPS:
        if name in groups:
            eye = groups[name]
            missing = [k for k in EYE_KEYS if k not in eye]
            if missing:
                raise ValueError(f"{name} sextet missing {','.join(missing)}")
            rec[name] = {k: _point(eye[k]) for k in EYE_KEYS}
    for name in IRIS_GROUPS:
        if name in groups:
            iris = groups[name]
            ring = iris.get("r")
            if "c" not in iris or ring is None or len(ring) != 4:
                raise ValueError(f"{name} needs a center and a 4-point ring")
            rec[name] = {"c": _point(iris["c"]), "r": [_point(p) for p in ring]}
    unknown = set(groups) - set(EYE_GROUPS) - set(IRIS_GROUPS)
    if unknown:
        raise ValueError(f"unknown landmark groups: {sorted(unknown)}")
    return rec
