"""Landmark detector backends.

Both backends emit the same shape: a dict of wire-format groups
("left_eye"/"right_eye" sextets, "left_iris"/"right_iris" center+ring),
or None when the frame shows no usable landmarks. All coordinates are
pixels in the frame's own raster.

MediaPipeFaceMesh wraps the off-the-shelf face mesh with iris refinement
and owns the mesh-index-to-role mapping (see the constants below and the
README); nothing downstream ever sees mesh indices. MarkerDotDetector
reads synthetic footage whose landmarks are painted as role-coded color
dots, which keeps the extraction pipeline testable with no model files.
"""

from __future__ import annotations

import itertools

import cv2
import numpy as np

from .errors import DetectorUnavailable

Point = tuple[float, float]

# --- MediaPipe face-mesh index map -----------------------------------------
# Sextets run p1..p6: outer canthus, two upper-lid points, inner canthus,
# two lower-lid points (the pairing the engine's aspect ratio expects:
# verticals p2-p6 and p3-p5 over horizontal p1-p4). "Right" means the
# subject's right eye, which sits on the image's left in a selfie frame.
RIGHT_EYE_MESH = (33, 160, 158, 133, 153, 144)
LEFT_EYE_MESH = (263, 387, 385, 362, 380, 373)
# refine_landmarks appends 478-point output: iris centers then boundary rings
RIGHT_IRIS_MESH = (468, (469, 470, 471, 472))
LEFT_IRIS_MESH = (473, (474, 475, 476, 477))

EYE_KEYS = ("p1", "p2", "p3", "p4", "p5", "p6")

# --- Marker-dot role coding -------------------------------------------------
# Role order is fixed: right-eye sextet, left-eye sextet, right iris
# center + 4 ring points, left iris center + 4 ring points.
ROLE_GROUPS = (
    ("right_eye", 0),
    ("left_eye", 6),
    ("right_iris", 12),
    ("left_iris", 17),
)
ROLE_COUNT = 22

# palette: the {0,128,255}^3 grid minus its gray diagonal, so any two role
# colors differ by >= 127 in some channel and survive lossy codecs
_EXCLUDED = {(0, 0, 0), (128, 128, 128), (255, 255, 255)}
MARKER_PALETTE = np.array(
    [c for c in itertools.product((0, 128, 255), repeat=3) if c not in _EXCLUDED][
        :ROLE_COUNT
    ],
    dtype=np.uint8,
)
MATCH_TOLERANCE = 40  # per-channel; half the palette's minimum separation
MIN_MARKER_PIXELS = 4
_ERODE_KERNEL = np.ones((3, 3), np.uint8)

# each channel quantizes independently to {0,128,255}, so a color is a
# base-3 code; matching nearest-level within tolerance is equivalent to the
# per-role L-inf test because levels sit further apart than 2*tolerance
_GRID_LEVELS = np.array((0, 128, 255), dtype=np.int16)
_PALETTE_CODES = np.array(
    [(b > 63) * 9 + (g > 63) * 3 + (r > 63) + (b > 191) * 9 + (g > 191) * 3 + (r > 191)
     for b, g, r in MARKER_PALETTE.astype(int)],
    dtype=np.int16,
)


def marker_color(role: int) -> tuple[int, int, int]:
    """BGR paint color for a role index (0..21)."""
    b, g, r = MARKER_PALETTE[role]
    return (int(b), int(g), int(r))


def _groups_from_points(points: dict[int, Point]) -> dict | None:
    groups: dict = {}
    for name, base in ROLE_GROUPS:
        if name.endswith("_eye"):
            # the wire format has no partial sextet: all six or nothing
            if all(base + i in points for i in range(6)):
                groups[name] = {k: points[base + i] for i, k in enumerate(EYE_KEYS)}
        else:
            if all(base + i in points for i in range(5)):
                groups[name] = {
                    "c": points[base],
                    "r": [points[base + i] for i in range(1, 5)],
                }
    return groups or None


class MarkerDotDetector:
    """Locates role-coded marker dots in synthetic frames.

    Pixels are classified to a palette color when every channel sits within
    MATCH_TOLERANCE; one erosion then drops edge pixels, so ringing from
    block codecs cannot leak neighbours into a centroid.
    """

    def detect(self, frame: np.ndarray) -> dict | None:
        img = frame.astype(np.int16)
        level = (img > 63).astype(np.int16) + (img > 191)
        near = np.abs(img - _GRID_LEVELS[level])
        within = (near <= MATCH_TOLERANCE).all(axis=2)
        code = level[..., 0] * 9 + level[..., 1] * 3 + level[..., 2]
        points: dict[int, Point] = {}
        for role in range(ROLE_COUNT):
            mask = (within & (code == _PALETTE_CODES[role])).astype(np.uint8)
            mask = cv2.erode(mask, _ERODE_KERNEL)
            ys, xs = np.nonzero(mask)
            if xs.size >= MIN_MARKER_PIXELS:
                points[role] = (float(xs.mean()), float(ys.mean()))
        return _groups_from_points(points)

    def close(self) -> None:
        pass


class MediaPipeFaceMesh:
    """Off-the-shelf face mesh with iris refinement, remapped to wire roles.

    Requires the optional mediapipe dependency; constructing without it
    raises DetectorUnavailable so callers can fail with a clean exit.
    """

    def __init__(
        self,
        static_image_mode: bool = False,
        min_detection_confidence: float = 0.5,
    ):
        try:
            import mediapipe as mp
        except ImportError as exc:
            raise DetectorUnavailable(
                "mediapipe is not installed; pip install landmark-adapter[mediapipe]"
            ) from exc
        self._mesh = mp.solutions.face_mesh.FaceMesh(
            static_image_mode=static_image_mode,
            max_num_faces=1,
            refine_landmarks=True,
            min_detection_confidence=min_detection_confidence,
        )

    def detect(self, frame: np.ndarray) -> dict | None:
        h, w = frame.shape[:2]
        result = self._mesh.process(cv2.cvtColor(frame, cv2.COLOR_BGR2RGB))
        faces = result.multi_face_landmarks
        if not faces:
            return None
        lm = faces[0].landmark

        def px(i: int) -> Point:
            return (lm[i].x * w, lm[i].y * h)

        groups: dict = {
            "right_eye": {k: px(i) for k, i in zip(EYE_KEYS, RIGHT_EYE_MESH)},
            "left_eye": {k: px(i) for k, i in zip(EYE_KEYS, LEFT_EYE_MESH)},
        }
        if len(lm) > LEFT_IRIS_MESH[1][-1]:  # refinement present
            for name, (center, ring) in (
                ("right_iris", RIGHT_IRIS_MESH),
                ("left_iris", LEFT_IRIS_MESH),
            ):
                groups[name] = {"c": px(center), "r": [px(i) for i in ring]}
        return groups

    def close(self) -> None:
        self._mesh.close()


DETECTOR_CHOICES = ("mediapipe", "marker")


def make_detector(name: str, *, static_image_mode: bool = False):
    if name == "mediapipe":
        return MediaPipeFaceMesh(static_image_mode=static_image_mode)
    if name == "marker":
        return MarkerDotDetector()
    raise ValueError(f"unknown detector {name!r}; choose from {DETECTOR_CHOICES}")
