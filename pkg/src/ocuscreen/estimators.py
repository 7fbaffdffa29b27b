"""Estimator-style wrappers over the pipelines.

Each analyzer is a stateless scikit-learn compatible estimator: parameters
are constructor arguments (so get_params/set_params and grid search work),
fit is a no-op that returns self, predict maps a batch of inputs to the
module's headline scalar, and analyze returns the full wire payload for a
single input. Inputs may be raw arrays, file bytes, or paths; the
validation helpers below normalize them.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator

from .blink import DEFAULT_ALPHA, analyze_blink
from .color_indices import MIN_MASK_PIXELS, TRIAGE_THRESHOLD, analyze_color
from .colorspace import Bgr8Image
from .ingest import LandmarkTrace, decode_photo, load_trace
from .lesion import analyze_lesion
from .pupil import T_STIM_DEFAULT, analyze_pupil
from .redness import analyze_redness

ImageLike = "Bgr8Image | np.ndarray | bytes | str | Path"
TraceLike = "LandmarkTrace | bytes | str | Path"


def as_image(x) -> Bgr8Image:
    """Coerce an image-like input: BGR uint8 array, encoded bytes, or path."""
    if isinstance(x, Bgr8Image):
        return x
    if isinstance(x, np.ndarray):
        return Bgr8Image(np.ascontiguousarray(x))
    if isinstance(x, bytes):
        return decode_photo(x)
    if isinstance(x, (str, Path)):
        return decode_photo(Path(x).read_bytes())
    raise TypeError(f"cannot interpret {type(x).__name__} as an image")


def as_trace(x) -> LandmarkTrace:
    """Coerce a trace-like input: parsed trace, JSONL bytes, or path."""
    if isinstance(x, LandmarkTrace):
        return x
    if isinstance(x, bytes):
        return load_trace(x)
    if isinstance(x, (str, Path)):
        return load_trace(Path(x).read_bytes())
    raise TypeError(f"cannot interpret {type(x).__name__} as a landmark trace")


class _StatelessAnalyzer(BaseEstimator):
    """Shared no-op fit; analyzers hold no learned state."""

    def fit(self, X=None, y=None):
        return self

    def analyze(self, x) -> dict:
        raise NotImplementedError

    def _headline(self, payload: dict) -> float:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        return np.array([self._headline(self.analyze(x)) for x in X])

    def transform(self, X) -> np.ndarray:
        return self.predict(X).reshape(-1, 1)


class RednessAnalyzer(_StatelessAnalyzer):
    """Conjunctival redness score (0-10) from a scleral photo."""

    def analyze(self, x) -> dict:
        return analyze_redness(as_image(x))

    def _headline(self, payload: dict) -> float:
        return payload["score"]


class ColorIndexAnalyzer(_StatelessAnalyzer):
    """Scleral yellowing and pallor indices from a photo."""

    def __init__(
        self,
        min_pixels: int = MIN_MASK_PIXELS,
        triage_threshold: float = TRIAGE_THRESHOLD,
    ):
        self.min_pixels = min_pixels
        self.triage_threshold = triage_threshold

    def analyze(self, x) -> dict:
        return analyze_color(
            as_image(x),
            min_pixels=self.min_pixels,
            triage_threshold=self.triage_threshold,
        )

    def _headline(self, payload: dict) -> float:
        return payload["yellow_index"]

    def transform(self, X) -> np.ndarray:
        rows = []
        for x in X:
            p = self.analyze(x)
            rows.append((p["yellow_index"], p["pallor_index"]))
        return np.array(rows)


class BlinkAnalyzer(_StatelessAnalyzer):
    """Blink rate (blinks/min) from a landmark trace."""

    def __init__(self, alpha: float = DEFAULT_ALPHA):
        self.alpha = alpha

    def analyze(self, x) -> dict:
        return analyze_blink(as_trace(x), alpha=self.alpha)

    def _headline(self, payload: dict) -> float:
        return payload["rate_bpm"]


class PupilAnalyzer(_StatelessAnalyzer):
    """Pupil light reflex metrics from a landmark trace."""

    def __init__(self, t_stim: float = T_STIM_DEFAULT):
        self.t_stim = t_stim

    def analyze(self, x) -> dict:
        return analyze_pupil(as_trace(x), t_stim=self.t_stim)

    def _headline(self, payload: dict) -> float:
        return payload["delta_rel_pct"]


class LesionAnalyzer(_StatelessAnalyzer):
    """Lesion encroachment distance (mm) from an anterior-segment photo."""

    def __init__(self, sector: str = "clinical"):
        self.sector = sector

    def analyze(self, x) -> dict:
        return analyze_lesion(as_image(x), sector=self.sector)

    def _headline(self, payload: dict) -> float:
        return payload["d_mm"]
