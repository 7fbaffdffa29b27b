"""Blink counting and rate estimation from eye-aspect-ratio series.

EAR per eye is the mean vertical lid gap over the horizontal fissure width;
the bilateral mean damps one-sided occlusion. Counting runs on a causally
smoothed series against a threshold set from the first ~1.5 s baseline
(median minus alpha sigma), with an fps-adaptive minimum run length. The
rate carries an exact Poisson 95% CI from chi-square quantiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from .errors import NoLandmarks, NonPositiveDuration, TooShort
from .ingest import EyeLandmarks, LandmarkTrace
from .utils import DISCLAIMER, round_half_away

DEFAULT_ALPHA = 2.0
SMOOTH_WINDOW_S = 0.04
BASELINE_S = 1.5
MIN_BLINK_S = 0.033
# rates in [20, 20.5] resolve to the normal band; only strictly above 20.5
# counts as the irritation stratum
NORMAL_BAND_TOP = 20.5

STRATA = (
    ("high-risk", "high dry-eye risk; consider clinical evaluation"),
    ("elevated", "mildly reduced blink rate; monitor"),
    ("normal", "within the typical adult range"),
    ("elevated-irritation", "elevated rate suggests irritation reflex; consider re-recording"),
)


@dataclass(frozen=True)
class EarSeries:
    """Ordered EAR values with capture timing.

    values holds frames where landmarks were detected; duration_s stays on
    the wall clock (total captured frames / fps) so dropouts do not inflate
    rates. With no dropouts, duration_s == len(values)/fps.
    """

    values: tuple[float, ...]
    fps: float
    duration_s: float

    def __post_init__(self):
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if any(v < 0 for v in self.values):
            raise ValueError("EAR values must be non-negative")
        if self.duration_s < 0:
            raise ValueError("duration must be non-negative")


@dataclass(frozen=True)
class BlinkResult:
    blink_count: int
    rate_bpm: float
    ci_lo_bpm: float
    ci_hi_bpm: float
    threshold: float
    baseline_median: float
    baseline_sigma: float
    min_frames: int
    smooth_window: int
    alpha: float
    stratum: str


def ear_single(eye: EyeLandmarks) -> float:
    p = np.array(eye.points())
    vertical = np.linalg.norm(p[1] - p[5]) + np.linalg.norm(p[2] - p[4])
    horizontal = np.linalg.norm(p[0] - p[3])
    if horizontal == 0:
        raise NoLandmarks("degenerate eye landmarks: zero fissure width")
    return float(vertical / (2.0 * horizontal))


def ear_bilateral(left: EyeLandmarks | None, right: EyeLandmarks | None) -> float:
    """Mean of the detected eyes' EAR; single-eye value when one is missing."""
    if left is None and right is None:
        raise NoLandmarks("no eye landmarks in frame")
    if left is None:
        return ear_single(right)
    if right is None:
        return ear_single(left)
    return (ear_single(left) + ear_single(right)) / 2.0


def ear_series_from_trace(trace: LandmarkTrace) -> EarSeries:
    """Per-frame bilateral EAR; undetected frames are dropped from the
    series but still count toward wall-clock duration."""
    values = []
    for frame in trace.frames:
        if not frame.detected:
            continue
        if frame.left_eye is None and frame.right_eye is None:
            continue
        values.append(ear_bilateral(frame.left_eye, frame.right_eye))
    return EarSeries(
        values=tuple(values), fps=trace.fps, duration_s=trace.duration_s
    )


def smooth_window(fps: float) -> int:
    return max(1, int(round_half_away(SMOOTH_WINDOW_S * fps)))


def smooth(series: EarSeries) -> EarSeries:
    """Causal moving average, window truncated at the sequence start.

    Windows of identical values pass through bit-exact; a running-sum
    formulation would leak rounding noise into flat spans and the
    sigma-scaled threshold would then sit at float-noise scale.
    """
    w = smooth_window(series.fps)
    if w == 1 or not series.values:
        return series
    vals = np.asarray(series.values)
    out = np.empty(len(vals))
    for k in range(len(vals)):
        lo = max(0, k - w + 1)
        window = vals[lo : k + 1]
        out[k] = window[0] if np.all(window == window[0]) else float(window.mean())
    return EarSeries(values=tuple(out.tolist()), fps=series.fps, duration_s=series.duration_s)


def baseline_frames(fps: float) -> int:
    return int(round_half_away(BASELINE_S * fps))


def adaptive_threshold(
    series: EarSeries, alpha: float = DEFAULT_ALPHA
) -> tuple[float, float, float]:
    """Threshold = median(baseline) - alpha * sample std about that median.

    The baseline is the first round(1.5*fps) smoothed values; the median
    keeps a blink inside the window from dragging the center down.
    """
    n_b = baseline_frames(series.fps)
    if len(series.values) < n_b:
        raise TooShort(
            f"series has {len(series.values)} frames; baseline needs {n_b}"
        )
    base = np.asarray(series.values[:n_b])
    mu = float(np.median(base))
    if n_b > 1:
        sigma = float(math.sqrt(np.sum((base - mu) ** 2) / (n_b - 1)))
    else:
        sigma = 0.0
    return mu - alpha * sigma, mu, sigma


def min_run_frames(fps: float) -> int:
    return max(2, int(round_half_away(MIN_BLINK_S * fps)))


def detect_blinks(series: EarSeries, tau: float) -> int:
    """Count maximal strictly-below-threshold runs of at least F_min frames."""
    f_min = min_run_frames(series.fps)
    count = 0
    run = 0
    for v in series.values:
        if v < tau:
            run += 1
            if run == f_min:
                count += 1
        else:
            run = 0
    return count


def blink_rate_ci(b: int, t_seconds: float) -> tuple[float, float, float]:
    """Blink rate in bpm with the exact Poisson 95% CI.

    ci_lo = chi2.ppf(0.025, 2B)/2 * 60/T (0 when B = 0);
    ci_hi = chi2.ppf(0.975, 2B+2)/2 * 60/T.
    """
    if t_seconds <= 0:
        raise NonPositiveDuration("duration must be positive")
    if b < 0:
        raise ValueError("count must be non-negative")
    scale = 60.0 / t_seconds
    rate = b * scale
    lo = 0.0 if b == 0 else float(chi2.ppf(0.025, 2 * b)) / 2.0 * scale
    hi = float(chi2.ppf(0.975, 2 * b + 2)) / 2.0 * scale
    return rate, lo, hi


def blink_stratum(rate_bpm: float) -> tuple[str, str]:
    if rate_bpm < 0:
        raise ValueError("rate must be non-negative")
    if rate_bpm < 8:
        return STRATA[0]
    if rate_bpm < 12:
        return STRATA[1]
    if rate_bpm <= NORMAL_BAND_TOP:
        return STRATA[2]
    return STRATA[3]


def analyze_blink(trace: LandmarkTrace, alpha: float = DEFAULT_ALPHA) -> dict:
    """Full pipeline over a landmark trace; returns the wire payload."""
    raw = ear_series_from_trace(trace)
    smoothed = smooth(raw)
    tau, mu, sigma = adaptive_threshold(smoothed, alpha=alpha)
    count = detect_blinks(smoothed, tau)
    rate, lo, hi = blink_rate_ci(count, raw.duration_s)
    band, guidance = blink_stratum(rate)
    result = BlinkResult(
        blink_count=count,
        rate_bpm=rate,
        ci_lo_bpm=lo,
        ci_hi_bpm=hi,
        threshold=tau,
        baseline_median=mu,
        baseline_sigma=sigma,
        min_frames=min_run_frames(raw.fps),
        smooth_window=smooth_window(raw.fps),
        alpha=alpha,
        stratum=band,
    )
    times = [f.index / trace.fps for f in trace.frames if f.detected and (f.left_eye or f.right_eye)]
    return {
        "module": "blink",
        "blink_count": result.blink_count,
        "rate_bpm": result.rate_bpm,
        "ci_lo_bpm": result.ci_lo_bpm,
        "ci_hi_bpm": result.ci_hi_bpm,
        "threshold": result.threshold,
        "baseline_median": result.baseline_median,
        "baseline_sigma": result.baseline_sigma,
        "min_frames": result.min_frames,
        "smooth_window": result.smooth_window,
        "alpha": result.alpha,
        "duration_s": raw.duration_s,
        "fps": raw.fps,
        "stratum": {
            "band": band,
            "guidance": guidance,
            "display": f"{result.blink_count} blinks, rate = {result.rate_bpm:.2f} bpm ({band})",
        },
        "series": {"t": times, "ear": list(smoothed.values)},
        "disclaimer": DISCLAIMER,
    }
