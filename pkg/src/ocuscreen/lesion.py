"""Iris-calibrated lesion encroachment and longitudinal trend.

The iris radius doubles as a millimeter ruler through the population mean
visible iris diameter (11.8 mm, 95% band 10.7 to 12.9), so every distance
carries about +/-9.3% relative uncertainty. Encroachment is the maximal
inward penetration of lesion-mask pixels inside a near-limbus annular band
restricted to the horizontal sectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .colorspace import Bgr8Image, bgr_to_hsv8, bgr_to_lab8
from .errors import (
    DegenerateTimeAxis,
    NoCircleFound,
    NoIrisFound,
    NonMonotonicTimestamps,
)
from .imgproc import hough_iris, lesion_mask
from .pupil import IrisFrameLandmarks
from .utils import DISCLAIMER

HVID_REF_MM = 11.8
HVID_LO_MM = 10.7
HVID_HI_MM = 12.9
BAND_LO_FRAC = 0.65
BAND_HI_FRAC = 0.98
SECTOR_HALF_ANGLE = 4.0 * math.pi / 9.0  # 80 degrees
SECTOR_MIRROR_ANGLE = math.pi - SECTOR_HALF_ANGLE  # 100 degrees
TRACE_THRESHOLD_MM = 0.5
TREND_BAND_MM = 0.2
GROWTH_SIGNIFICANT_MM_PER_DAY = 0.005
SECONDS_PER_DAY = 86400.0


@dataclass(frozen=True)
class IrisCalibration:
    center: tuple[float, float]
    radius_px: float
    lambda_mm_per_px: float
    lambda_lo: float
    lambda_hi: float
    epsilon_rel: float
    source: str  # "landmarks" | "hough"

    def __post_init__(self):
        if self.radius_px <= 0:
            raise ValueError("iris radius must be positive")
        if not self.lambda_lo < self.lambda_mm_per_px < self.lambda_hi:
            raise ValueError("lambda bounds must bracket lambda")
        if self.source not in ("landmarks", "hough"):
            raise ValueError("source must be landmarks or hough")


@dataclass(frozen=True)
class LesionMeasurement:
    d_px: float
    d_mm: float
    d_lo_mm: float
    d_hi_mm: float
    status: str  # absent | trace | present
    lesion_pixels_in_band: int
    calibration: IrisCalibration
    captured_at: str  # ISO 8601 UTC


@dataclass(frozen=True)
class TrendAssessment:
    delta_mm: float
    delta_days: float
    label: str  # increased | stable | decreased
    growth_mm_per_day: float | None = None
    significant: bool | None = None


def _calibration_from_radius(center, radius_px: float, source: str) -> IrisCalibration:
    lam = HVID_REF_MM / (2.0 * radius_px)
    lam_lo = HVID_LO_MM / (2.0 * radius_px)
    lam_hi = HVID_HI_MM / (2.0 * radius_px)
    eps = (lam_hi - lam_lo) / (2.0 * lam)
    return IrisCalibration(
        center=(float(center[0]), float(center[1])),
        radius_px=float(radius_px),
        lambda_mm_per_px=lam,
        lambda_lo=lam_lo,
        lambda_hi=lam_hi,
        epsilon_rel=eps,
        source=source,
    )


def calibrate(
    img: Bgr8Image,
    landmarks: IrisFrameLandmarks | None = None,
    radius_range: tuple[float, float] | None = None,
) -> IrisCalibration:
    """Millimeter calibration from iris landmarks, else the Hough fallback.

    The Hough radius already carries its +5% correction; landmark radii are
    taken as-is (ring points sit on the visible boundary).
    """
    if landmarks is not None and landmarks.detected:
        c = np.array(landmarks.center)
        rho = float(np.mean([np.linalg.norm(np.array(p) - c) for p in landmarks.ring]))
        return _calibration_from_radius(landmarks.center, rho, "landmarks")
    try:
        circle = hough_iris(img, radius_range)
    except NoCircleFound as exc:
        raise NoIrisFound(
            "no iris landmarks and the circle search found nothing; capture rejected"
        ) from exc
    return _calibration_from_radius(circle.center, circle.radius, "hough")


def _utc_now_iso() -> str:
    # microsecond precision matches the session store's timestamps, so a
    # follow-up capture in the same second still sorts after its history
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def _parse_ts(ts: str) -> datetime:
    parsed = datetime.fromisoformat(ts.replace("Z", "+00:00"))
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed


def measure(
    img: Bgr8Image,
    calib: IrisCalibration,
    sector: str = "clinical",
    captured_at: str | None = None,
) -> LesionMeasurement:
    """Maximal inward penetration of lesion pixels in the analysis band.

    sector="clinical" unions the two horizontal sectors (|theta| <= 80 or
    >= 100 degrees); "literal" keeps only the first.
    """
    if sector not in ("clinical", "literal"):
        raise ValueError("sector must be clinical or literal")
    lab = bgr_to_lab8(img)
    hsv = bgr_to_hsv8(img)
    lesions = lesion_mask(lab, hsv)

    h, w = lesions.shape
    ys, xs = np.mgrid[0:h, 0:w]
    cx, cy = calib.center
    rho = np.hypot(xs - cx, ys - cy)
    theta = np.arctan2(ys - cy, xs - cx)
    band = (rho >= BAND_LO_FRAC * calib.radius_px) & (rho <= BAND_HI_FRAC * calib.radius_px)
    sector_mask = np.abs(theta) <= SECTOR_HALF_ANGLE
    if sector == "clinical":
        sector_mask |= np.abs(theta) >= SECTOR_MIRROR_ANGLE
    analysis = band & sector_mask & lesions.data

    pixels = int(analysis.sum())
    if pixels > 0:
        d_px = float(np.max(calib.radius_px - rho[analysis]))
    else:
        d_px = 0.0
    d_mm = d_px * calib.lambda_mm_per_px
    d_lo = d_px * calib.lambda_lo
    d_hi = d_px * calib.lambda_hi
    if pixels == 0 or d_px == 0.0:
        status = "absent"
    elif d_mm < TRACE_THRESHOLD_MM:
        status = "trace"
    else:
        status = "present"
    return LesionMeasurement(
        d_px=d_px,
        d_mm=d_mm,
        d_lo_mm=d_lo,
        d_hi_mm=d_hi,
        status=status,
        lesion_pixels_in_band=pixels,
        calibration=calib,
        captured_at=captured_at or _utc_now_iso(),
    )


def _trend_from_pairs(
    prev_ts: str, prev_mm: float, cur_ts: str, cur_mm: float
) -> TrendAssessment:
    t_prev = _parse_ts(prev_ts)
    t_cur = _parse_ts(cur_ts)
    if not t_prev < t_cur:
        raise NonMonotonicTimestamps(
            f"previous capture {prev_ts} is not before {cur_ts}"
        )
    delta_mm = cur_mm - prev_mm
    delta_days = (t_cur - t_prev).total_seconds() / SECONDS_PER_DAY
    if delta_mm > TREND_BAND_MM:
        label = "increased"
    elif delta_mm < -TREND_BAND_MM:
        label = "decreased"
    else:
        label = "stable"
    return TrendAssessment(delta_mm=delta_mm, delta_days=delta_days, label=label)


def trend_step(prev: LesionMeasurement, cur: LesionMeasurement) -> TrendAssessment:
    """Consecutive-session comparison with the +/-0.2 mm stability band."""
    return _trend_from_pairs(prev.captured_at, prev.d_mm, cur.captured_at, cur.d_mm)


def growth_rate(history: list[tuple[str, float]]) -> tuple[float, bool]:
    """OLS slope of d_mm against time in days over >= 3 measurements.

    history is (ISO timestamp, d_mm) pairs; significance requires the slope
    to exceed 0.005 mm/day strictly.
    """
    if len(history) < 3:
        raise ValueError("growth rate needs at least 3 measurements")
    times = np.array(
        [_parse_ts(ts).timestamp() / SECONDS_PER_DAY for ts, _ in history]
    )
    values = np.array([d for _, d in history], dtype=np.float64)
    t_centered = times - times.mean()
    denom = float((t_centered**2).sum())
    if denom == 0:
        raise DegenerateTimeAxis("all measurements share one timestamp")
    slope = float((t_centered * (values - values.mean())).sum() / denom)
    return slope, slope > GROWTH_SIGNIFICANT_MM_PER_DAY


def analyze_lesion(
    img: Bgr8Image,
    landmarks: IrisFrameLandmarks | None = None,
    sector: str = "clinical",
    history: list[tuple[str, float]] | None = None,
    captured_at: str | None = None,
    radius_range: tuple[float, float] | None = None,
) -> dict:
    """Calibrate, measure, and fold in session history; wire payload out.

    history is prior (timestamp, d_mm) pairs in capture order; the current
    measurement extends it for the trend step and the growth fit.
    """
    calib = calibrate(img, landmarks=landmarks, radius_range=radius_range)
    m = measure(img, calib, sector=sector, captured_at=captured_at)

    trend_doc = None
    growth_doc = None
    if history:
        prev_ts, prev_d = history[-1]
        trend = _trend_from_pairs(prev_ts, prev_d, m.captured_at, m.d_mm)
        trend_doc = {
            "delta_mm": trend.delta_mm,
            "delta_days": trend.delta_days,
            "label": trend.label,
        }
        full = list(history) + [(m.captured_at, m.d_mm)]
        if len(full) >= 3:
            slope, significant = growth_rate(full)
            growth_doc = {"mm_per_day": slope, "significant": significant}

    return {
        "module": "lesion",
        "d_px": m.d_px,
        "d_mm": m.d_mm,
        "d_lo_mm": m.d_lo_mm,
        "d_hi_mm": m.d_hi_mm,
        "status": m.status,
        "lesion_pixels_in_band": m.lesion_pixels_in_band,
        "calibration": {
            "center": [calib.center[0], calib.center[1]],
            "radius_px": calib.radius_px,
            "lambda_mm_per_px": calib.lambda_mm_per_px,
            "lambda_lo": calib.lambda_lo,
            "lambda_hi": calib.lambda_hi,
            "epsilon_rel": calib.epsilon_rel,
            "source": calib.source,
        },
        "sector_mode": sector,
        "trend": trend_doc,
        "growth": growth_doc,
        "display": f"distance from limbus = {m.d_mm:g} mm ({m.status})",
        "disclaimer": DISCLAIMER,
    }
