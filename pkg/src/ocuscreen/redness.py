"""Hyperemia screening: luminance-weighted a* statistics over the scleral
mask, mapped onto a [0,10] score with sigma-propagated bounds.

No white balance runs here; the score endpoints (a* 120 and 150 in 8-bit
offset units) are calibration constants, exposed as parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .colorspace import Bgr8Image, bgr_to_lab8
from .errors import InsufficientSclera
from .imgproc import scleral_mask_luminance
from .utils import DISCLAIMER

A_LOW = 120.0
A_HIGH = 150.0
MIN_MASK_PIXELS = 50

# Midpoint boundaries close the gaps in the decimal banding (2.0-2.1 etc.);
# the severe band starts strictly above its boundary so the most alarming
# label is never assigned at the edge.
BANDS = (
    (2.05, "normal", "within normal range"),
    (4.05, "mild", "monitor"),
    (7.05, "moderate", "seek evaluation"),
    (float("inf"), "severe", "seek prompt ophthalmic care"),
)
SEVERE_BOUNDARY = 7.05


@dataclass(frozen=True)
class RednessResult:
    weighted_mean_a: float
    sigma_a: float
    score: float
    score_lo: float
    score_hi: float
    mask_pixels: int
    triage_band: str
    triage_guidance: str


def redness_score(mean_a: float, low: float = A_LOW, high: float = A_HIGH) -> float:
    span = high - low
    return 10.0 * min(1.0, max(0.0, (mean_a - low) / span))


def redness_triage(score: float) -> tuple[str, str]:
    if not 0.0 <= score <= 10.0:
        raise ValueError("score must lie in [0,10]")
    for top, band, guidance in BANDS:
        if score < top or (top == SEVERE_BOUNDARY and score == top):
            return band, guidance
    return BANDS[-1][1], BANDS[-1][2]


def redness_from_stats(
    mean_a: float,
    sigma_a: float,
    mask_pixels: int,
    low: float = A_LOW,
    high: float = A_HIGH,
) -> RednessResult:
    score = redness_score(mean_a, low, high)
    lo = redness_score(mean_a - sigma_a, low, high)
    hi = redness_score(mean_a + sigma_a, low, high)
    band, guidance = redness_triage(score)
    return RednessResult(
        weighted_mean_a=mean_a,
        sigma_a=sigma_a,
        score=score,
        score_lo=lo,
        score_hi=hi,
        mask_pixels=mask_pixels,
        triage_band=band,
        triage_guidance=guidance,
    )


def analyze_redness(
    img: Bgr8Image,
    low: float = A_LOW,
    high: float = A_HIGH,
    min_pixels: int = MIN_MASK_PIXELS,
) -> dict:
    """Mask the sclera, weight a* by luminance, and score; wire payload out.

    The mean is weighted by L; sigma is the unweighted spread of a* about
    that weighted mean (the bounds deliberately reuse it asymmetrically).
    """
    lab = bgr_to_lab8(img)
    mask = scleral_mask_luminance(lab)
    if mask.pixel_count < min_pixels:
        raise InsufficientSclera(
            f"scleral mask holds {mask.pixel_count} px; need {min_pixels} "
            "(retake with better framing or lighting)"
        )
    sel = mask.data
    weights = lab.l_plane[sel].astype(np.float64)
    a_vals = lab.a_plane[sel].astype(np.float64)
    wsum = float(weights.sum())
    mean_a = float((weights * a_vals).sum() / wsum) if wsum > 0 else float(a_vals.mean())
    sigma_a = float(np.sqrt(np.mean((a_vals - mean_a) ** 2)))
    result = redness_from_stats(mean_a, sigma_a, mask.pixel_count, low, high)
    return {
        "module": "redness",
        "weighted_mean_a": result.weighted_mean_a,
        "sigma_a": result.sigma_a,
        "score": result.score,
        "score_lo": result.score_lo,
        "score_hi": result.score_hi,
        "mask_pixels": result.mask_pixels,
        "triage": {
            "band": result.triage_band,
            "guidance": result.triage_guidance,
            "display": f"{result.score:.2f}/10 ({result.triage_band}, {result.triage_guidance})",
        },
        "disclaimer": DISCLAIMER,
    }
