"""Scleral icterus and pallor indices.

Pipeline order matters: gray-world balance first, then LAB/HSV, then the
bright/low-saturation scleral mask, then unweighted statistics. The yellow
index reads the b* axis (128 neutral to 160 saturated); pallor combines
elevated L* and depressed a* into one [0,1] composite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .colorspace import Bgr8Image, ChannelGains, bgr_to_hsv8, bgr_to_lab8, gray_world_correct
from .errors import InsufficientSclera
from .imgproc import scleral_mask_three_gate
from .utils import DISCLAIMER

B_LOW = 128.0
B_HIGH = 160.0
L_TERM_LOW = 200.0
L_TERM_HIGH = 240.0
A_TERM_LOW = 120.0
A_TERM_HIGH = 140.0
MIN_MASK_PIXELS = 50
TRIAGE_THRESHOLD = 0.3


@dataclass(frozen=True)
class ColorIndexResult:
    yellow_index: float
    yellow_lo: float
    yellow_hi: float
    pallor_index: float
    mean_b: float
    sigma_b: float
    mean_l: float
    mean_a: float
    l_term: float
    a_term: float
    gains: ChannelGains
    mask_pixels: int


def _clip01(v: float) -> float:
    return min(1.0, max(0.0, v))


def yellow_index(mean_b: float) -> float:
    return _clip01((mean_b - B_LOW) / (B_HIGH - B_LOW))


def pallor_terms(mean_l: float, mean_a: float) -> tuple[float, float]:
    l_term = _clip01((mean_l - L_TERM_LOW) / (L_TERM_HIGH - L_TERM_LOW))
    a_term = 1.0 - _clip01((mean_a - A_TERM_LOW) / (A_TERM_HIGH - A_TERM_LOW))
    return l_term, a_term


def color_triage(index: float, kind: str, threshold: float = TRIAGE_THRESHOLD) -> str:
    if index < threshold:
        return f"{kind} index unremarkable"
    return f"{kind} index elevated; recommend clinical evaluation"


def analyze_color(
    img: Bgr8Image,
    min_pixels: int = MIN_MASK_PIXELS,
    triage_threshold: float = TRIAGE_THRESHOLD,
) -> dict:
    """Balance, mask, and index; returns the wire payload."""
    corrected, gains = gray_world_correct(img)
    lab = bgr_to_lab8(corrected)
    hsv = bgr_to_hsv8(corrected)
    mask = scleral_mask_three_gate(lab, hsv)
    if mask.pixel_count < min_pixels:
        raise InsufficientSclera(
            f"scleral mask holds {mask.pixel_count} px; need {min_pixels} "
            "(retake with better framing or lighting)"
        )
    sel = mask.data
    b_vals = lab.b_plane[sel].astype(np.float64)
    l_vals = lab.l_plane[sel].astype(np.float64)
    a_vals = lab.a_plane[sel].astype(np.float64)
    mean_b = float(b_vals.mean())
    sigma_b = float(np.sqrt(np.mean((b_vals - mean_b) ** 2)))
    mean_l = float(l_vals.mean())
    mean_a = float(a_vals.mean())

    y = yellow_index(mean_b)
    y_lo = yellow_index(mean_b - sigma_b)
    y_hi = yellow_index(mean_b + sigma_b)
    l_term, a_term = pallor_terms(mean_l, mean_a)
    pallor = 0.5 * l_term + 0.5 * a_term

    result = ColorIndexResult(
        yellow_index=y,
        yellow_lo=y_lo,
        yellow_hi=y_hi,
        pallor_index=pallor,
        mean_b=mean_b,
        sigma_b=sigma_b,
        mean_l=mean_l,
        mean_a=mean_a,
        l_term=l_term,
        a_term=a_term,
        gains=gains,
        mask_pixels=mask.pixel_count,
    )
    return {
        "module": "color",
        "yellow_index": result.yellow_index,
        "yellow_lo": result.yellow_lo,
        "yellow_hi": result.yellow_hi,
        "pallor_index": result.pallor_index,
        "mean_b": result.mean_b,
        "sigma_b": result.sigma_b,
        "mean_L": result.mean_l,
        "mean_a": result.mean_a,
        "L_term": result.l_term,
        "a_term": result.a_term,
        "gains": result.gains.as_dict(),
        "mask_pixels": result.mask_pixels,
        "triage": {
            "yellow": color_triage(result.yellow_index, "yellow", triage_threshold),
            "pallor": color_triage(result.pallor_index, "pallor", triage_threshold),
        },
        "disclaimer": DISCLAIMER,
    }
