"""Binary-mask toolbox: Otsu thresholding, square-kernel morphology, a
native circular Hough transform for iris localization, and the three mask
builders (luminance sclera, bright/low-saturation sclera, lesion).

Otsu runs in exact integer arithmetic (no float ties). Morphology treats
everything outside the raster as background for both dilation and erosion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .colorspace import Bgr8Image, Hsv8Image, Lab8Image
from .errors import ConstantImage, NoCircleFound
from .utils import round_half_away

HOUGH_SCORE_FLOOR = 0.25
HOUGH_EDGE_PERCENTILE = 90.0
HOUGH_RADIUS_CORRECTION = 1.05
HOUGH_SUPPORT_BAND = 1.5
LUM_MASK_FLOOR = 160
LUM_MASK_A_GATE = 160
THREE_GATE_L = 190
THREE_GATE_S = 60
LESION_L = 180
LESION_B = 140
LESION_S = 80
LESION_RED_HUE = ((0, 25), (155, 179))


@dataclass(frozen=True)
class BinaryMask:
    """Boolean raster plus an eagerly computed foreground count."""

    data: np.ndarray
    pixel_count: int = -1

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise ValueError(f"BinaryMask expects an HxW array, got {data.shape}")
        if data.dtype != np.bool_:
            data = data.astype(bool)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "pixel_count", int(data.sum()))
        data.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def complement(self) -> "BinaryMask":
        return BinaryMask(~self.data)


@dataclass(frozen=True)
class StructuringElement:
    """Square all-ones kernel; only 3x3 and 5x5 are used."""

    size: int

    def __post_init__(self):
        if self.size not in (3, 5):
            raise ValueError("structuring element size must be 3 or 5")

    @property
    def radius(self) -> int:
        return self.size // 2


K3 = StructuringElement(3)
K5 = StructuringElement(5)


def otsu_threshold(channel: np.ndarray) -> int:
    """Between-class-variance maximizing threshold on the 256-bin histogram.

    Classes are {v < t} and {v >= t}; among maximizers the lowest t wins.
    Exact integer arithmetic, so the result matches a rational-number scan
    bit for bit. Raises ConstantImage when every pixel is equal.
    """
    values = np.asarray(channel)
    if values.size == 0:
        raise ValueError("cannot threshold an empty raster")
    hist = np.bincount(values.reshape(-1).astype(np.int64), minlength=256)
    counts = [int(c) for c in hist]
    total = sum(counts)
    total_sum = sum(v * c for v, c in enumerate(counts))

    best_t = -1
    best_num = 0  # (s0*n1 - s1*n0)^2
    best_den = 1  # n0*n1
    n0 = 0
    s0 = 0
    for t in range(1, 256):
        n0 += counts[t - 1]
        s0 += (t - 1) * counts[t - 1]
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        s1 = total_sum - s0
        num = (s0 * n1 - s1 * n0) ** 2
        den = n0 * n1
        # strict > keeps the lowest maximizer
        if best_t < 0 or num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    if best_t < 0:
        raise ConstantImage("all pixels share one value; no threshold exists")
    return best_t


def _shift(mask: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """Shift a boolean raster, filling vacated cells with background."""
    out = np.zeros_like(mask)
    h, w = mask.shape
    ys = slice(max(dy, 0), h + min(dy, 0))
    xs = slice(max(dx, 0), w + min(dx, 0))
    ys_src = slice(max(-dy, 0), h + min(-dy, 0))
    xs_src = slice(max(-dx, 0), w + min(-dx, 0))
    out[ys, xs] = mask[ys_src, xs_src]
    return out


def dilate(mask: BinaryMask, k: StructuringElement) -> BinaryMask:
    r = k.radius
    acc = np.zeros(mask.shape, dtype=bool)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            acc |= _shift(mask.data, dy, dx)
    return BinaryMask(acc)


def erode(mask: BinaryMask, k: StructuringElement) -> BinaryMask:
    r = k.radius
    acc = np.ones(mask.shape, dtype=bool)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            acc &= _shift(mask.data, dy, dx)
    return BinaryMask(acc)


def close(mask: BinaryMask, k: StructuringElement) -> BinaryMask:
    return erode(dilate(mask, k), k)


def morph(mask: BinaryMask, op: str, k: StructuringElement) -> BinaryMask:
    table = {"dilate": dilate, "erode": erode, "close": close}
    if op not in table:
        raise ValueError(f"unknown morphology op {op!r}")
    return table[op](mask, k)


@dataclass(frozen=True)
class CircleEstimate:
    """Hough peak; radius already carries the +5% upward correction."""

    center: tuple[int, int]  # (x, y)
    radius: float
    accumulator_score: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")


def _sobel(gray: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    g = np.pad(gray.astype(np.float64), 1, mode="edge")
    gx = (
        (g[:-2, 2:] + 2.0 * g[1:-1, 2:] + g[2:, 2:])
        - (g[:-2, :-2] + 2.0 * g[1:-1, :-2] + g[2:, :-2])
    )
    gy = (
        (g[2:, :-2] + 2.0 * g[2:, 1:-1] + g[2:, 2:])
        - (g[:-2, :-2] + 2.0 * g[:-2, 1:-1] + g[:-2, 2:])
    )
    return gx, gy


def default_radius_range(width: int, height: int) -> tuple[float, float]:
    m = min(width, height)
    return 0.08 * m, 0.35 * m


def hough_iris(
    img: Bgr8Image, radius_range: tuple[float, float] | None = None
) -> CircleEstimate:
    """Gradient-voting circular Hough over integer radii.

    Edge pixels (Sobel magnitude at or above the 90th percentile of the
    nonzero magnitudes) vote along both gradient senses at each radius;
    the vote peak localizes a candidate center per radius. Each candidate
    is then scored by edge support: the count of edge pixels within
    HOUGH_SUPPORT_BAND px of the candidate circle, against the full-circle
    count 2*pi*r. Best score wins, lowest radius on ties. Raises
    NoCircleFound when the best score sits below the 0.25 floor.
    """
    data = img.data.astype(np.float64)
    gray = 0.114 * data[:, :, 0] + 0.587 * data[:, :, 1] + 0.299 * data[:, :, 2]
    h, w = gray.shape
    if radius_range is None:
        radius_range = default_radius_range(w, h)
    r_lo, r_hi = radius_range
    if not r_lo < r_hi:
        raise ValueError("radius range must satisfy min < max")
    if r_hi >= min(w, h) / 2:
        raise ValueError("radius range exceeds half the short image side")

    gx, gy = _sobel(gray)
    mag = np.hypot(gx, gy)
    nz = mag[mag > 0]
    if nz.size == 0:
        raise NoCircleFound("image has no intensity gradients")
    tau = np.percentile(nz, HOUGH_EDGE_PERCENTILE)
    ey, ex = np.nonzero(mag >= tau)
    ux = gx[ey, ex] / mag[ey, ex]
    uy = gy[ey, ex] / mag[ey, ex]

    best = None  # (score, radius, cx, cy)
    r_start = int(math.ceil(r_lo))
    r_end = int(math.floor(r_hi))
    for r in range(max(1, r_start), r_end + 1):
        votes = np.zeros((h, w), dtype=np.int64)
        for sense in (-1.0, 1.0):
            cx = round_half_away(ex + sense * r * ux).astype(np.int64)
            cy = round_half_away(ey + sense * r * uy).astype(np.int64)
            ok = (cx >= 0) & (cx < w) & (cy >= 0) & (cy < h)
            if ok.any():
                votes += np.bincount(
                    cy[ok] * w + cx[ok], minlength=h * w
                ).reshape(h, w)
        if not votes.any():
            continue
        # Rounding spreads one circle's votes over adjacent cells; localize
        # on the 3x3 neighborhood sum, then score by geometric support so
        # the rounding jitter cannot bleed votes out of the peak.
        padded = np.pad(votes, 1)
        win = sum(
            padded[dy : dy + h, dx : dx + w]
            for dy in range(3)
            for dx in range(3)
        )
        idx = int(win.argmax())
        ccx, ccy = idx % w, idx // w
        dist = np.hypot(ex - ccx, ey - ccy)
        support = int((np.abs(dist - r) <= HOUGH_SUPPORT_BAND).sum())
        score = support / (2.0 * math.pi * r)
        if best is None or score > best[0]:
            best = (score, r, ccx, ccy)
    if best is None or best[0] < HOUGH_SCORE_FLOOR:
        raise NoCircleFound("no circle reached the accumulator score floor")
    score, r, cx, cy = best
    return CircleEstimate(
        center=(cx, cy),
        radius=r * HOUGH_RADIUS_CORRECTION,
        accumulator_score=float(score),
    )


def scleral_mask_luminance(lab: Lab8Image) -> BinaryMask:
    """Bright, non-red pixels: L >= max(160, Otsu of L-plane) and a < 160.

    A constant L-plane falls back to the 160 floor instead of erroring.
    """
    try:
        tau = max(LUM_MASK_FLOOR, otsu_threshold(lab.l_plane))
    except ConstantImage:
        tau = LUM_MASK_FLOOR
    return BinaryMask((lab.l_plane >= tau) & (lab.a_plane < LUM_MASK_A_GATE))


def scleral_mask_three_gate(lab: Lab8Image, hsv: Hsv8Image) -> BinaryMask:
    """Very bright and desaturated pixels, gap-healed with a 3x3 close."""
    raw = BinaryMask((lab.l_plane >= THREE_GATE_L) & (hsv.s_plane <= THREE_GATE_S))
    return close(raw, K3)


def lesion_mask(lab: Lab8Image, hsv: Hsv8Image) -> BinaryMask:
    """Bright pixels that look yellow (b-plane) or red-hued, at low
    saturation; cleaned by dilate/erode with 3x3 then close with 5x5."""
    hue = hsv.h_plane
    red = np.zeros(hue.shape, dtype=bool)
    for lo, hi in LESION_RED_HUE:
        red |= (hue >= lo) & (hue <= hi)
    raw = (
        (lab.l_plane >= LESION_L)
        & ((lab.b_plane >= LESION_B) | red)
        & (hsv.s_plane <= LESION_S)
    )
    cleaned = erode(dilate(BinaryMask(raw), K3), K3)
    return close(cleaned, K5)
