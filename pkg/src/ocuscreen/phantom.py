"""Synthetic ground-truth generators: EAR traces, PIR traces, and raster
eye images with known geometry.

Landmark traces are built from a canonical eye template with a 100 px
horizontal span, scaled so the analysis formulas reproduce the target
waveform to within a couple of ulps. Raster phantoms provide a white
sclera, a dark antialiased iris disk, an optional lesion wedge colored to
pass the lesion gates, an optional uniform scleral tint, and (on request)
a mid-gray balance strip that zeroes out gray-world gains so tints survive
the white-balance stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .colorspace import RGB_TO_XYZ, D65_XN, D65_YN, D65_ZN, LAB_EPS, Bgr8Image, bgr_to_lab8
from .errors import InvalidSpec
from .ingest import EyeLandmarks, FrameRecord, IrisLandmarks, LandmarkTrace
from .pupil import IrisFrameLandmarks
from .utils import round_half_away, to_uint8

EYE_SPAN_PX = 100.0
SCLERA_BGR = (235.0, 235.0, 235.0)
IRIS_BGR = (55.0, 45.0, 40.0)
LESION_BGR = (215.0, 235.0, 240.0)
# mid-gray strip base leaves symmetric headroom for channel compensation
# while staying below every brightness gate (L8 of 128-gray is about 137)
STRIP_BASE = 127.5
# decay runs 9 time constants before the redilation limb, leaving the
# sampled minimum within 1.3e-4 of the model floor; the fit pins its floor
# to that sampled minimum, so the gap also bounds the noise-free fit
# residual (must stay below 1e-6 summed over the limb)
DECAY_SPAN_TAUS = 9.0


def _eye_template(ear: float, origin: tuple[float, float]) -> EyeLandmarks:
    """Eye landmarks whose EAR equals `ear` up to float rounding."""
    ox, oy = origin
    gap = EYE_SPAN_PX * ear
    half = gap / 2.0
    return EyeLandmarks(
        p1=(ox, oy),
        p2=(ox + 35.0, oy - half),
        p3=(ox + 65.0, oy - half),
        p4=(ox + EYE_SPAN_PX, oy),
        p5=(ox + 65.0, oy + half),
        p6=(ox + 35.0, oy + half),
    )


def _iris_template(pir_value: float, origin: tuple[float, float]) -> IrisLandmarks:
    """Iris landmarks whose PIR (against the template canthi) equals
    `pir_value` up to float rounding."""
    ox, oy = origin
    cx = ox + EYE_SPAN_PX / 2.0
    rho = pir_value * (EYE_SPAN_PX / 2.0)
    return IrisLandmarks(
        c=(cx, oy),
        r=((cx + rho, oy), (cx, oy + rho), (cx - rho, oy), (cx, oy - rho)),
    )


def synth_ear_trace(
    fps: float,
    duration_s: float,
    blink_times: list[float],
    baseline: float = 0.3,
    dip: float = 0.05,
    dip_frames: int | None = None,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> tuple[LandmarkTrace, int]:
    """Bilateral EAR trace with rectangular dips at the given times.

    Ground truth is the number of requested dips, whether or not each is
    long enough for the detector's minimum run length.
    """
    if fps <= 0 or duration_s <= 0:
        raise InvalidSpec("fps and duration must be positive")
    if dip >= baseline:
        raise InvalidSpec("dip level must sit below the baseline")
    n = int(round_half_away(duration_s * fps))
    if dip_frames is None:
        dip_frames = max(2, int(round_half_away(0.1 * fps)))
    if dip_frames < 1:
        raise InvalidSpec("dip_frames must be at least 1")

    spans = []
    for tb in sorted(blink_times):
        if not 0.0 <= tb < duration_s:
            raise InvalidSpec(f"blink time {tb} outside [0, {duration_s})")
        k0 = int(round_half_away(tb * fps))
        k1 = k0 + dip_frames
        if k1 > n:
            raise InvalidSpec(f"blink at {tb}s does not fit in the trace")
        if spans and k0 <= spans[-1][1]:
            raise InvalidSpec("blink dips overlap or touch; separate them")
        spans.append((k0, k1))

    values = np.full(n, baseline, dtype=np.float64)
    for k0, k1 in spans:
        values[k0:k1] = dip
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        values = values + rng.normal(0.0, noise_sigma, size=n)
    values = np.maximum(values, 0.0)

    frames = []
    for k in range(n):
        e = float(values[k])
        frames.append(
            FrameRecord(
                index=k,
                detected=True,
                left_eye=_eye_template(e, (0.0, 0.0)),
                right_eye=_eye_template(e, (200.0, 0.0)),
            )
        )
    trace = LandmarkTrace(fps=float(fps), frame_count=n, frames=tuple(frames))
    return trace, len(blink_times)


def pir_waveform(
    t: np.ndarray,
    base: float,
    floor: float,
    tau_s: float,
    latency_ms: float,
    t_stim: float,
    t_min: float,
) -> np.ndarray:
    """Plateau, exponential constriction, then a slower redilation limb.

    The constriction follows the decay model from the onset (stimulus plus
    latency) until t_min; redilation rises back toward the plateau with
    twice the time constant, so the sampled minimum is unique at t_min.
    """
    t_onset = t_stim + latency_ms / 1000.0
    amp = base - floor
    out = np.full_like(t, base, dtype=np.float64)
    dec = (t >= t_onset) & (t <= t_min)
    out[dec] = floor + amp * np.exp(-(t[dec] - t_onset) / tau_s)
    m_star = floor + amp * math.exp(-(t_min - t_onset) / tau_s)
    re = t > t_min
    out[re] = base - (base - m_star) * np.exp(-(t[re] - t_min) / (2.0 * tau_s))
    return out


def synth_pir_trace(
    fps: float,
    duration_s: float,
    base: float,
    min_pir: float,
    tau_s: float,
    latency_ms: float,
    t_stim: float = 3.0,
    noise_sigma: float = 0.0,
    seed: int = 0,
    dropout_frames: tuple[int, ...] = (),
) -> tuple[LandmarkTrace, dict]:
    """PIR trace realized through landmark geometry, plus ground truth.

    The returned params carry both the model inputs and the grid-snapped
    quantities the engine should recover: t_min_s (sampled minimum time),
    expected_pir_min, expected_delta, and expected_latency_ms measured
    against the time of the minimum.
    """
    if fps <= 0 or duration_s <= 0:
        raise InvalidSpec("fps and duration must be positive")
    if not 0.0 < min_pir <= base < 1.0:
        raise InvalidSpec("need 0 < min <= base < 1")
    if tau_s <= 0:
        raise InvalidSpec("tau must be positive")
    n = int(round_half_away(duration_s * fps))
    t = np.arange(n) / fps

    flat = min_pir == base
    if flat:
        values = np.full(n, base, dtype=np.float64)
        k_min = int(np.searchsorted(t, 1.5, side="left"))
        t_min = float(t[min(k_min, n - 1)])
        m_star = base
    else:
        t_onset = t_stim + latency_ms / 1000.0
        if t_onset >= duration_s:
            raise InvalidSpec("stimulus plus latency falls outside the trace")
        k_min = int(round_half_away((t_onset + DECAY_SPAN_TAUS * tau_s) * fps))
        if k_min >= n:
            raise InvalidSpec(
                "trace too short for the constriction to bottom out; "
                "extend duration or shrink tau"
            )
        t_min = float(t[k_min])
        values = pir_waveform(t, base, min_pir, tau_s, latency_ms, t_stim, t_min)
        amp = base - min_pir
        m_star = min_pir + amp * math.exp(-(t_min - t_onset) / tau_s)

    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        values = values + rng.normal(0.0, noise_sigma, size=n)
    values = np.clip(values, 1e-3, 0.999)

    dropouts = set(int(k) for k in dropout_frames)
    frames = []
    for k in range(n):
        if k in dropouts:
            frames.append(FrameRecord(index=k, detected=False))
            continue
        v = float(values[k])
        frames.append(
            FrameRecord(
                index=k,
                detected=True,
                left_eye=_eye_template(0.3, (0.0, 0.0)),
                right_eye=_eye_template(0.3, (200.0, 0.0)),
                left_iris=_iris_template(v, (0.0, 0.0)),
                right_iris=_iris_template(v, (200.0, 0.0)),
            )
        )
    trace = LandmarkTrace(fps=float(fps), frame_count=n, frames=tuple(frames))
    params = {
        "base": base,
        "min": min_pir,
        "tau_s": tau_s,
        "latency_ms": latency_ms,
        "t_stim": t_stim,
        "fps": fps,
        "k_min": k_min,
        "t_min_s": t_min,
        "expected_pir_min": m_star,
        "expected_delta": base - m_star,
        "expected_latency_ms": (t_min - t_stim) * 1000.0,
    }
    return trace, params


def _lab8_to_bgr(l8: float, a8: float, b8: float) -> tuple[float, float, float]:
    """Invert the 8-bit LAB storage scaling back to a BGR color (floats)."""
    l_star = l8 * 100.0 / 255.0
    a_star = a8 - 128.0
    b_star = b8 - 128.0
    fy = (l_star + 16.0) / 116.0
    fx = fy + a_star / 500.0
    fz = fy - b_star / 200.0

    def f_inv(f: float) -> float:
        t = f**3
        if t > LAB_EPS:
            return t
        return 3.0 * (6.0 / 29.0) ** 2 * (f - 4.0 / 29.0)

    xyz = np.array([f_inv(fx) * D65_XN, f_inv(fy) * D65_YN, f_inv(fz) * D65_ZN])
    rgb_lin = np.linalg.solve(RGB_TO_XYZ, xyz)
    rgb = np.where(
        rgb_lin <= 0.0031308,
        12.92 * rgb_lin,
        1.055 * np.clip(rgb_lin, 0.0, None) ** (1.0 / 2.4) - 0.055,
    )
    rgb = np.clip(rgb * 255.0, 0.0, 255.0)
    return (float(rgb[2]), float(rgb[1]), float(rgb[0]))


@dataclass(frozen=True)
class LesionWedge:
    """Wedge crossing the limbus: from outer_extent_px outside the iris
    boundary down to max_penetration_px inside it."""

    theta_center: float
    theta_width: float
    max_penetration_px: float
    color: tuple[float, float, float] = LESION_BGR
    outer_extent_px: float = 14.0


def synth_eye_image(
    width: int,
    height: int,
    iris_center: tuple[float, float],
    iris_radius_px: float,
    lesion_spec: LesionWedge | None = None,
    scleral_tint: tuple[float, float] | None = None,
    balanced: bool = False,
    strip_rows: int | None = None,
) -> tuple[Bgr8Image, dict]:
    """Raster eye phantom with exact geometric ground truth."""
    cx, cy = iris_center
    r = float(iris_radius_px)
    if r <= 0:
        raise InvalidSpec("iris radius must be positive")
    margin = r + (lesion_spec.outer_extent_px if lesion_spec else 0.0)
    if not (margin <= cx <= width - margin and margin <= cy <= height - margin):
        raise InvalidSpec("iris (plus lesion) does not fit in the frame")
    if lesion_spec is not None:
        if lesion_spec.max_penetration_px <= 0:
            raise InvalidSpec("lesion penetration must be positive")
        if lesion_spec.max_penetration_px > 0.33 * r:
            raise InvalidSpec("lesion penetration exceeds the analysis band")

    sclera = np.array(SCLERA_BGR)
    if scleral_tint is not None:
        da, db = scleral_tint
        base_lab = bgr_to_lab8(
            Bgr8Image(np.full((1, 1, 3), SCLERA_BGR, dtype=np.float64).astype(np.uint8))
        ).data[0, 0].astype(np.float64)
        sclera = np.array(
            _lab8_to_bgr(base_lab[0], base_lab[1] + da, base_lab[2] + db)
        )

    canvas = np.empty((height, width, 3), dtype=np.float64)
    canvas[:, :] = sclera

    ys, xs = np.mgrid[0:height, 0:width]
    dist = np.hypot(xs - cx, ys - cy)
    # 1 px linear coverage ramp keeps Sobel gradients radial at the boundary
    alpha = np.clip(r + 0.5 - dist, 0.0, 1.0)
    canvas = alpha[:, :, None] * np.array(IRIS_BGR) + (1 - alpha[:, :, None]) * canvas

    if lesion_spec is not None:
        theta = np.arctan2(ys - cy, xs - cx)
        ang = np.abs(np.angle(np.exp(1j * (theta - lesion_spec.theta_center))))
        wedge = (
            (ang <= lesion_spec.theta_width / 2.0)
            & (dist >= r - lesion_spec.max_penetration_px)
            & (dist <= r + lesion_spec.outer_extent_px)
        )
        canvas[wedge] = np.array(lesion_spec.color)

    strip_h = 0
    if balanced:
        strip_h = strip_rows if strip_rows is not None else max(4, height // 5)
        if lesion_spec is not None:
            clearance = cy - r - lesion_spec.outer_extent_px
        else:
            clearance = cy - r
        if strip_h >= clearance:
            raise InvalidSpec("balance strip would overlap the iris region")
        canvas[:strip_h, :] = STRIP_BASE
        n_strip = strip_h * width
        sums = canvas.reshape(-1, 3).sum(axis=0)
        target = float(sums.mean())
        strip_color = STRIP_BASE + (target - sums) / n_strip
        if np.any(strip_color < 0) or np.any(strip_color > 255):
            raise InvalidSpec(
                "balance strip color out of gamut; enlarge strip_rows or reduce tint"
            )
        canvas[:strip_h, :] = strip_color

    img = Bgr8Image(to_uint8(canvas))
    sclera_lab = bgr_to_lab8(
        Bgr8Image(to_uint8(np.full((1, 1, 3), sclera)))
    ).data[0, 0]
    landmarks = IrisFrameLandmarks(
        center=(cx, cy),
        ring=((cx + r, cy), (cx, cy + r), (cx - r, cy), (cx, cy - r)),
        outer_canthus=(cx - 1.8 * r, cy),
        inner_canthus=(cx + 1.8 * r, cy),
    )
    truth = {
        "center": (cx, cy),
        "radius_px": r,
        "landmarks": landmarks,
        "sclera_bgr": tuple(float(v) for v in sclera),
        "sclera_lab": tuple(int(v) for v in sclera_lab),
        "strip_rows": strip_h,
        "lesion": None,
    }
    if lesion_spec is not None:
        truth["lesion"] = {
            "theta_center": lesion_spec.theta_center,
            "theta_width": lesion_spec.theta_width,
            "max_penetration_px": lesion_spec.max_penetration_px,
        }
    return img, truth


def synth_disks(
    width: int, height: int, disks: list[tuple[float, float, float]]
) -> Bgr8Image:
    """White field with dark antialiased disks; exercises the circle search."""
    canvas = np.full((height, width, 3), 255.0)
    ys, xs = np.mgrid[0:height, 0:width]
    for cx, cy, r in disks:
        dist = np.hypot(xs - cx, ys - cy)
        alpha = np.clip(r + 0.5 - dist, 0.0, 1.0)
        canvas = alpha[:, :, None] * np.array([40.0, 40.0, 40.0]) + (
            1 - alpha[:, :, None]
        ) * canvas
    return Bgr8Image(to_uint8(canvas))
