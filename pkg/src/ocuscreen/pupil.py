"""Pupil light reflex characterization from pupil-to-iris-ratio series.

PIR = 2*rho_iris / eye_width is distance-invariant, so a PIR drop after a
light stimulus carries amplitude, latency, and velocity information without
absolute calibration. Latency here is time-to-minimum against the stimulus
clock; the optional exponential fit recovers the decay onset and time
constant independently of that clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyBaseline, NoConvergence, NoLandmarks, TooShort
from .ingest import LandmarkTrace
from .utils import DISCLAIMER

T_STIM_DEFAULT = 3.0
BASELINE_END_S = 1.5
MIN_BASELINE_FRAMES = 3
QUALITY_FIT_GATE = 0.8
RESP_GATE_PCT = 5.0
MIN_FIT_FRAMES = 8
FIT_INIT_TAU_S = 0.3
FIT_STEP_TOL = 1e-8
FIT_MAX_ITER = 200
# the fit limb starts once PIR has given up 5% of the full constriction,
# keeping the pre-onset plateau out of the decay model's domain
FIT_ONSET_DROP = 0.05


@dataclass(frozen=True)
class IrisFrameLandmarks:
    """One frame's iris geometry: center, four ring points, both canthi."""

    center: tuple[float, float]
    ring: tuple[tuple[float, float], ...]
    outer_canthus: tuple[float, float]
    inner_canthus: tuple[float, float]
    detected: bool = True

    def __post_init__(self):
        if self.detected:
            if self.outer_canthus == self.inner_canthus:
                raise ValueError("canthi must be distinct")
            if any(tuple(p) == tuple(self.center) for p in self.ring):
                raise ValueError("ring points must be distinct from the center")


@dataclass(frozen=True)
class PirSeries:
    """Per-frame PIR with detection flags; values are meaningful only where
    detected. Eye widths ride along for the stability quality term."""

    values: tuple[float, ...]
    fps: float
    eye_widths: tuple[float, ...]
    detected_flags: tuple[bool, ...]

    def __post_init__(self):
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        n = len(self.values)
        if len(self.eye_widths) != n or len(self.detected_flags) != n:
            raise ValueError("series fields must share one length")
        for v, ok in zip(self.values, self.detected_flags):
            if ok and not 0.0 < v < 1.0:
                raise ValueError(f"detected PIR {v} outside (0,1)")

    @property
    def frame_count(self) -> int:
        return len(self.values)

    @property
    def duration_s(self) -> float:
        return len(self.values) / self.fps

    def times(self) -> np.ndarray:
        return np.arange(len(self.values)) / self.fps


@dataclass(frozen=True)
class PlrMetrics:
    pir_base: float
    pir_min: float
    delta: float
    delta_rel_pct: float
    latency_ms: float
    v_mean: float | None  # PIR per millisecond; None when latency is zero
    v_max: float  # PIR per second
    t_stim: float
    quality: float
    q_detect: float
    q_stable: float
    q_resp: float
    fit: tuple[float, float, float] | None  # (L_ms_fit, tau_s, residual)


def pir(frame: IrisFrameLandmarks) -> float:
    """PIR = 2 * mean ring-to-center distance / inter-canthal width."""
    if not frame.detected:
        raise NoLandmarks("frame has no iris landmarks")
    c = np.array(frame.center)
    rho = float(np.mean([np.linalg.norm(np.array(p) - c) for p in frame.ring]))
    width = float(
        np.linalg.norm(np.array(frame.outer_canthus) - np.array(frame.inner_canthus))
    )
    if width == 0:
        raise NoLandmarks("degenerate canthi: zero eye width")
    return 2.0 * rho / width


def _frame_iris(frame, eye: str) -> IrisFrameLandmarks | None:
    iris = frame.left_iris if eye == "left" else frame.right_iris
    eyelm = frame.left_eye if eye == "left" else frame.right_eye
    if not frame.detected or iris is None or eyelm is None:
        return None
    return IrisFrameLandmarks(
        center=iris.c,
        ring=iris.r,
        outer_canthus=eyelm.p1,
        inner_canthus=eyelm.p4,
    )


def pir_series_from_trace(trace: LandmarkTrace) -> tuple[PirSeries, str]:
    """Build the PIR series from the eye with the higher detection fraction
    (right wins ties); returns (series, eye label)."""
    counts = {}
    for eye in ("left", "right"):
        counts[eye] = sum(1 for f in trace.frames if _frame_iris(f, eye) is not None)
    eye = "right" if counts["right"] >= counts["left"] else "left"

    values, widths, flags = [], [], []
    for frame in trace.frames:
        lm = _frame_iris(frame, eye)
        if lm is None:
            values.append(0.0)
            widths.append(0.0)
            flags.append(False)
        else:
            values.append(pir(lm))
            widths.append(
                float(
                    np.linalg.norm(
                        np.array(lm.outer_canthus) - np.array(lm.inner_canthus)
                    )
                )
            )
            flags.append(True)
    return (
        PirSeries(
            values=tuple(values),
            fps=trace.fps,
            eye_widths=tuple(widths),
            detected_flags=tuple(flags),
        ),
        eye,
    )


def _baseline_end_index(fps: float) -> int:
    return int(math.floor(BASELINE_END_S * fps + 1e-9))


def segment(series: PirSeries, t_stim: float = T_STIM_DEFAULT) -> tuple[float, float, int]:
    """Baseline mean over t in [3/fps, 1.5 s]; minimum searched from 1.5 s on.

    The search start is fixed at 1.5 s regardless of t_stim; a minimum found
    before the stimulus simply yields a negative latency downstream.
    """
    if series.duration_s <= BASELINE_END_S:
        raise TooShort(
            f"series spans {series.duration_s:.3f} s; need more than {BASELINE_END_S} s"
        )
    t = series.times()
    base_idx = [
        k
        for k in range(series.frame_count)
        if series.detected_flags[k] and 3.0 / series.fps - 1e-12 <= t[k] <= BASELINE_END_S + 1e-12
    ]
    if len(base_idx) < MIN_BASELINE_FRAMES:
        raise EmptyBaseline(
            f"baseline window holds {len(base_idx)} detected frames; need {MIN_BASELINE_FRAMES}"
        )
    pir_base = float(np.mean([series.values[k] for k in base_idx]))

    search = [
        k
        for k in range(series.frame_count)
        if series.detected_flags[k] and t[k] >= BASELINE_END_S - 1e-12
    ]
    if not search:
        raise TooShort("no detected frames at or after 1.5 s")
    k_star = min(search, key=lambda k: (series.values[k], k))
    return pir_base, float(series.values[k_star]), k_star


def quality(series: PirSeries, delta_rel_pct: float) -> tuple[float, float, float, float]:
    """Q = mean of detection fraction, width stability, and response gate."""
    n = series.frame_count
    q_detect = sum(series.detected_flags) / n if n else 0.0
    widths = [w for w, ok in zip(series.eye_widths, series.detected_flags) if ok]
    if widths:
        mean_w = float(np.mean(widths))
        q_stable = 1.0 - min(1.0, max(0.0, float(np.std(widths)) / mean_w)) if mean_w > 0 else 0.0
    else:
        q_stable = 0.0
    q_resp = 1.0 if delta_rel_pct > RESP_GATE_PCT else 0.0
    return (q_detect + q_stable + q_resp) / 3.0, q_detect, q_stable, q_resp


def _model(t: np.ndarray, l_ms: float, tau: float, base: float, floor: float, t_stim: float) -> np.ndarray:
    u = t - t_stim - l_ms / 1000.0
    return floor + (base - floor) * np.exp(-u / tau)


def fit_exponential(
    series: PirSeries,
    pir_base: float,
    pir_min: float,
    k_star: int,
    t_stim: float,
) -> tuple[float, float, float]:
    """Levenberg-Marquardt fit of (L_ms, tau) to the constriction limb.

    Base and floor stay fixed from segmentation. The limb runs from the
    first frame that has dropped 5% of the constriction through the
    minimum; undetected frames inside it are linearly interpolated.
    Returns (L_ms_fit, tau_s, sum of squared residuals).
    """
    t = series.times()
    delta = pir_base - pir_min
    if delta <= 0:
        raise NoConvergence("no constriction to fit")
    gate = pir_base - FIT_ONSET_DROP * delta
    start = None
    for k in range(k_star + 1):
        if series.detected_flags[k] and t[k] >= t_stim - 1e-12 and series.values[k] <= gate:
            start = k
            break
    if start is None:
        raise NoConvergence("constriction onset not found after the stimulus")
    idx = np.arange(start, k_star + 1)
    if len(idx) < MIN_FIT_FRAMES:
        raise NoConvergence(
            f"constriction limb has {len(idx)} frames; need {MIN_FIT_FRAMES}"
        )

    flags = np.array([series.detected_flags[k] for k in idx])
    vals = np.array([series.values[k] for k in idx], dtype=np.float64)
    if not flags.all():
        known = np.nonzero(flags)[0]
        vals = np.interp(np.arange(len(idx)), known, vals[known])
    tt = t[idx]

    l_ms = max((t[k_star] - t_stim) / 2.0 * 1000.0, 1e-3)
    tau = FIT_INIT_TAU_S
    amp = pir_base - pir_min

    def residuals(l_val: float, tau_val: float) -> np.ndarray:
        return vals - _model(tt, l_val, tau_val, pir_base, pir_min, t_stim)

    lam = 1e-3
    r = residuals(l_ms, tau)
    sse = float(r @ r)
    converged = False
    for _ in range(FIT_MAX_ITER):
        u = tt - t_stim - l_ms / 1000.0
        expo = np.exp(-u / tau)
        # d model / d L_ms and d model / d tau
        j = np.column_stack([amp * expo / (1000.0 * tau), amp * expo * u / tau**2])
        g = j.T @ r
        h = j.T @ j
        step = None
        for _ in range(30):
            try:
                step = np.linalg.solve(h + lam * np.diag(np.diag(h)) + 1e-15 * np.eye(2), g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            cand_l, cand_tau = l_ms + step[0], tau + step[1]
            if cand_tau <= 1e-6:
                lam *= 10.0
                continue
            r_new = residuals(cand_l, cand_tau)
            sse_new = float(r_new @ r_new)
            if sse_new <= sse:
                l_ms, tau, r, sse = cand_l, cand_tau, r_new, sse_new
                lam = max(lam / 10.0, 1e-12)
                break
            lam *= 10.0
        else:
            break
        if step is not None and float(np.linalg.norm(step)) < FIT_STEP_TOL:
            converged = True
            break
    if not converged:
        raise NoConvergence("fit did not converge within the iteration budget")
    return float(l_ms), float(tau), sse


def plr_metrics(series: PirSeries, t_stim: float = T_STIM_DEFAULT) -> PlrMetrics:
    """Segment the waveform and derive every reflex metric plus quality."""
    pir_base, pir_min, k_star = segment(series, t_stim)
    t = series.times()
    delta = pir_base - pir_min
    delta_rel = (delta / pir_base) * 100.0 if pir_base > 0 else 0.0
    latency_ms = (t[k_star] - t_stim) * 1000.0

    v_mean: float | None
    if latency_ms == 0:
        v_mean = None
    else:
        v_mean = delta / latency_ms

    # the difference index runs strictly past the baseline window; its left
    # neighbor may touch the window's last frame
    k_end = _baseline_end_index(series.fps)
    v_max = 0.0
    for k in range(k_end + 1, series.frame_count):
        if series.detected_flags[k] and k >= 1 and series.detected_flags[k - 1]:
            v_max = max(v_max, abs(series.values[k] - series.values[k - 1]) * series.fps)

    q, q_detect, q_stable, q_resp = quality(series, delta_rel)
    fit = None
    if q >= QUALITY_FIT_GATE:
        try:
            fit = fit_exponential(series, pir_base, pir_min, k_star, t_stim)
        except NoConvergence:
            fit = None
    return PlrMetrics(
        pir_base=pir_base,
        pir_min=pir_min,
        delta=delta,
        delta_rel_pct=delta_rel,
        latency_ms=latency_ms,
        v_mean=v_mean,
        v_max=v_max,
        t_stim=t_stim,
        quality=q,
        q_detect=q_detect,
        q_stable=q_stable,
        q_resp=q_resp,
        fit=fit,
    )


def analyze_pupil(trace: LandmarkTrace, t_stim: float = T_STIM_DEFAULT) -> dict:
    """Full pipeline over a landmark trace; returns the wire payload."""
    series, eye = pir_series_from_trace(trace)
    m = plr_metrics(series, t_stim=t_stim)
    fit_doc = None
    if m.fit is not None:
        fit_doc = {"latency_ms": m.fit[0], "tau_s": m.fit[1], "residual": m.fit[2]}
    t = series.times()
    return {
        "module": "pupil",
        "eye": eye,
        "pir_base": m.pir_base,
        "pir_min": m.pir_min,
        "delta": m.delta,
        "delta_rel_pct": m.delta_rel_pct,
        "latency_ms": m.latency_ms,
        "v_mean_pir_per_ms": m.v_mean,
        "v_max_pir_per_s": m.v_max,
        "t_stim_s": m.t_stim,
        "quality": {
            "q": m.quality,
            "detect": m.q_detect,
            "stable": m.q_stable,
            "resp": m.q_resp,
        },
        "fit": fit_doc,
        "units_note": "v_mean in PIR/ms, v_max in PIR/s",
        "series": {
            "t": [float(x) for x in t],
            "pir": [v if ok else None for v, ok in zip(series.values, series.detected_flags)],
            "detected": list(series.detected_flags),
        },
        "disclaimer": DISCLAIMER,
    }
