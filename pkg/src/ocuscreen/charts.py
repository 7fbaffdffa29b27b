"""Minimal dependency-free SVG line charts for EAR and PIR series."""

from __future__ import annotations

from html import escape

WIDTH = 720
HEIGHT = 320
MARGIN = 48


def _scale(values: list[float], lo: float, hi: float, out_lo: float, out_hi: float):
    span = hi - lo if hi > lo else 1.0
    return [(out_lo + (v - lo) / span * (out_hi - out_lo)) for v in values]


def render_series_svg(
    t: list[float],
    values: list[float | None],
    title: str,
    y_label: str,
    hline: float | None = None,
    hline_label: str = "",
    vline: float | None = None,
    vline_label: str = "",
) -> str:
    """Single-series line chart; gaps (None values) break the polyline.

    hline draws a horizontal marker (e.g. a detection threshold), vline a
    vertical one (e.g. the stimulus time).
    """
    pairs = [(tv, v) for tv, v in zip(t, values) if v is not None]
    if not pairs:
        raise ValueError("no plottable points")
    ts = [p[0] for p in pairs]
    vs = [p[1] for p in pairs]
    t_lo, t_hi = min(ts), max(ts)
    v_candidates = vs + ([hline] if hline is not None else [])
    v_lo, v_hi = min(v_candidates), max(v_candidates)
    pad = 0.05 * (v_hi - v_lo if v_hi > v_lo else 1.0)
    v_lo -= pad
    v_hi += pad

    def xpix(x: float) -> float:
        return _scale([x], t_lo, t_hi, MARGIN, WIDTH - MARGIN)[0]

    def ypix(y: float) -> float:
        return _scale([y], v_lo, v_hi, HEIGHT - MARGIN, MARGIN)[0]

    segments: list[list[str]] = [[]]
    for tv, v in zip(t, values):
        if v is None:
            if segments[-1]:
                segments.append([])
            continue
        segments[-1].append(f"{xpix(tv):.2f},{ypix(v):.2f}")

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="16">'
        f"{escape(title)}</text>",
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" '
        'stroke="black"/>',
        f'<text x="12" y="{HEIGHT / 2}" font-size="12" '
        f'transform="rotate(-90 12 {HEIGHT / 2})" text-anchor="middle">'
        f"{escape(y_label)}</text>",
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" font-size="12" '
        'text-anchor="middle">time (s)</text>',
        f'<text x="{MARGIN}" y="{HEIGHT - MARGIN + 16}" font-size="10">{t_lo:.2f}</text>',
        f'<text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 16}" font-size="10" '
        f'text-anchor="end">{t_hi:.2f}</text>',
        f'<text x="{MARGIN - 4}" y="{HEIGHT - MARGIN}" font-size="10" '
        f'text-anchor="end">{v_lo:.3f}</text>',
        f'<text x="{MARGIN - 4}" y="{MARGIN + 4}" font-size="10" '
        f'text-anchor="end">{v_hi:.3f}</text>',
    ]
    for seg in segments:
        if len(seg) >= 2:
            parts.append(
                f'<polyline fill="none" stroke="#3355aa" stroke-width="1.5" '
                f'points="{" ".join(seg)}"/>'
            )
    if hline is not None:
        y = ypix(hline)
        parts.append(
            f'<line x1="{MARGIN}" y1="{y:.2f}" x2="{WIDTH - MARGIN}" y2="{y:.2f}" '
            'stroke="#aa3333" stroke-dasharray="6,4"/>'
        )
        if hline_label:
            parts.append(
                f'<text x="{WIDTH - MARGIN - 4}" y="{y - 4:.2f}" font-size="10" '
                f'fill="#aa3333" text-anchor="end">{escape(hline_label)}</text>'
            )
    if vline is not None and t_lo <= vline <= t_hi:
        x = xpix(vline)
        parts.append(
            f'<line x1="{x:.2f}" y1="{MARGIN}" x2="{x:.2f}" y2="{HEIGHT - MARGIN}" '
            'stroke="#338833" stroke-dasharray="6,4"/>'
        )
        if vline_label:
            parts.append(
                f'<text x="{x + 4:.2f}" y="{MARGIN + 12}" font-size="10" '
                f'fill="#338833">{escape(vline_label)}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts)
