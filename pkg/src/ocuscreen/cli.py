"""Operator command line: run pipelines on local files, manage sessions,
regenerate synthetic fixtures, and launch the HTTP service.

Exit codes: 0 success, 1 engine error (machine code printed to stderr),
2 usage error (argparse). The --out payload is canonical JSON and matches
the HTTP response body for the same input byte for byte.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import charts, phantom
from .errors import EngineError, ValidationFailed
from .ingest import encode_png, serialize_trace
from .sessions import SessionStore, render_report, render_report_html
from .service import run_analysis, serve
from .utils import canonical_json

MODULE_CHOICES = ("redness", "blink", "pupil", "color", "lesion")


def _store(args) -> SessionStore:
    root = args.store or os.environ.get("DATA_DIR", "./ocuscreen_data")
    return SessionStore(Path(root))


def _write_payload(path: str | None, payload) -> None:
    if path:
        Path(path).write_text(canonical_json(payload) + "\n", encoding="utf-8")


def _summary(module: str, p: dict) -> str:
    if module == "redness":
        return f"redness: {p['triage']['display']}"
    if module == "blink":
        return f"blink: {p['stratum']['display']}"
    if module == "pupil":
        lat = "n/a" if p["latency_ms"] is None else f"{p['latency_ms']:.1f} ms"
        return (
            f"pupil: delta_rel = {p['delta_rel_pct']:.2f}%, latency = {lat}, "
            f"Q = {p['quality']['q']:.2f}"
        )
    if module == "color":
        return (
            f"color: yellow_index = {p['yellow_index']:.3f}, "
            f"pallor_index = {p['pallor_index']:.3f}"
        )
    return f"lesion: {p['display']}"


def _emit_svg(module: str, payload: dict, svg_path: str) -> None:
    series = payload.get("series")
    if not series:
        raise ValidationFailed("svg", f"module {module} emits no series to plot")
    if module == "blink":
        svg = charts.render_series_svg(
            series["t"],
            series["ear"],
            title="Eye aspect ratio",
            y_label="EAR",
            hline=payload["threshold"],
            hline_label="blink threshold",
        )
    else:
        svg = charts.render_series_svg(
            series["t"],
            series["pir"],
            title="Pupil-iris ratio",
            y_label="PIR",
            vline=payload["t_stim_s"],
            vline_label="stimulus",
        )
    Path(svg_path).write_text(svg, encoding="utf-8")


def _cmd_analyze(args) -> int:
    file_bytes = Path(args.input).read_bytes()
    landmarks_bytes = Path(args.landmarks).read_bytes() if args.landmarks else None
    history = None
    store = None
    if args.session:
        store = _store(args)
        store.get_session(args.session)
        if args.module == "lesion":
            history = store.lesion_history(args.session)
    payload = run_analysis(
        args.module,
        file_bytes,
        t_stim=args.t_stim,
        alpha=args.alpha,
        sector=args.sector,
        landmarks_bytes=landmarks_bytes,
        lesion_history=history,
    )
    if store is not None:
        store.append_result(args.session, args.module, payload)
    _write_payload(args.out, payload)
    if args.svg:
        _emit_svg(args.module, payload, args.svg)
    print(_summary(args.module, payload))
    print(payload["disclaimer"])
    return 0


def _cmd_session(args) -> int:
    store = _store(args)
    if args.action == "create":
        intake = json.loads(Path(args.intake).read_text(encoding="utf-8"))
        doc = store.create_session(intake)
        print(doc["id"])
        _write_payload(args.out, doc)
        return 0
    if args.action == "list":
        rows = store.list_sessions()
        for row in rows:
            print(f"{row['id']}  {row['created_at']}  modules={','.join(row['modules']) or '-'}")
        if not rows:
            print("(no sessions)")
        _write_payload(args.out, rows)
        return 0
    if args.action == "show":
        doc = store.get_session(args.id)
        print(canonical_json(doc))
        _write_payload(args.out, doc)
        return 0
    report = render_report(store, args.id)
    out = Path(args.out) if args.out else Path(f"report-{args.id}.json")
    out.write_text(canonical_json(report) + "\n", encoding="utf-8")
    html_path = out.with_suffix(".html")
    html_path.write_text(render_report_html(report), encoding="utf-8")
    print(f"wrote {out} and {html_path}")
    return 0


def _floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip() != ""]


def _cmd_phantom(args) -> int:
    if args.generator == "ear-trace":
        trace, truth = phantom.synth_ear_trace(
            fps=args.fps,
            duration_s=args.duration,
            blink_times=_floats(args.blinks) if args.blinks else [],
            baseline=args.baseline,
            dip=args.dip,
            dip_frames=args.dip_frames,
            noise_sigma=args.noise,
            seed=args.seed,
        )
        Path(args.out).write_bytes(serialize_trace(trace))
        _write_payload(args.truth, {"blink_count": truth})
        print(f"wrote {args.out} ({trace.frame_count} frames, {truth} blinks)")
        return 0
    if args.generator == "pir-trace":
        trace, params = phantom.synth_pir_trace(
            fps=args.fps,
            duration_s=args.duration,
            base=args.base,
            min_pir=args.min,
            tau_s=args.tau,
            latency_ms=args.latency_ms,
            t_stim=args.t_stim,
            noise_sigma=args.noise,
            seed=args.seed,
            dropout_frames=tuple(int(k) for k in _floats(args.dropouts or "")),
        )
        Path(args.out).write_bytes(serialize_trace(trace))
        _write_payload(args.truth, params)
        print(f"wrote {args.out} ({trace.frame_count} frames)")
        return 0
    cx, cy = _floats(args.center)
    wedge = None
    if args.wedge:
        theta_c, theta_w, depth = _floats(args.wedge)
        wedge = phantom.LesionWedge(theta_c, theta_w, depth)
    tint = None
    if args.tint:
        da, db = _floats(args.tint)
        tint = (da, db)
    img, truth = phantom.synth_eye_image(
        width=args.width,
        height=args.height,
        iris_center=(cx, cy),
        iris_radius_px=args.radius,
        lesion_spec=wedge,
        scleral_tint=tint,
        balanced=args.balanced,
    )
    Path(args.out).write_bytes(encode_png(img))
    # the landmark entry is a dataclass; flatten it for the JSON sidecar
    truth_json = {
        k: (dataclasses.asdict(v) if dataclasses.is_dataclass(v) else v)
        for k, v in truth.items()
    }
    _write_payload(args.truth, truth_json)
    print(f"wrote {args.out} ({args.width}x{args.height})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ocuscreen",
        description="Deterministic ophthalmic screening toolkit (screening only; not diagnostic).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    an = sub.add_parser("analyze", help="run one pipeline on a local file")
    an.add_argument("module", choices=MODULE_CHOICES)
    an.add_argument("--input", required=True, help="photo (redness/color/lesion) or JSONL trace (blink/pupil)")
    an.add_argument("--out", help="write the full payload as canonical JSON")
    an.add_argument("--session", help="append the result to this session")
    an.add_argument("--store", help="session store directory (default $DATA_DIR or ./ocuscreen_data)")
    an.add_argument("--t-stim", dest="t_stim", type=float, help="stimulus time in seconds (pupil)")
    an.add_argument("--alpha", type=float, help="threshold sensitivity (blink)")
    an.add_argument("--sector", choices=("clinical", "literal"), help="lesion sector geometry")
    an.add_argument("--landmarks", help="single-frame trace for lesion iris calibration")
    an.add_argument("--svg", help="write a line chart of the series (blink/pupil)")
    an.set_defaults(func=_cmd_analyze)

    se = sub.add_parser("session", help="manage the session store")
    se_sub = se.add_subparsers(dest="action", required=True)
    se_create = se_sub.add_parser("create", help="create a session from an intake JSON file")
    se_create.add_argument("--intake", required=True)
    se_list = se_sub.add_parser("list", help="list sessions, newest first")
    se_show = se_sub.add_parser("show", help="print one session document")
    se_show.add_argument("id")
    se_report = se_sub.add_parser("report", help="write the JSON report and an HTML rendering next to it")
    se_report.add_argument("id")
    for p in (se_create, se_list, se_show, se_report):
        p.add_argument("--store")
        p.add_argument("--out")
    se.set_defaults(func=_cmd_session)

    ph = sub.add_parser("phantom", help="generate synthetic fixtures with known ground truth")
    ph_sub = ph.add_subparsers(dest="generator", required=True)
    ear = ph_sub.add_parser("ear-trace", help="blink waveform as a landmark trace")
    ear.add_argument("--fps", type=float, default=30.0)
    ear.add_argument("--duration", type=float, default=10.0)
    ear.add_argument("--blinks", default="", help="comma-separated blink times in seconds")
    ear.add_argument("--baseline", type=float, default=0.3)
    ear.add_argument("--dip", type=float, default=0.05)
    ear.add_argument("--dip-frames", dest="dip_frames", type=int, default=None)
    ear.add_argument("--noise", type=float, default=0.0)
    ear.add_argument("--seed", type=int, default=0)
    pir = ph_sub.add_parser("pir-trace", help="pupil response waveform as a landmark trace")
    pir.add_argument("--fps", type=float, default=30.0)
    pir.add_argument("--duration", type=float, default=8.0)
    pir.add_argument("--base", type=float, default=0.5)
    pir.add_argument("--min", type=float, default=0.35)
    pir.add_argument("--tau", type=float, default=0.4)
    pir.add_argument("--latency-ms", dest="latency_ms", type=float, default=250.0)
    pir.add_argument("--t-stim", dest="t_stim", type=float, default=3.0)
    pir.add_argument("--noise", type=float, default=0.0)
    pir.add_argument("--seed", type=int, default=0)
    pir.add_argument("--dropouts", default="", help="comma-separated frame indices marked undetected")
    eye = ph_sub.add_parser("eye-image", help="raster eye with optional lesion wedge and tint")
    eye.add_argument("--width", type=int, default=400)
    eye.add_argument("--height", type=int, default=300)
    eye.add_argument("--center", default="200,150", help="iris center as x,y")
    eye.add_argument("--radius", type=float, default=80.0)
    eye.add_argument("--wedge", help="lesion wedge as theta_center,theta_width,penetration_px (radians)")
    eye.add_argument("--tint", help="uniform scleral tint as delta_a,delta_b")
    eye.add_argument("--balanced", action="store_true", help="add a strip equalizing channel means")
    for p in (ear, pir, eye):
        p.add_argument("--out", required=True)
        p.add_argument("--truth", help="write generator ground truth as JSON")
    ph.set_defaults(func=_cmd_phantom)

    sv = sub.add_parser("serve", help="start the HTTP service")
    sv.add_argument("--host", help="bind address (default $BIND_ADDR or 0.0.0.0)")
    sv.add_argument("--port", type=int, help="port (default $PORT or 8001)")
    sv.add_argument("--data-dir", dest="data_dir", help="session store directory")
    sv.set_defaults(func=lambda args: serve(args.host, args.port, args.data_dir) or 0)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EngineError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
