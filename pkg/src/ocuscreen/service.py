"""HTTP facade: session CRUD, multipart analyze endpoints, report route.

All routes live under /api. Responses are canonical JSON (sorted keys,
compact separators), so an analyze response body is byte-identical to the
CLI's --out file for the same input. Engine failures map onto one status
each: 400 for malformed requests, 404 for unknown sessions, and 422 for
capture-quality rejections where the fix is a retake, not a code change.
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, Form, Request, UploadFile
from fastapi.responses import HTMLResponse, Response

from .blink import DEFAULT_ALPHA, analyze_blink
from .color_indices import analyze_color
from .errors import EngineError, ValidationFailed
from .ingest import decode_photo, load_trace
from .lesion import analyze_lesion
from .pupil import T_STIM_DEFAULT, analyze_pupil
from .pupil import IrisFrameLandmarks
from .redness import analyze_redness
from .schemas import MODULES
from .sessions import SessionStore, render_report, render_report_html
from .utils import canonical_json

DEFAULT_BIND_ADDR = "0.0.0.0"
DEFAULT_PORT = 8001

STATUS_BY_CODE = {
    # malformed input or request
    "schema_violation": 400,
    "unsupported_format": 400,
    "corrupt_file": 400,
    "invalid_spec": 400,
    "validation_failed": 400,
    "consent_required": 400,
    "non_monotonic_frames": 400,
    "non_monotonic_timestamps": 400,
    "degenerate_time_axis": 400,
    "non_positive_duration": 400,
    # unknown resource
    "not_found": 404,
    # capture-quality failures: retake, don't re-code
    "insufficient_sclera": 422,
    "no_iris_found": 422,
    "no_circle_found": 422,
    "too_short": 422,
    "empty_baseline": 422,
    "no_landmarks": 422,
    "zero_channel_mean": 422,
    "constant_image": 422,
    "zero_latency": 422,
}


def landmarks_from_trace_bytes(data: bytes) -> IrisFrameLandmarks:
    """Pull iris landmarks for calibration out of a (usually single-frame)
    trace; the right eye wins when both are present."""
    trace = load_trace(data)
    for frame in trace.frames:
        if not frame.detected:
            continue
        for iris, eye in ((frame.right_iris, frame.right_eye), (frame.left_iris, frame.left_eye)):
            if iris is not None and eye is not None:
                return IrisFrameLandmarks(
                    center=iris.c,
                    ring=iris.r,
                    outer_canthus=eye.p1,
                    inner_canthus=eye.p4,
                )
    raise ValidationFailed("landmarks", "trace holds no detected iris landmarks")


def run_analysis(
    module: str,
    file_bytes: bytes,
    t_stim: float | None = None,
    alpha: float | None = None,
    sector: str | None = None,
    landmarks_bytes: bytes | None = None,
    lesion_history: list[tuple[str, float]] | None = None,
    captured_at: str | None = None,
) -> dict:
    """One entry point for every pipeline; shared by CLI and HTTP."""
    if module not in MODULES:
        raise ValidationFailed("module", f"unknown module {module!r}")
    if module == "redness":
        return analyze_redness(decode_photo(file_bytes))
    if module == "color":
        return analyze_color(decode_photo(file_bytes))
    if module == "blink":
        return analyze_blink(
            load_trace(file_bytes),
            alpha=alpha if alpha is not None else DEFAULT_ALPHA,
        )
    if module == "pupil":
        return analyze_pupil(
            load_trace(file_bytes),
            t_stim=t_stim if t_stim is not None else T_STIM_DEFAULT,
        )
    if sector is not None and sector not in ("clinical", "literal"):
        raise ValidationFailed("sector", "must be 'clinical' or 'literal'")
    landmarks = (
        landmarks_from_trace_bytes(landmarks_bytes) if landmarks_bytes else None
    )
    return analyze_lesion(
        decode_photo(file_bytes),
        landmarks=landmarks,
        sector=sector or "clinical",
        history=lesion_history,
        captured_at=captured_at,
    )


def _canonical_response(payload, status_code: int = 200) -> Response:
    return Response(
        content=canonical_json(payload),
        status_code=status_code,
        media_type="application/json",
    )


def create_app(data_dir: str | Path | None = None) -> FastAPI:
    if data_dir is None:
        data_dir = os.environ.get("DATA_DIR", "./ocuscreen_data")
    store = SessionStore(Path(data_dir))
    app = FastAPI(title="ocuscreen", docs_url=None, redoc_url=None)
    app.state.store = store

    @app.exception_handler(EngineError)
    async def engine_error_handler(request: Request, exc: EngineError):
        status = STATUS_BY_CODE.get(exc.code, 400)
        return _canonical_response(
            {"error": {"code": exc.code, "message": str(exc)}}, status
        )

    @app.post("/api/sessions", status_code=201)
    async def create_session(request: Request):
        intake = await request.json()
        doc = store.create_session(intake)
        return _canonical_response(doc, 201)

    @app.get("/api/sessions")
    async def list_sessions():
        return _canonical_response(store.list_sessions())

    @app.get("/api/sessions/{session_id}")
    async def get_session(session_id: str):
        return _canonical_response(store.get_session(session_id))

    @app.get("/api/sessions/{session_id}/report.pdf")
    async def get_report(session_id: str):
        report = render_report(store, session_id)
        return HTMLResponse(content=render_report_html(report))

    @app.post("/api/analyze/{module}")
    async def analyze(
        module: str,
        file: UploadFile,
        session_id: str = Form(...),
        t_stim: float | None = Form(None),
        alpha: float | None = Form(None),
        sector: str | None = Form(None),
        landmarks: UploadFile | None = None,
    ):
        store.get_session(session_id)  # 404 before reading the upload
        history = store.lesion_history(session_id) if module == "lesion" else None
        payload = run_analysis(
            module,
            await file.read(),
            t_stim=t_stim,
            alpha=alpha,
            sector=sector,
            landmarks_bytes=await landmarks.read() if landmarks is not None else None,
            lesion_history=history,
        )
        store.append_result(session_id, module, payload)
        return _canonical_response(payload)

    return app


def serve(
    host: str | None = None, port: int | None = None, data_dir: str | Path | None = None
) -> None:
    """Blocking server start; binds from env when not overridden."""
    import uvicorn

    uvicorn.run(
        create_app(data_dir),
        host=host or os.environ.get("BIND_ADDR", DEFAULT_BIND_ADDR),
        port=port or int(os.environ.get("PORT", str(DEFAULT_PORT))),
        log_level="warning",
    )
