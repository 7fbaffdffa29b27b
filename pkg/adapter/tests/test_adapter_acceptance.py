"""Adapter release gate, in the same shape as the engine's: one criterion,
an explicit runtime budget, and a printed PASS/FAIL line (visible with -s
or -rP).

The gate drives the shipped CLI over three sample clips and checks the
integration the wire format promises: every emitted trace must pass the
engine's ingest validator, and a clip whose blink count is known by
construction (the synthetic stand-in for a manually counted clip) must
come back from the engine within +/-1 of that count. This is a pipeline
sanity check, not a clinical accuracy claim.
"""

import time
from contextlib import contextmanager

from ocuscreen.blink import analyze_blink
from ocuscreen.ingest import load_trace

import adapterclips as clips
from landmark_adapter.cli import main


@contextmanager
def criterion(name: str, budget_s: float):
    errs: list[str] = []
    start = time.perf_counter()
    try:
        yield errs
    finally:
        elapsed = time.perf_counter() - start
        if elapsed > budget_s:
            errs.append(f"runtime {elapsed:.2f}s exceeds budget {budget_s:g}s")
        verdict = "PASS" if not errs else "FAIL"
        print(f"[SECONDARY] {name}: {verdict} ({elapsed:.2f}s, budget {budget_s:g}s)")
    assert not errs, "; ".join(errs)


def check(errs: list[str], cond: bool, msg: str) -> None:
    if not cond:
        errs.append(msg)


def test_adapter_gate(blink_video, facefree_dir, still_photo, tmp_path):
    with criterion("landmark-adapter", 120.0) as errs:
        samples = {
            "blink": blink_video,
            "facefree": facefree_dir,
            "photo": still_photo,
        }
        traces = {}
        for name, src in samples.items():
            out = tmp_path / f"{name}.jsonl"
            rc = main(
                ["extract", "--input", str(src), "--output", str(out),
                 "--detector", "marker"]
            )
            check(errs, rc == 0, f"{name}: CLI exit {rc}")
            if rc != 0:
                continue
            try:
                traces[name] = load_trace(out.read_bytes())
            except Exception as exc:  # noqa: BLE001 - gate reports, not raises
                check(errs, False, f"{name}: ingest rejected the trace: {exc}")

        check(errs, len(traces) == 3, "not every sample clip produced a valid trace")

        if "blink" in traces:
            trace = traces["blink"]
            check(errs, trace.frame_count == 300, "10s@30fps clip must emit 300 frames")
            check(errs, trace.fps == clips.CLIP_FPS, "header fps must match container")
            count = analyze_blink(trace)["blink_count"]
            check(
                errs,
                abs(count - clips.K_BLINKS) <= 1,
                f"engine counted {count} blinks; clip holds {clips.K_BLINKS}",
            )
        if "facefree" in traces:
            check(
                errs,
                not any(f.detected for f in traces["facefree"].frames),
                "face-free clip must be all detected=false",
            )
        if "photo" in traces:
            check(
                errs,
                traces["photo"].frame_count == 1,
                "still photo mode must emit a single-frame trace",
            )
