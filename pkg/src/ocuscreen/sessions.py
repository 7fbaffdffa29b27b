"""Session lifecycle: consent-gated intake, UUID-keyed documents, ordered
append-only result history, and report rendering.

The default store is one canonical-JSON file per session under a data
directory, written via temp-file-and-rename so a crash never leaves a torn
document. Only metric payloads are persisted; raw media never touches the
store.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from html import escape
from pathlib import Path

from . import lesion as lesion_mod
from .errors import ConsentRequired, NotFound, ValidationFailed
from .schemas import MODULES, validate_payload
from .utils import DISCLAIMER, canonical_json

INTAKE_REQUIRED = ("consent", "name", "age", "pain_level")
INTAKE_OPTIONAL = {
    "email": None,
    "phone": None,
    "photophobia": False,
    "vision_changes": False,
    "notes": "",
}
MIN_AGE_YEARS = 18


@dataclass(frozen=True)
class IntakeRecord:
    consent: bool
    name: str
    age: int
    pain_level: int
    email: str | None = None
    phone: str | None = None
    photophobia: bool = False
    vision_changes: bool = False
    notes: str = ""

    def as_dict(self) -> dict:
        return {
            "consent": self.consent,
            "name": self.name,
            "age": self.age,
            "pain_level": self.pain_level,
            "email": self.email,
            "phone": self.phone,
            "photophobia": self.photophobia,
            "vision_changes": self.vision_changes,
            "notes": self.notes,
        }


def _utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def validate_intake(raw: dict | IntakeRecord) -> IntakeRecord:
    """Normalize and validate intake; consent gates everything else."""
    if isinstance(raw, IntakeRecord):
        data = raw.as_dict()
    elif isinstance(raw, dict):
        data = dict(raw)
    else:
        raise ValidationFailed("intake", "intake must be an object")

    unknown = set(data) - set(INTAKE_REQUIRED) - set(INTAKE_OPTIONAL)
    if unknown:
        raise ValidationFailed("intake", f"unknown fields: {sorted(unknown)}")
    missing = [k for k in INTAKE_REQUIRED if k not in data]
    if missing:
        raise ValidationFailed(missing[0], "field is required")

    if data["consent"] is not True:
        raise ConsentRequired("explicit consent is required to create a session")
    if not isinstance(data["name"], str):
        raise ValidationFailed("name", "must be a string")
    age = data["age"]
    if not isinstance(age, int) or isinstance(age, bool):
        raise ValidationFailed("age", "must be an integer")
    if age < MIN_AGE_YEARS:
        raise ValidationFailed("age", f"must be at least {MIN_AGE_YEARS}")
    pain = data["pain_level"]
    if not isinstance(pain, int) or isinstance(pain, bool) or not 0 <= pain <= 10:
        raise ValidationFailed("pain_level", "must be an integer in [0,10]")
    for key in ("email", "phone"):
        v = data.get(key, None)
        if v is not None and not isinstance(v, str):
            raise ValidationFailed(key, "must be a string when present")
    for key in ("photophobia", "vision_changes"):
        v = data.get(key, INTAKE_OPTIONAL[key])
        if not isinstance(v, bool):
            raise ValidationFailed(key, "must be a boolean")
    notes = data.get("notes", "")
    if not isinstance(notes, str):
        raise ValidationFailed("notes", "must be a string")

    return IntakeRecord(
        consent=True,
        name=data["name"],
        age=age,
        pain_level=pain,
        email=data.get("email"),
        phone=data.get("phone"),
        photophobia=data.get("photophobia", False),
        vision_changes=data.get("vision_changes", False),
        notes=notes,
    )


@dataclass
class SessionStore:
    """One canonical-JSON document per session id under data_dir."""

    data_dir: Path
    _locks: dict = field(default_factory=dict, repr=False)
    _locks_guard: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        self.data_dir = Path(self.data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def _path(self, session_id: str) -> Path:
        return self.data_dir / f"{session_id}.json"

    def _write(self, doc: dict) -> None:
        path = self._path(doc["id"])
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(canonical_json(doc), encoding="utf-8")
        os.replace(tmp, path)

    def create_session(self, intake: dict | IntakeRecord) -> dict:
        record = validate_intake(intake)
        session_id = str(uuid.uuid4())
        if self._path(session_id).exists():
            raise ValidationFailed("id", "session id collision")
        doc = {
            "id": session_id,
            "created_at": _utc_now_iso(),
            "intake": record.as_dict(),
            "results": [],
        }
        with self._lock_for(session_id):
            self._write(doc)
        return doc

    def get_session(self, session_id: str) -> dict:
        path = self._path(session_id)
        if not path.exists():
            raise NotFound(f"session {session_id} not found")
        return json.loads(path.read_text(encoding="utf-8"))

    def list_sessions(self) -> list[dict]:
        """Summaries, newest first."""
        out = []
        for path in self.data_dir.glob("*.json"):
            doc = json.loads(path.read_text(encoding="utf-8"))
            out.append(
                {
                    "id": doc["id"],
                    "created_at": doc["created_at"],
                    "modules": [r["module"] for r in doc["results"]],
                }
            )
        out.sort(key=lambda d: (d["created_at"], d["id"]), reverse=True)
        return out

    def append_result(
        self, session_id: str, module: str, payload: dict, created_at: str | None = None
    ) -> dict:
        if module not in MODULES:
            raise ValidationFailed("module", f"unknown module {module!r}")
        if payload.get("module") != module:
            raise ValidationFailed("payload", "payload module tag mismatch")
        validate_payload(module, payload)
        with self._lock_for(session_id):
            doc = self.get_session(session_id)
            doc["results"].append(
                {
                    "module": module,
                    "created_at": created_at or _utc_now_iso(),
                    "payload": payload,
                }
            )
            self._write(doc)
        return doc

    def lesion_history(self, session_id: str) -> list[tuple[str, float]]:
        """Prior lesion (timestamp, d_mm) pairs in capture order."""
        doc = self.get_session(session_id)
        return [
            (r["created_at"], r["payload"]["d_mm"])
            for r in doc["results"]
            if r["module"] == "lesion"
        ]


def render_report(store: SessionStore, session_id: str) -> dict:
    """Deterministic structured report for a session."""
    doc = store.get_session(session_id)
    sections = []
    for entry in doc["results"]:
        sections.append(
            {
                "module": entry["module"],
                "created_at": entry["created_at"],
                "metrics": entry["payload"],
                "disclaimer": DISCLAIMER,
            }
        )
    report = {
        "session_id": doc["id"],
        "created_at": doc["created_at"],
        "intake": doc["intake"],
        "sections": sections,
        "disclaimer": DISCLAIMER,
    }
    lesion_entries = [
        (e["created_at"], e["payload"]["d_mm"])
        for e in doc["results"]
        if e["module"] == "lesion"
    ]
    if len(lesion_entries) >= 3:
        slope, significant = lesion_mod.growth_rate(lesion_entries)
        report["lesion_growth"] = {
            "mm_per_day": slope,
            "significant": significant,
            "points": len(lesion_entries),
        }
    if not sections:
        report["notice"] = "no analyses recorded for this session"
    return report


def _render_metric_rows(metrics: dict) -> str:
    rows = []
    for key in sorted(metrics.keys()):
        if key in ("series", "module", "disclaimer"):
            continue
        value = metrics[key]
        pretty = canonical_json(value) if isinstance(value, (dict, list)) else str(value)
        rows.append(
            f"<tr><td>{escape(key)}</td><td>{escape(pretty)}</td></tr>"
        )
    return "\n".join(rows)


def render_report_html(report: dict) -> str:
    """Self-contained HTML with the machine-readable report embedded."""
    parts = [
        "<!DOCTYPE html>",
        "<html><head><meta charset='utf-8'>",
        f"<title>Screening report {escape(report['session_id'])}</title>",
        "<style>body{font-family:sans-serif;max-width:50em;margin:2em auto}"
        "table{border-collapse:collapse}td{border:1px solid #999;padding:0.2em 0.6em}"
        ".disclaimer{color:#883333;font-weight:bold}</style>",
        "</head><body>",
        "<h1>Screening report</h1>",
        f"<p>Session <code>{escape(report['session_id'])}</code>, "
        f"created {escape(report['created_at'])}.</p>",
        f"<p class='disclaimer'>{escape(report['disclaimer'])}</p>",
        "<h2>Intake</h2>",
        "<table>"
        + "".join(
            f"<tr><td>{escape(str(k))}</td><td>{escape(str(v))}</td></tr>"
            for k, v in sorted(report["intake"].items())
        )
        + "</table>",
    ]
    if report.get("notice"):
        parts.append(f"<p>{escape(report['notice'])}</p>")
    for section in report["sections"]:
        parts.append(f"<h2>{escape(section['module'])}</h2>")
        parts.append(f"<p>captured {escape(section['created_at'])}</p>")
        parts.append("<table>" + _render_metric_rows(section["metrics"]) + "</table>")
        parts.append(f"<p class='disclaimer'>{escape(section['disclaimer'])}</p>")
    if report.get("lesion_growth"):
        g = report["lesion_growth"]
        parts.append(
            "<h2>lesion growth</h2><p>"
            f"{g['mm_per_day']:.6f} mm/day over {g['points']} measurements; "
            f"{'clinically significant' if g['significant'] else 'not significant'}."
            "</p>"
        )
        parts.append(f"<p class='disclaimer'>{escape(DISCLAIMER)}</p>")
    # "<" must be escaped inside the script element or a hostile intake
    # string containing "</script>" would terminate the data block early
    embedded = canonical_json(report).replace("<", "\\u003c")
    parts.append(
        "<script type='application/json' id='report-data'>" + embedded + "</script>"
    )
    parts.append("</body></html>")
    return "\n".join(parts)
