"""Published JSON schemas for the five module payloads.

Every payload returned by the CLI or the HTTP service validates against
its module's schema; the session store enforces the same check on append,
so persisted history is schema-clean by construction.
"""

from __future__ import annotations

import jsonschema

from .errors import ValidationFailed

_NUMBER = {"type": "number"}
_NULLABLE_NUMBER = {"type": ["number", "null"]}
_COUNT = {"type": "integer", "minimum": 0}
_STRING = {"type": "string"}


def _obj(properties: dict, required: list[str] | None = None) -> dict:
    return {
        "type": "object",
        "properties": properties,
        "required": sorted(required if required is not None else properties.keys()),
        "additionalProperties": False,
    }


REDNESS_SCHEMA = _obj(
    {
        "module": {"const": "redness"},
        "weighted_mean_a": _NUMBER,
        "sigma_a": {"type": "number", "minimum": 0},
        "score": {"type": "number", "minimum": 0, "maximum": 10},
        "score_lo": {"type": "number", "minimum": 0, "maximum": 10},
        "score_hi": {"type": "number", "minimum": 0, "maximum": 10},
        "mask_pixels": _COUNT,
        "triage": _obj({"band": _STRING, "guidance": _STRING, "display": _STRING}),
        "disclaimer": _STRING,
    }
)

BLINK_SCHEMA = _obj(
    {
        "module": {"const": "blink"},
        "blink_count": _COUNT,
        "rate_bpm": {"type": "number", "minimum": 0},
        "ci_lo_bpm": {"type": "number", "minimum": 0},
        "ci_hi_bpm": {"type": "number", "minimum": 0},
        "threshold": _NUMBER,
        "baseline_median": _NUMBER,
        "baseline_sigma": {"type": "number", "minimum": 0},
        "min_frames": {"type": "integer", "minimum": 2},
        "smooth_window": {"type": "integer", "minimum": 1},
        "alpha": _NUMBER,
        "duration_s": {"type": "number", "exclusiveMinimum": 0},
        "fps": {"type": "number", "exclusiveMinimum": 0},
        "stratum": _obj({"band": _STRING, "guidance": _STRING, "display": _STRING}),
        "series": _obj(
            {
                "t": {"type": "array", "items": _NUMBER},
                "ear": {"type": "array", "items": _NUMBER},
            }
        ),
        "disclaimer": _STRING,
    }
)

PUPIL_SCHEMA = _obj(
    {
        "module": {"const": "pupil"},
        "eye": {"enum": ["left", "right"]},
        "pir_base": _NUMBER,
        "pir_min": _NUMBER,
        "delta": _NUMBER,
        "delta_rel_pct": _NUMBER,
        "latency_ms": _NUMBER,
        "v_mean_pir_per_ms": _NULLABLE_NUMBER,
        "v_max_pir_per_s": {"type": "number", "minimum": 0},
        "t_stim_s": {"type": "number", "minimum": 0},
        "quality": _obj(
            {
                "q": {"type": "number", "minimum": 0, "maximum": 1},
                "detect": {"type": "number", "minimum": 0, "maximum": 1},
                "stable": {"type": "number", "minimum": 0, "maximum": 1},
                "resp": {"enum": [0, 1]},
            }
        ),
        "fit": {
            "oneOf": [
                {"type": "null"},
                _obj(
                    {
                        "latency_ms": _NUMBER,
                        "tau_s": {"type": "number", "exclusiveMinimum": 0},
                        "residual": {"type": "number", "minimum": 0},
                    }
                ),
            ]
        },
        "units_note": _STRING,
        "series": _obj(
            {
                "t": {"type": "array", "items": _NUMBER},
                "pir": {"type": "array", "items": _NULLABLE_NUMBER},
                "detected": {"type": "array", "items": {"type": "boolean"}},
            }
        ),
        "disclaimer": _STRING,
    }
)

COLOR_SCHEMA = _obj(
    {
        "module": {"const": "color"},
        "yellow_index": {"type": "number", "minimum": 0, "maximum": 1},
        "yellow_lo": {"type": "number", "minimum": 0, "maximum": 1},
        "yellow_hi": {"type": "number", "minimum": 0, "maximum": 1},
        "pallor_index": {"type": "number", "minimum": 0, "maximum": 1},
        "mean_b": _NUMBER,
        "sigma_b": {"type": "number", "minimum": 0},
        "mean_L": _NUMBER,
        "mean_a": _NUMBER,
        "L_term": {"type": "number", "minimum": 0, "maximum": 1},
        "a_term": {"type": "number", "minimum": 0, "maximum": 1},
        "gains": _obj(
            {
                "b": {"type": "number", "exclusiveMinimum": 0},
                "g": {"type": "number", "exclusiveMinimum": 0},
                "r": {"type": "number", "exclusiveMinimum": 0},
                "reference_gray": {"type": "number", "exclusiveMinimum": 0},
            }
        ),
        "mask_pixels": _COUNT,
        "triage": _obj({"yellow": _STRING, "pallor": _STRING}),
        "disclaimer": _STRING,
    }
)

LESION_SCHEMA = _obj(
    {
        "module": {"const": "lesion"},
        "d_px": {"type": "number", "minimum": 0},
        "d_mm": {"type": "number", "minimum": 0},
        "d_lo_mm": {"type": "number", "minimum": 0},
        "d_hi_mm": {"type": "number", "minimum": 0},
        "status": {"enum": ["absent", "trace", "present"]},
        "lesion_pixels_in_band": _COUNT,
        "calibration": _obj(
            {
                "center": {
                    "type": "array",
                    "items": _NUMBER,
                    "minItems": 2,
                    "maxItems": 2,
                },
                "radius_px": {"type": "number", "exclusiveMinimum": 0},
                "lambda_mm_per_px": {"type": "number", "exclusiveMinimum": 0},
                "lambda_lo": {"type": "number", "exclusiveMinimum": 0},
                "lambda_hi": {"type": "number", "exclusiveMinimum": 0},
                "epsilon_rel": {"type": "number", "exclusiveMinimum": 0},
                "source": {"enum": ["landmarks", "hough"]},
            }
        ),
        "sector_mode": {"enum": ["clinical", "literal"]},
        "trend": {
            "oneOf": [
                {"type": "null"},
                _obj(
                    {
                        "delta_mm": _NUMBER,
                        "delta_days": {"type": "number", "exclusiveMinimum": 0},
                        "label": {"enum": ["increased", "stable", "decreased"]},
                    }
                ),
            ]
        },
        "growth": {
            "oneOf": [
                {"type": "null"},
                _obj({"mm_per_day": _NUMBER, "significant": {"type": "boolean"}}),
            ]
        },
        "display": _STRING,
        "disclaimer": _STRING,
    }
)

PAYLOAD_SCHEMAS = {
    "redness": REDNESS_SCHEMA,
    "blink": BLINK_SCHEMA,
    "pupil": PUPIL_SCHEMA,
    "color": COLOR_SCHEMA,
    "lesion": LESION_SCHEMA,
}

MODULES = tuple(PAYLOAD_SCHEMAS.keys())


def validate_payload(module: str, payload: dict) -> None:
    """Raise ValidationFailed when a payload breaks its module schema."""
    schema = PAYLOAD_SCHEMAS.get(module)
    if schema is None:
        raise ValidationFailed("module", f"unknown module {module!r}")
    try:
        jsonschema.validate(payload, schema)
    except jsonschema.ValidationError as exc:
        raise ValidationFailed("payload", exc.message) from exc
