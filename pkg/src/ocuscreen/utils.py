"""Shared numeric and serialization helpers."""

from __future__ import annotations

import json
from typing import Any

import numpy as np

DISCLAIMER = "Screening only; not diagnostic."


def round_half_away(x):
    """Round half away from zero (0.5 -> 1, -0.5 -> -1, 2.5 -> 3).

    numpy's round() is banker's rounding; 8-bit stores and window sizes use
    this convention instead so thresholded masks are reproducible.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.sign(x) * np.floor(np.abs(x) + 0.5)
    if out.ndim == 0:
        return float(out)
    return out


def to_uint8(x) -> np.ndarray:
    """Quantize float data to uint8 with half-away rounding and clipping."""
    return np.clip(round_half_away(x), 0, 255).astype(np.uint8)


def canonical_json(obj: Any) -> str:
    """Deterministic JSON: sorted keys, no whitespace, utf-8 passthrough."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
