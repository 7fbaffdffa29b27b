"""Deterministic, explainable ophthalmic screening engine.

Five metric families over eye photos and periorbital landmark traces:
conjunctival redness, blink rate, pupil light reflex, scleral color
indices, and iris-calibrated lesion encroachment with longitudinal trend.
Screening only; not diagnostic.
"""

from .blink import analyze_blink
from .color_indices import analyze_color
from .colorspace import Bgr8Image, bgr_to_hsv8, bgr_to_lab8, gray_world_correct
from .errors import EngineError
from .estimators import (
    BlinkAnalyzer,
    ColorIndexAnalyzer,
    LesionAnalyzer,
    PupilAnalyzer,
    RednessAnalyzer,
)
from .ingest import LandmarkTrace, decode_photo, load_trace, serialize_trace
from .lesion import analyze_lesion
from .pupil import analyze_pupil
from .redness import analyze_redness
from .service import create_app, run_analysis
from .sessions import SessionStore

__version__ = "0.1.0"

__all__ = [
    "analyze_blink",
    "analyze_color",
    "analyze_lesion",
    "analyze_pupil",
    "analyze_redness",
    "Bgr8Image",
    "bgr_to_hsv8",
    "bgr_to_lab8",
    "BlinkAnalyzer",
    "ColorIndexAnalyzer",
    "create_app",
    "decode_photo",
    "EngineError",
    "gray_world_correct",
    "LandmarkTrace",
    "LesionAnalyzer",
    "load_trace",
    "PupilAnalyzer",
    "RednessAnalyzer",
    "run_analysis",
    "serialize_trace",
    "SessionStore",
    "__version__",
]
