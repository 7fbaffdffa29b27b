"""Landmark-trace extraction for the ocuscreen engine.

The adapter turns photos, frame-sequence clips, and videos into the
engine's JSONL landmark-trace wire format. That file format is the only
coupling between the two packages.
"""

from .detectors import MarkerDotDetector, MediaPipeFaceMesh, make_detector
from .errors import AdapterError, DetectorUnavailable, UnreadableInput
from .extract import ExtractStats, extract_trace
from .media import MediaStream, open_media

__version__ = "0.1.0"

__all__ = [
    "AdapterError",
    "DetectorUnavailable",
    "ExtractStats",
    "MarkerDotDetector",
    "MediaPipeFaceMesh",
    "MediaStream",
    "UnreadableInput",
    "extract_trace",
    "make_detector",
    "open_media",
    "__version__",
]
