"""Adapter failure taxonomy. The CLI maps every AdapterError to a nonzero
exit with a stable machine-readable code on stderr."""

from __future__ import annotations


class AdapterError(Exception):
    code = "adapter_error"


class UnreadableInput(AdapterError):
    """The input file or directory cannot be opened or decoded."""

    code = "unreadable_input"


class DetectorUnavailable(AdapterError):
    """The requested landmark detector backend is not installed."""

    code = "detector_unavailable"
