"""Engine error hierarchy.

Every failure mode the pipelines can signal is a subclass of EngineError
carrying a stable machine-readable ``code``. The HTTP layer maps codes to
status classes; the CLI prints them on exit.
"""


class EngineError(Exception):
    """Base class for all engine failures."""

    code = "engine_error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__doc__ or self.code)

    @property
    def message(self) -> str:
        return str(self)


# --- image / color failures ---------------------------------------------

class ZeroChannelMean(EngineError):
    """A color channel has zero mean; gray-world gains are undefined."""
    code = "zero_channel_mean"


class ConstantImage(EngineError):
    """All pixels share one value; no threshold can split them."""
    code = "constant_image"


class NoCircleFound(EngineError):
    """Circular Hough search found no accumulator peak above the floor."""
    code = "no_circle_found"


class InsufficientSclera(EngineError):
    """Scleral mask is too small for reliable statistics (bad capture)."""
    code = "insufficient_sclera"


class NoIrisFound(EngineError):
    """Neither landmarks nor the Hough fallback located an iris."""
    code = "no_iris_found"


# --- time-series failures -------------------------------------------------

class NoLandmarks(EngineError):
    """Frame carries no usable landmark groups."""
    code = "no_landmarks"


class TooShort(EngineError):
    """Recording is shorter than the analysis requires."""
    code = "too_short"


class EmptyBaseline(EngineError):
    """Too few detected frames inside the baseline window."""
    code = "empty_baseline"


class NonPositiveDuration(EngineError):
    """Recording duration must be positive."""
    code = "non_positive_duration"


class ZeroLatency(EngineError):
    """Waveform minimum coincides with the stimulus; mean velocity undefined."""
    code = "zero_latency"


class NoConvergence(EngineError):
    """Curve fit did not converge within the iteration budget."""
    code = "no_convergence"


# --- lesion / trend failures ----------------------------------------------

class NonMonotonicTimestamps(EngineError):
    """Trend comparison requires strictly increasing capture times."""
    code = "non_monotonic_timestamps"


class DegenerateTimeAxis(EngineError):
    """All measurements share one timestamp; no slope exists."""
    code = "degenerate_time_axis"


# --- ingest failures --------------------------------------------------------

class UnsupportedFormat(EngineError):
    """Input file format is outside the supported contract."""
    code = "unsupported_format"


class CorruptFile(EngineError):
    """Input file could not be decoded."""
    code = "corrupt_file"


class SchemaViolation(EngineError):
    """Trace or document does not conform to its schema."""
    code = "schema_violation"

    def __init__(self, message: str = "", line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NonMonotonicFrames(EngineError):
    """Trace frame indices are not strictly increasing."""
    code = "non_monotonic_frames"


class InvalidSpec(EngineError):
    """Phantom generator parameters are inconsistent."""
    code = "invalid_spec"


# --- session failures --------------------------------------------------------

class ConsentRequired(EngineError):
    """Intake consent flag must be true."""
    code = "consent_required"


class ValidationFailed(EngineError):
    """An intake or payload field failed validation."""
    code = "validation_failed"

    def __init__(self, field: str, message: str = ""):
        self.field = field
        super().__init__(f"{field}: {message}" if message else f"invalid field: {field}")


class NotFound(EngineError):
    """Requested session does not exist."""
    code = "not_found"
