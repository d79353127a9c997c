"""Core exceptions for Statepipe."""


class StatepipeError(Exception):
    """Base exception for pipeline errors."""

    def __init__(self, message: str, details: dict[str, str] | None = None) -> None:
        """Initialize the exception."""
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ConfigurationError(StatepipeError):
    """Configuration-related errors."""


class FormatError(StatepipeError):
    """Binary or JSON artifact format errors."""

    def __init__(
        self,
        message: str,
        path: str | None = None,
        offset: int | None = None,
        details: dict[str, str] | None = None,
    ) -> None:
        """Initialize the format error."""
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message, details)
        self.path = path
        self.offset = offset


class ParsingError(StatepipeError):
    """Transcript and response parsing errors."""

    def __init__(
        self,
        message: str,
        source: str | None = None,
        line_number: int | None = None,
        details: dict[str, str] | None = None,
    ) -> None:
        """Initialize the parsing error."""
        if line_number is not None:
            message = f"{message} (line {line_number})"
        super().__init__(message, details)
        self.source = source
        self.line_number = line_number


class ValidationError(StatepipeError):
    """Data validation errors."""

    def __init__(
        self,
        message: str,
        field: str | None = None,
        value: str | None = None,
        details: dict[str, str] | None = None,
    ) -> None:
        """Initialize the validation error."""
        super().__init__(message, details)
        self.field = field
        self.value = value


class ShapeError(StatepipeError):
    """Array shape disagreement."""


class APIError(StatepipeError):
    """External endpoint errors."""

    def __init__(
        self,
        message: str,
        api_name: str | None = None,
        status_code: int | None = None,
        details: dict[str, str] | None = None,
    ) -> None:
        """Initialize the API error."""
        super().__init__(message, details)
        self.api_name = api_name
        self.status_code = status_code


class CacheMissError(APIError):
    """A replay-mode request had no cached response."""

    def __init__(self, key: str, api_name: str | None = None) -> None:
        """Initialize the cache miss error."""
        super().__init__(f"No cached response for key {key}", api_name)
        self.key = key


class LabelingError(StatepipeError):
    """Prompt-chain stage failures."""

    def __init__(
        self,
        message: str,
        stage: str,
        video_id: str | None = None,
        details: dict[str, str] | None = None,
    ) -> None:
        """Initialize the labeling error."""
        prefix = f"[{stage}]" if video_id is None else f"[{stage}:{video_id}]"
        super().__init__(f"{prefix} {message}", details)
        self.stage = stage
        self.video_id = video_id


class AlignmentError(StatepipeError):
    """Frame alignment failures."""

    def __init__(
        self,
        message: str,
        frame: int | None = None,
        video_id: str | None = None,
        details: dict[str, str] | None = None,
    ) -> None:
        """Initialize the alignment error."""
        if frame is not None:
            message = f"{message} (frame {frame})"
        super().__init__(message, details)
        self.frame = frame
        self.video_id = video_id


class TrainingError(StatepipeError):
    """Model training errors."""


class EvaluationError(StatepipeError):
    """Metric computation errors."""


class PipelineError(StatepipeError):
    """Orchestration errors carrying the failing stage."""

    def __init__(
        self,
        message: str,
        stage: str,
        video_id: str | None = None,
        details: dict[str, str] | None = None,
    ) -> None:
        """Initialize the pipeline error."""
        where = stage if video_id is None else f"{stage} ({video_id})"
        super().__init__(f"Stage {where} failed: {message}", details)
        self.stage = stage
        self.video_id = video_id
