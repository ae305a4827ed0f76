"""Custom exceptions for the application."""
from typing import Optional


class BaseAppException(Exception):
    """Base exception for application errors."""

    def __init__(
        self,
        message: str,
        status_code: int = 500,
        exit_code: int = 3,
        detail: Optional[str] = None,
    ):
        self.message = message
        self.status_code = status_code
        self.exit_code = exit_code
        self.detail = detail or message
        super().__init__(self.message)


class ConfigError(BaseAppException):
    """Invalid or unreadable configuration."""

    def __init__(self, message: str):
        super().__init__(message=message, status_code=422, exit_code=1)


class DataError(BaseAppException):
    """Invalid input data (levels, corpora, checkpoints)."""

    def __init__(self, message: str, detail: Optional[str] = None):
        super().__init__(message=message, status_code=422, exit_code=2, detail=detail)


class LevelParseError(DataError):
    """Level text could not be parsed."""

    def __init__(
        self,
        message: str,
        glyph: Optional[str] = None,
        row: Optional[int] = None,
        col: Optional[int] = None,
    ):
        self.glyph = glyph
        self.row = row
        self.col = col
        if glyph is not None:
            message = f"{message}: glyph {glyph!r} at row {row}, column {col}"
        super().__init__(message)


class DimensionMismatchError(DataError):
    """Segment dimensions do not agree."""

    def __init__(self, expected: tuple, actual: tuple):
        super().__init__(
            message="Dimension mismatch",
            detail=f"Expected {expected[0]}x{expected[1]}, got {actual[0]}x{actual[1]}",
        )


class CorpusError(DataError):
    """Corpus missing, empty or unusable."""


class CheckpointFormatError(DataError):
    """Checkpoint file has a bad header or unsupported version."""


class PipelineError(BaseAppException):
    """Runtime failure inside the generation pipeline."""

    def __init__(self, message: str, detail: Optional[str] = None):
        super().__init__(message=message, status_code=500, exit_code=3, detail=detail)


class GeneratorError(PipelineError):
    """Generator backend cannot produce a segment."""


class SpawnError(PipelineError):
    """No spawn position in the requested column."""

    def __init__(self, col: int):
        super().__init__(f"Column {col} has no solid tile to stand on")


class PlayabilityError(PipelineError):
    """Invalid input to the playability search."""


class EnvironmentStateError(PipelineError):
    """Environment used out of order (step before reset, step after done)."""


class InitialSegmentError(PipelineError):
    """No playable initial segment within the retry cap."""

    def __init__(self, attempts: int):
        super().__init__(
            f"No playable initial segment after {attempts} samples",
            detail="The generator backend looks degenerate",
        )


class RewardError(PipelineError):
    """Reward composition received incomplete input."""


class PolicyDivergenceError(PipelineError):
    """Policy produced non-finite values."""


class TrainingError(PipelineError):
    """Training cannot proceed."""
