"""Level generation and playability schemas."""
from typing import List, Optional

from pydantic import BaseModel, Field, conint

from app.core.config import ResampleMode


class GenerateLevelRequest(BaseModel):
    """Online generation request."""

    segments: conint(ge=1, le=1000) = Field(100, description="Target level length in segments")
    resample_mode: Optional[ResampleMode] = Field(None, description="Resampling on unplayable candidates")
    seed: int = Field(0, description="Seed of the initial segment and the designer")


class GenerationReportResponse(BaseModel):
    """Online generation counters."""

    failed: bool
    segments: int
    unplayable_segments: int
    resamples_max: int
    resamples_total: int
    time_per_segment_ms: float
    time_per_sample_ms: float
    faulty_tiles_before: int
    faulty_tiles_after: int
    budget_overruns: int
    gaps: int
    pipes: int
    enemies: int
    bullets: int
    coins: int
    question_marks: int


class GenerateLevelResponse(BaseModel):
    """Generated level in VGLC text format."""

    level: str
    report: GenerationReportResponse


class LevelRequest(BaseModel):
    """A level in VGLC text format."""

    level: str = Field(..., description="Newline-separated rows")


class AgentStateResponse(BaseModel):
    col: int
    row: int
    phase: str
    air: int


class PlayabilityResponse(BaseModel):
    """Playability of the trailing strip (last four segments at most) of a level, in level coordinates."""

    playable: bool
    segments_tested: int
    visited_states: int
    end_state: Optional[AgentStateResponse] = None
    trace: Optional[List[str]] = None
