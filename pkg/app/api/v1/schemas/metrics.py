"""Segment metric schemas."""
from typing import List

from pydantic import BaseModel, Field, conint


class SegmentMetricsRequest(BaseModel):
    """Metrics of one segment of a level."""

    level: str = Field(..., description="Level in VGLC text format")
    segment: conint(ge=0) = Field(..., description="Segment index")


class CensusResponse(BaseModel):
    gaps: int
    pipes: int
    enemies: int
    bullets: int
    coins: int
    question_marks: int


class FaultyTileResponse(BaseModel):
    row: int
    col: int
    glyph: str


class SegmentMetricsResponse(BaseModel):
    """D, F and H of a segment against the segments before it."""

    D: float
    F: float
    H: float
    census: CensusResponse
    faulty_tiles: List[FaultyTileResponse]
