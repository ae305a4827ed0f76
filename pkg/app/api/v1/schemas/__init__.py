"""API schemas."""
from app.api.v1.schemas.level import (
    AgentStateResponse,
    GenerateLevelRequest,
    GenerateLevelResponse,
    GenerationReportResponse,
    LevelRequest,
    PlayabilityResponse,
)
from app.api.v1.schemas.metrics import (
    CensusResponse,
    FaultyTileResponse,
    SegmentMetricsRequest,
    SegmentMetricsResponse,
)

__all__ = [
    "AgentStateResponse",
    "GenerateLevelRequest",
    "GenerateLevelResponse",
    "GenerationReportResponse",
    "LevelRequest",
    "PlayabilityResponse",
    "CensusResponse",
    "FaultyTileResponse",
    "SegmentMetricsRequest",
    "SegmentMetricsResponse",
]
