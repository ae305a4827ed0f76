"""Metric API endpoints."""
from fastapi import APIRouter, Depends, HTTPException, status

from app.api.v1.schemas import CensusResponse, FaultyTileResponse, SegmentMetricsRequest, SegmentMetricsResponse
from app.core.config import RunConfig
from app.core.dependencies import get_pipeline, get_run_config
from app.services.environment_service import Pipeline, history_limit
from app.services.level_service import census, parse_level
from app.services.metrics_service import segment_metrics

router = APIRouter()


@router.post("/segment", response_model=SegmentMetricsResponse)
def get_segment_metrics(
    request: SegmentMetricsRequest,
    config: RunConfig = Depends(get_run_config),
    pipeline: Pipeline = Depends(get_pipeline),
):
    """
    D, F, H, element census and faulty tiles of one segment.

    The history is the segments before it, capped at the generation history length.
    """
    level = parse_level(
        request.level, pipeline.alphabet, config.backend.segment_height, config.backend.segment_width
    )
    if request.segment >= level.segment_count:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail=f"Segment {request.segment} not found (level has {level.segment_count})",
        )

    limit = history_limit(pipeline.metrics, level.segment_width)
    history = level.segments[: request.segment][-limit:]
    d_value, f_value, h_value = segment_metrics(level, request.segment, history, pipeline.metrics)
    segment = level.segment(request.segment)
    return SegmentMetricsResponse(
        D=d_value,
        F=f_value,
        H=h_value,
        census=CensusResponse(**census(segment, pipeline.alphabet).as_dict()),
        faulty_tiles=[
            FaultyTileResponse(row=r, col=c, glyph=g) for r, c, g in pipeline.repairer.detect(segment)
        ],
    )
