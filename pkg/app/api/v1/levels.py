"""Level API endpoints."""
import logging

import numpy as np
from fastapi import APIRouter, Depends

from app.api.v1.schemas import (
    AgentStateResponse,
    GenerateLevelRequest,
    GenerateLevelResponse,
    GenerationReportResponse,
    LevelRequest,
    PlayabilityResponse,
)
from app.core.config import RunConfig
from app.core.dependencies import get_designer_factory, get_pipeline, get_run_config
from app.core.exceptions import SpawnError
from app.models import Level
from app.services.environment_service import STRIP_PREVIOUS, Pipeline, initial_state
from app.services.level_service import parse_level, serialize_level
from app.services.online_service import generate_online
from app.services.player_service import format_trace, spawn_state

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/generate", response_model=GenerateLevelResponse)
def generate_level(
    request: GenerateLevelRequest,
    config: RunConfig = Depends(get_run_config),
    pipeline: Pipeline = Depends(get_pipeline),
    factory=Depends(get_designer_factory),
):
    """
    Generate a level online with the configured designer.

    Args:
        request: Target length, resampling mode and seed
        config: Run config
        pipeline: Generation pipeline
        factory: Designer factory

    Returns:
        GenerateLevelResponse: Level text and generation counters

    Raises:
        InitialSegmentError: If the backend yields no playable initial segment
    """
    update = {"target_segments": request.segments}
    if request.resample_mode is not None:
        update["resample_mode"] = request.resample_mode
    online = config.online.model_copy(update=update)

    designer = factory()
    designer.reseed(request.seed)
    init = initial_state(pipeline, np.random.default_rng(request.seed))
    level, report = generate_online(designer, pipeline, init, online, request.seed)
    logger.info("Generated %d segments (failed=%s)", report.segments, report.failed)
    return GenerateLevelResponse(
        level=serialize_level(level),
        report=GenerationReportResponse(**report.summary()),
    )


@router.post("/playability", response_model=PlayabilityResponse)
def check_playability(
    request: LevelRequest,
    trace: bool = False,
    config: RunConfig = Depends(get_run_config),
    pipeline: Pipeline = Depends(get_pipeline),
):
    """
    Play the trailing strip of a level: its last segments, up to four.

    The agent spawns in the first column of the strip. End state and trace
    are reported in level coordinates.

    Args:
        request: Level text
        trace: Include the found path
        config: Run config
        pipeline: Generation pipeline

    Returns:
        PlayabilityResponse: Verdict, end state and optional path

    Raises:
        LevelParseError: If the level text is invalid
    """
    level = parse_level(
        request.level, pipeline.alphabet, config.backend.segment_height, config.backend.segment_width
    )
    segments = level.tail(STRIP_PREVIOUS + 1)
    offset = (level.segment_count - len(segments)) * level.segment_width
    try:
        start = spawn_state(Level.from_segments(segments), 0, pipeline.alphabet)
    except SpawnError:
        return PlayabilityResponse(playable=False, segments_tested=len(segments), visited_states=0)

    result = pipeline.tester.test_strip(segments, start, trace=trace)
    end = result.end_state.shifted(offset) if result.end_state else None
    path = [s.shifted(offset) for s in result.path] if result.path else None
    return PlayabilityResponse(
        playable=result.playable,
        segments_tested=len(segments),
        visited_states=result.visited_states,
        end_state=AgentStateResponse(col=end.col, row=end.row, phase=end.phase.value, air=end.air) if end else None,
        trace=format_trace(path).splitlines() if path else None,
    )
