"""Shared fixtures: hand-built segments and small pipelines."""
from typing import List

import numpy as np
import pytest

from app.core.config import PhysicsParams, RunConfig
from app.models import LatentVector, Segment
from app.services.environment_service import Pipeline, initial_state
from app.services.generator_service import PoolBackend, PoolEntry, ProceduralBackend, SegmentPool
from app.services.player_service import PlayabilityTester

HEIGHT = 14
WIDTH = 14


def flat_rows(width: int = WIDTH, ground: int = 2) -> List[str]:
    """Open air above `ground` solid rows."""
    return ["-" * width] * (HEIGHT - ground) + ["X" * width] * ground


def with_tiles(rows: List[str], tiles) -> List[str]:
    """Copy of `rows` with (row, col, glyph) tiles written in."""
    grid = [list(row) for row in rows]
    for r, c, glyph in tiles:
        grid[r][c] = glyph
    return ["".join(row) for row in grid]


def wall_rows() -> List[str]:
    """Flat ground with a full-height wall in column 7."""
    return with_tiles(flat_rows(), [(r, 7, "X") for r in range(HEIGHT)])


def pool_of(*segments: Segment) -> SegmentPool:
    """Pool whose i-th entry has the constant code (i / len) in every dimension."""
    entries = tuple(
        PoolEntry(segment, LatentVector.from_array(np.full(32, i / len(segments))))
        for i, segment in enumerate(segments)
    )
    return SegmentPool(entries, seed=0, corpus_hash="test")


def pipeline_of(*segments: Segment, config: RunConfig = None) -> Pipeline:
    return Pipeline.from_config(config or RunConfig(), PoolBackend(pool_of(*segments)))


@pytest.fixture
def physics() -> PhysicsParams:
    return PhysicsParams()


@pytest.fixture
def tester(physics) -> PlayabilityTester:
    return PlayabilityTester(physics)


@pytest.fixture
def flat_segment() -> Segment:
    return Segment.from_rows(flat_rows())


@pytest.fixture
def wall_segment() -> Segment:
    return Segment.from_rows(wall_rows())


@pytest.fixture
def flat_pipeline(flat_segment) -> Pipeline:
    return pipeline_of(flat_segment)


@pytest.fixture
def wall_pipeline(wall_segment) -> Pipeline:
    return pipeline_of(wall_segment)


@pytest.fixture
def empty_pipeline() -> Pipeline:
    return pipeline_of(Segment.filled("-"))


@pytest.fixture
def procedural_pipeline() -> Pipeline:
    return Pipeline.from_config(RunConfig(), ProceduralBackend())


@pytest.fixture
def flat_init(flat_pipeline):
    return initial_state(flat_pipeline, np.random.default_rng(0))
