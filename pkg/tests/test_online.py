import numpy as np
import pytest

from app.core.config import OnlineConfig, ResampleMode
from app.services.environment_service import initial_state
from app.services.online_service import GenerationReport, generate_online, summarize_generations
from app.services.policy_service import DesignerPolicy, RandomDesigner


def test_flat_pool_reaches_target(flat_pipeline, flat_init):
    level, report = generate_online(RandomDesigner(0), flat_pipeline, flat_init, OnlineConfig(), seed=0)
    assert level.segment_count == 100
    assert not report.failed
    assert report.segments == 100
    assert report.unplayable_segments == 0
    assert len(report.segment_times_ms) == 99
    assert len(report.sample_times_ms) == 99
    assert report.time_per_sample_ms <= report.time_per_segment_ms


def test_unplayable_backend_fails_after_cap(wall_pipeline, flat_init):
    cfg = OnlineConfig(resample_cap=3, target_segments=10)
    level, report = generate_online(RandomDesigner(0), wall_pipeline, flat_init, cfg, seed=0)
    assert report.failed
    assert report.unplayable_segments == 4
    assert report.resamples_max == report.resamples_total == 3
    assert level.segment_count == 1
    assert report.segment_times_ms == []


def test_policy_resampling(wall_pipeline, flat_init):
    cfg = OnlineConfig(resample_cap=2, resample_mode=ResampleMode.POLICY)
    _, report = generate_online(DesignerPolicy(seed=0), wall_pipeline, flat_init, cfg)
    assert report.failed
    assert report.unplayable_segments == 3


def test_generation_is_seeded(procedural_pipeline):
    init = initial_state(procedural_pipeline, np.random.default_rng(0))
    cfg = OnlineConfig(target_segments=8)
    first, _ = generate_online(RandomDesigner(1), procedural_pipeline, init, cfg, seed=1)
    second, _ = generate_online(RandomDesigner(1), procedural_pipeline, init, cfg, seed=1)
    assert first == second


def test_summary_excludes_failed_runs_from_timings():
    ok = GenerationReport(segments=3, segment_times_ms=[2.0, 4.0], sample_times_ms=[1.0, 1.0])
    failed = GenerationReport(failed=True, unplayable_segments=4, segment_times_ms=[100.0], sample_times_ms=[50.0])
    summary = summarize_generations([ok, failed])
    assert summary["runs"] == 2
    assert summary["failed"] == 1
    assert summary["time_per_segment_ms"] == pytest.approx(3.0)
    assert summary["time_per_sample_ms"] == pytest.approx(1.0)
    assert summary["unplayable_segments"] == pytest.approx(2.0)
