"""Online endless generation with resampling of unplayable segments."""
import logging
import time
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from app.core.config import ActMode, OnlineConfig, ResampleMode
from app.models import LATENT_DIM, ElementCensus, LatentVector, Level
from app.services.environment_service import EnvState, Pipeline, append_segment, propose_segment
from app.services.level_service import census
from app.services.policy_service import Designer

logger = logging.getLogger(__name__)


@dataclass
class GenerationReport:
    """Counters and timings of one online generation."""

    failed: bool = False
    segments: int = 0
    unplayable_segments: int = 0
    resamples_max: int = 0
    resamples_total: int = 0
    faulty_tiles_before: int = 0
    faulty_tiles_after: int = 0
    budget_overruns: int = 0
    segment_times_ms: List[float] = field(default_factory=list)
    sample_times_ms: List[float] = field(default_factory=list)
    d_values: List[float] = field(default_factory=list)
    f_values: List[float] = field(default_factory=list)
    h_values: List[float] = field(default_factory=list)
    census: ElementCensus = field(default_factory=ElementCensus)

    @property
    def time_per_segment_ms(self) -> float:
        return float(np.mean(self.segment_times_ms)) if self.segment_times_ms else 0.0

    @property
    def time_per_sample_ms(self) -> float:
        return float(np.mean(self.sample_times_ms)) if self.sample_times_ms else 0.0

    def summary(self) -> dict:
        return {
            "failed": self.failed,
            "segments": self.segments,
            "unplayable_segments": self.unplayable_segments,
            "resamples_max": self.resamples_max,
            "resamples_total": self.resamples_total,
            "time_per_segment_ms": self.time_per_segment_ms,
            "time_per_sample_ms": self.time_per_sample_ms,
            "faulty_tiles_before": self.faulty_tiles_before,
            "faulty_tiles_after": self.faulty_tiles_after,
            "budget_overruns": self.budget_overruns,
            **self.census.as_dict(),
        }


def _resample(designer: Designer, state: EnvState, mode: ResampleMode, rng: np.random.Generator) -> LatentVector:
    if mode == ResampleMode.POLICY:
        return designer.act(state.current_latent, stochastic=True)
    return LatentVector.from_array(rng.standard_normal(LATENT_DIM))


def generate_online(
    designer: Designer,
    pipeline: Pipeline,
    init: EnvState,
    cfg: OnlineConfig,
    seed: int = 0,
) -> Tuple[Level, GenerationReport]:
    """
    Extend `init` until the level holds `cfg.target_segments` playable segments.

    An unplayable candidate is replaced by a resampled action (a fresh policy
    sample or a clipped standard normal) up to `cfg.resample_cap` times; when
    the cap is exhausted the run stops and is reported as failed.

    Args:
        designer: Policy or random designer
        pipeline: Generator, repairer and tester
        init: Playable initial state
        cfg: Online generation settings
        seed: Seed of the random resampler

    Returns:
        Tuple[Level, GenerationReport]: Level of playable segments and counters
    """
    rng = np.random.default_rng(seed)
    stochastic = cfg.act_mode == ActMode.STOCHASTIC
    report = GenerationReport(segments=init.level.segment_count)
    for segment in init.level.segments:
        report.census = report.census + census(segment, pipeline.alphabet)
    state = init

    while state.level.segment_count < cfg.target_segments:
        segment_start = time.perf_counter()
        resamples = 0
        z = designer.act(state.current_latent, stochastic=stochastic)
        while True:
            sample_start = time.perf_counter()
            proposal = propose_segment(pipeline, state, z)
            report.sample_times_ms.append((time.perf_counter() - sample_start) * 1000.0)
            report.faulty_tiles_before += proposal.faulty_before
            report.faulty_tiles_after += proposal.faulty_after
            if proposal.playable:
                break
            report.unplayable_segments += 1
            if resamples == cfg.resample_cap:
                report.failed = True
                break
            resamples += 1
            z = _resample(designer, state, cfg.resample_mode, rng)
            logger.debug("Resample %d at segment %d", resamples, state.level.segment_count)

        report.resamples_total += resamples
        report.resamples_max = max(report.resamples_max, resamples)
        if report.failed:
            logger.info("Generation failed at segment %d", state.level.segment_count)
            break

        state, (d_value, f_value, h_value) = append_segment(pipeline, state, proposal)
        elapsed = (time.perf_counter() - segment_start) * 1000.0
        report.segment_times_ms.append(elapsed)
        if cfg.time_budget_ms is not None and elapsed > cfg.time_budget_ms:
            report.budget_overruns += 1
            logger.warning("Segment %d took %.1f ms (budget %.1f ms)", report.segments, elapsed, cfg.time_budget_ms)
        report.segments = state.level.segment_count
        report.d_values.append(d_value)
        report.f_values.append(f_value)
        report.h_values.append(h_value)
        report.census = report.census + census(proposal.segment, pipeline.alphabet)

    return state.level, report


def summarize_generations(reports: Sequence[GenerationReport], runs: int = 0) -> dict:
    """
    Batch summary of online runs.

    Failed runs count towards `failed` but are excluded from the timing means.
    """
    succeeded = [r for r in reports if not r.failed]
    segment_times = [t for r in succeeded for t in r.segment_times_ms]
    sample_times = [t for r in succeeded for t in r.sample_times_ms]
    return {
        "runs": runs or len(reports),
        "failed": sum(r.failed for r in reports),
        "unplayable_segments": float(np.mean([r.unplayable_segments for r in reports])) if reports else 0.0,
        "resamples_max": max((r.resamples_max for r in reports), default=0),
        "resamples_total": float(np.mean([r.resamples_total for r in reports])) if reports else 0.0,
        "time_per_segment_ms": float(np.mean(segment_times)) if segment_times else 0.0,
        "time_per_sample_ms": float(np.mean(sample_times)) if sample_times else 0.0,
        "faulty_tiles_before": float(np.mean([r.faulty_tiles_before for r in reports])) if reports else 0.0,
        "faulty_tiles_after": float(np.mean([r.faulty_tiles_after for r in reports])) if reports else 0.0,
    }
