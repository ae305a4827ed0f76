"""Batch evaluation of designers and latency benchmarking."""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from app.core.config import ActMode, EvaluationConfig, MetricConfig, OnlineConfig
from app.models import CENSUS_FIELDS, ElementCensus
from app.services.environment_service import EnvState, Pipeline, append_segment, initial_state, propose_segment
from app.services.level_service import census
from app.services.online_service import generate_online
from app.services.policy_service import Designer

logger = logging.getLogger(__name__)

SEGMENT_ROW_FIELDS = ("init", "trial", "segment", "playable", "D", "F", "H") + CENSUS_FIELDS
LEVEL_SUMMARY_FIELDS = ("F", "F_b", "H", "P") + CENSUS_FIELDS

# Zero-argument factory so each worker builds a private designer
DesignerFactory = Callable[[], Designer]


@dataclass(frozen=True)
class SegmentRow:
    """Raw values of one evaluated segment."""

    init: int
    trial: int
    segment: int
    playable: bool
    D: float
    F: float
    H: float
    census: ElementCensus = field(default_factory=ElementCensus)

    def as_dict(self) -> dict:
        return {
            "init": self.init,
            "trial": self.trial,
            "segment": self.segment,
            "playable": self.playable,
            "D": self.D,
            "F": self.F,
            "H": self.H,
            **self.census.as_dict(),
        }


@dataclass(frozen=True)
class MeanStd:
    mean: float
    std: float

    def __str__(self) -> str:
        return f"{self.mean:.3f}±{self.std:.3f}"


@dataclass(frozen=True)
class EvaluationReport:
    """
    Per-level means over playable segments, aggregated as mean and population
    std across levels. `F_b` is the percentage of playable segments whose D lies
    in [l, u]; `P` counts playable segments before the first unplayable one.
    """

    levels: int
    F: MeanStd
    F_b: MeanStd
    H: MeanStd
    P: MeanStd
    elements: Dict[str, MeanStd]
    rows: List[SegmentRow]

    def summary(self) -> Dict[str, str]:
        values = {"F": self.F, "F_b": self.F_b, "H": self.H, "P": self.P, **self.elements}
        return {name: str(values[name]) for name in LEVEL_SUMMARY_FIELDS}


def _level_seed(seed: int, init: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, init, trial]).generate_state(1)[0])


def sample_initial_states(pipeline: Pipeline, count: int, seed: int) -> List[EnvState]:
    """`count` playable initial states from one seeded stream."""
    rng = np.random.default_rng(seed)
    return [initial_state(pipeline, rng) for _ in range(count)]


def _evaluate_level(
    designer: Designer,
    pipeline: Pipeline,
    init: EnvState,
    init_index: int,
    trial: int,
    max_segments: int,
    stop_on_unplayable: bool,
    stochastic: bool,
    seed: int,
) -> List[SegmentRow]:
    designer.reseed(_level_seed(seed, init_index, trial))
    rows = []
    state = init
    for index in range(1, max_segments + 1):
        proposal = propose_segment(pipeline, state, designer.act(state.current_latent, stochastic=stochastic))
        if not proposal.playable and stop_on_unplayable:
            rows.append(SegmentRow(init_index, trial, index, False, 0.0, 0.0, 0.0))
            break
        state, (d_value, f_value, h_value) = append_segment(pipeline, state, proposal)
        rows.append(
            SegmentRow(
                init_index,
                trial,
                index,
                proposal.playable,
                d_value,
                f_value,
                h_value,
                census(proposal.segment, pipeline.alphabet),
            )
        )
    return rows


def _evaluate_init(args) -> List[SegmentRow]:
    factory, pipeline, init, init_index, cfg, stop, stochastic, seed = args
    designer = factory()
    rows = []
    for trial in range(cfg.trials_per_init):
        rows.extend(
            _evaluate_level(designer, pipeline, init, init_index, trial, cfg.max_segments, stop, stochastic, seed)
        )
    return rows


def _mean_std(values: Sequence[float]) -> MeanStd:
    if not values:
        return MeanStd(0.0, 0.0)
    arr = np.asarray(values, dtype=np.float64)
    return MeanStd(float(arr.mean()), float(arr.std()))


def aggregate_rows(rows: Sequence[SegmentRow], metrics: MetricConfig) -> EvaluationReport:
    """
    Recompute every aggregate from per-segment rows.

    Args:
        rows: Per-segment rows of all levels
        metrics: Metric config (fun band)

    Returns:
        EvaluationReport: Aggregates across levels
    """
    levels: Dict[tuple, List[SegmentRow]] = {}
    for row in rows:
        levels.setdefault((row.init, row.trial), []).append(row)

    per_level = {name: [] for name in LEVEL_SUMMARY_FIELDS}
    for key in sorted(levels):
        level_rows = sorted(levels[key], key=lambda r: r.segment)
        playable = [r for r in level_rows if r.playable]
        p_value = 0
        for r in level_rows:
            if not r.playable:
                break
            p_value += 1
        if playable:
            per_level["F"].append(float(np.mean([r.F for r in playable])))
            per_level["H"].append(float(np.mean([r.H for r in playable])))
            in_band = sum(metrics.l <= r.D <= metrics.u for r in playable)
            per_level["F_b"].append(100.0 * in_band / len(playable))
        per_level["P"].append(float(p_value))
        total = ElementCensus()
        for r in playable:
            total = total + r.census
        for name, value in total.as_dict().items():
            per_level[name].append(float(value))

    return EvaluationReport(
        levels=len(levels),
        F=_mean_std(per_level["F"]),
        F_b=_mean_std(per_level["F_b"]),
        H=_mean_std(per_level["H"]),
        P=_mean_std(per_level["P"]),
        elements={name: _mean_std(per_level[name]) for name in CENSUS_FIELDS},
        rows=list(rows),
    )


def evaluate_policy(
    designer_factory: DesignerFactory,
    pipeline: Pipeline,
    inits: Sequence[EnvState],
    cfg: EvaluationConfig,
    stop_on_unplayable: bool,
    act_mode: ActMode = ActMode.STOCHASTIC,
    seed: int = 0,
) -> EvaluationReport:
    """
    Generate `trials_per_init` levels from every initial state.

    Each level reseeds its designer from (seed, init, trial), so rows do not
    depend on the number of workers.

    Args:
        designer_factory: Builds a designer (called once per initial state)
        pipeline: Generator, repairer and tester
        inits: Initial states
        cfg: Evaluation protocol
        stop_on_unplayable: End a level at its first unplayable segment
        act_mode: Policy action mode
        seed: Base seed

    Returns:
        EvaluationReport: Aggregates and rows in (init, trial, segment) order
    """
    stochastic = act_mode == ActMode.STOCHASTIC
    jobs = [
        (designer_factory, pipeline, init, index, cfg, stop_on_unplayable, stochastic, seed)
        for index, init in enumerate(inits)
    ]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_evaluate_init, jobs))
    else:
        chunks = [_evaluate_init(job) for job in jobs]
    rows = [row for chunk in chunks for row in chunk]
    report = aggregate_rows(rows, pipeline.metrics)
    logger.info("Evaluated %d levels: P %s, F %s, H %s", report.levels, report.P, report.F, report.H)
    return report


@dataclass(frozen=True)
class LatencyStats:
    segments: int
    samples: int
    segment_mean_ms: float
    segment_p99_ms: float
    sample_mean_ms: float
    sample_p99_ms: float

    def as_dict(self) -> dict:
        return {
            "segments": self.segments,
            "samples": self.samples,
            "segment_mean_ms": self.segment_mean_ms,
            "segment_p99_ms": self.segment_p99_ms,
            "sample_mean_ms": self.sample_mean_ms,
            "sample_p99_ms": self.sample_p99_ms,
        }


def benchmark_latency(
    designer: Designer,
    pipeline: Pipeline,
    init: EnvState,
    n_segments: int,
    online: Optional[OnlineConfig] = None,
    seed: int = 0,
) -> LatencyStats:
    """Wall-clock per playable segment and per sample over one online run."""
    cfg = (online or OnlineConfig()).model_copy(
        update={"target_segments": init.level.segment_count + n_segments}
    )
    started = time.perf_counter()
    _, report = generate_online(designer, pipeline, init, cfg, seed)
    logger.info("Latency run of %d segments took %.2f s", report.segments, time.perf_counter() - started)
    segments = np.asarray(report.segment_times_ms or [0.0])
    samples = np.asarray(report.sample_times_ms or [0.0])
    return LatencyStats(
        segments=len(report.segment_times_ms),
        samples=len(report.sample_times_ms),
        segment_mean_ms=float(segments.mean()),
        segment_p99_ms=float(np.percentile(segments, 99)),
        sample_mean_ms=float(samples.mean()),
        sample_p99_ms=float(np.percentile(samples, 99)),
    )


def summary_table(reports: Dict[str, EvaluationReport]) -> str:
    """Fixed-width text table, one line per designer."""
    header = ["designer", *LEVEL_SUMMARY_FIELDS]
    lines = [header]
    for name, report in reports.items():
        summary = report.summary()
        lines.append([name, *(summary[field_name] for field_name in LEVEL_SUMMARY_FIELDS)])
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    return "\n".join("  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip() for line in lines)
