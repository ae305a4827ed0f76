"""Tile-pattern KL-divergence and the diversity, fun and historical-deviation metrics."""
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from app.core.config import MetricConfig
from app.core.exceptions import CorpusError
from app.models import Level, Segment

logger = logging.getLogger(__name__)

TOTAL_TYPE = "total"


@dataclass(frozen=True)
class PatternDistribution:
    """Occurrence counts of p x p tile patterns, keyed by the row-major glyph string."""

    counts: Mapping[str, int]
    pattern_size: int

    @property
    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class DiversityStats:
    """Diversity mean and population std of one level type at one stride."""

    level_type: str
    stride: int
    count: int
    mean: float
    std: float


def pattern_distribution(rows: Sequence[str], p: int = 2) -> PatternDistribution:
    """
    Count every p x p window of a region (stride 1, no wrap-around).

    Args:
        rows: Region rows, all of equal width
        p: Pattern size

    Returns:
        PatternDistribution: Pattern counts
    """
    height = len(rows)
    width = len(rows[0]) if rows else 0
    if height < p or width < p:
        raise ValueError(f"region {height}x{width} is smaller than pattern size {p}")
    counts: Counter = Counter()
    for r in range(height - p + 1):
        band = rows[r:r + p]
        for c in range(width - p + 1):
            counts["".join(line[c:c + p] for line in band)] += 1
    return PatternDistribution(dict(counts), p)


def kl_divergence(a: PatternDistribution, b: PatternDistribution, epsilon: float = 0.001) -> float:
    """
    KL(a || b) in nats over the union support with additive epsilon smoothing.

    Each probability is (count + epsilon) / (total + epsilon * |U|).
    """
    if a.total == 0 or b.total == 0:
        raise ValueError("KL divergence of an empty distribution")
    if a.pattern_size != b.pattern_size:
        raise ValueError(f"pattern size mismatch: {a.pattern_size} vs {b.pattern_size}")
    support = set(a.counts) | set(b.counts)
    norm_a = a.total + epsilon * len(support)
    norm_b = b.total + epsilon * len(support)
    terms = []
    for pattern in support:
        pa = (a.counts.get(pattern, 0) + epsilon) / norm_a
        pb = (b.counts.get(pattern, 0) + epsilon) / norm_b
        terms.append(pa * math.log(pa / pb))
    return max(0.0, math.fsum(terms))


def segment_distribution(segment: Segment, cfg: MetricConfig) -> PatternDistribution:
    return pattern_distribution(segment.rows, cfg.pattern_size)


def diversity(level: Level, seg_start: int, cfg: MetricConfig) -> float:
    """
    Mean KL between the segment at `seg_start` and the windows trailing it.

    Windows start at seg_start - i*d for i = 0..n' where n' = min(n, seg_start // d);
    the i = 0 window is the segment itself.
    """
    if seg_start < 0 or seg_start + cfg.window_w > level.width:
        raise IndexError(f"segment window at column {seg_start} outside level width {level.width}")
    current = pattern_distribution(level.window(seg_start, cfg.window_w).rows, cfg.pattern_size)
    strides = min(cfg.n, seg_start // cfg.d)
    total = 0.0
    for i in range(strides + 1):
        window = level.window(seg_start - i * cfg.d, cfg.window_w)
        total += kl_divergence(current, pattern_distribution(window.rows, cfg.pattern_size), cfg.epsilon)
    return total / (strides + 1)


def fun(d_value: float, cfg: MetricConfig) -> float:
    """Zero inside [l, u], negative squared distance to the band outside."""
    if d_value > cfg.u:
        return -((d_value - cfg.u) ** 2)
    if d_value < cfg.l:
        return -((d_value - cfg.l) ** 2)
    return 0.0


def historical_deviation(segment: Segment, history: Sequence[Segment], cfg: MetricConfig) -> float:
    """
    Mean KL to the k nearest of the most recent m segments.

    Args:
        segment: New segment
        history: Previous segments, oldest first
        cfg: Metric config

    Returns:
        float: H, 0 for an empty history
    """
    if not history:
        return 0.0
    recent = history[-cfg.m:]
    current = segment_distribution(segment, cfg)
    divergences = sorted(
        kl_divergence(current, segment_distribution(previous, cfg), cfg.epsilon) for previous in recent
    )
    nearest = divergences[: min(cfg.k, len(recent))]
    return math.fsum(nearest) / len(nearest)


def segment_metrics(
    level: Level, seg_index: int, history: Sequence[Segment], cfg: MetricConfig
) -> Tuple[float, float, float]:
    """
    D, F and H of the segment at `seg_index`.

    Args:
        level: Level containing the segment
        seg_index: Segment index within the level
        history: Segments generated before it, oldest first
        cfg: Metric config

    Returns:
        Tuple[float, float, float]: (D, F, H)
    """
    d_value = diversity(level, seg_index * level.segment_width, cfg)
    h_value = historical_deviation(level.segment(seg_index), history, cfg)
    return d_value, fun(d_value, cfg), h_value


def corpus_diversity_stats(
    corpus: Iterable[Tuple[Level, str]], cfg: MetricConfig, stride: int = 1
) -> Dict[str, DiversityStats]:
    """
    Diversity statistics per level type over every sliced segment position.

    Args:
        corpus: (level, type tag) pairs
        cfg: Metric config
        stride: Column step between evaluated segment positions

    Returns:
        Dict[str, DiversityStats]: One entry per type plus a "total" entry
    """
    values: Dict[str, List[float]] = defaultdict(list)
    for level, level_type in corpus:
        if level.width < cfg.window_w:
            logger.warning("Level narrower than the diversity window skipped (%s)", level_type)
            continue
        for start in range(0, level.width - cfg.window_w + 1, stride):
            values[level_type].append(diversity(level, start, cfg))
    if not values:
        raise CorpusError("Corpus is empty")

    values[TOTAL_TYPE] = [v for key in list(values) for v in values[key]]
    stats: Dict[str, DiversityStats] = {}
    for level_type, samples in values.items():
        arr = np.asarray(samples, dtype=np.float64)
        stats[level_type] = DiversityStats(
            level_type=level_type,
            stride=stride,
            count=len(samples),
            mean=float(arr.mean()),
            std=float(arr.std()),
        )
    return stats
