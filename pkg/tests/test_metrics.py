import math
from collections import Counter

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.config import MetricConfig
from app.core.exceptions import CorpusError
from app.models import LatentVector, Level, Segment
from app.services.generator_service import procedural_decode
from app.services.metrics_service import (
    TOTAL_TYPE,
    corpus_diversity_stats,
    diversity,
    fun,
    historical_deviation,
    kl_divergence,
    pattern_distribution,
    segment_metrics,
)
from tests.conftest import flat_rows


def _random_segment(rng) -> Segment:
    return procedural_decode(LatentVector.from_array(rng.uniform(-1, 1, 32)))


def _reference_kl(rows_a, rows_b, p=2, eps=0.001):
    def patterns(rows):
        return Counter(
            tuple(tuple(rows[r + i][c + j] for j in range(p)) for i in range(p))
            for r in range(len(rows) - p + 1)
            for c in range(len(rows[0]) - p + 1)
        )

    a, b = patterns(rows_a), patterns(rows_b)
    support = set(a) | set(b)
    za = sum(a.values()) + eps * len(support)
    zb = sum(b.values()) + eps * len(support)
    return sum(
        (a[x] + eps) / za * math.log(((a[x] + eps) / za) / ((b[x] + eps) / zb)) for x in support
    )


def _reference_diversity(rows, seg_start, n=3, d=7, width=14):
    def columns(start):
        return [row[start:start + width] for row in rows]

    steps = min(n, seg_start // d)
    terms = [_reference_kl(columns(seg_start), columns(seg_start - i * d)) for i in range(steps + 1)]
    return sum(terms) / len(terms)


def _reference_deviation(rows, history, m=20, k=10):
    if not history:
        return 0.0
    values = sorted(_reference_kl(rows, previous) for previous in history[-m:])[:k]
    return sum(values) / len(values)


def _random_level(rng, segments) -> Level:
    glyphs = np.array(list("--------XXS?oE"))
    grid = rng.choice(glyphs, size=(14, 14 * segments))
    return Level(tuple("".join(row) for row in grid))


def test_pattern_distribution_counts_every_window():
    dist = pattern_distribution(Segment.filled("-").rows)
    assert dist.counts == {"----": 169}
    with pytest.raises(ValueError):
        pattern_distribution(["-"], 2)


def test_kl_of_identical_distributions_is_zero():
    dist = pattern_distribution(flat_rows())
    assert kl_divergence(dist, dist) == 0.0


def test_kl_empty_against_solid():
    empty = pattern_distribution(Segment.filled("-").rows)
    solid = pattern_distribution(Segment.filled("X").rows)
    assert kl_divergence(empty, solid) == pytest.approx(12.0375, abs=1e-3)


def test_kl_matches_reference_on_random_segments():
    rng = np.random.default_rng(7)
    for _ in range(25):
        a, b = _random_segment(rng), _random_segment(rng)
        value = kl_divergence(pattern_distribution(a.rows), pattern_distribution(b.rows))
        assert value == pytest.approx(_reference_kl(a.rows, b.rows), abs=1e-9)
        assert value >= 0.0


def test_diversity_of_first_segment_is_zero():
    cfg = MetricConfig()
    level = Level.from_segments([Segment.filled("X"), Segment.filled("-")])
    assert diversity(level, 0, cfg) == 0.0


def test_diversity_averages_trailing_windows():
    cfg = MetricConfig()
    # solid columns 0-6, flat ground from column 7 on; S starts at column 21
    rows = [("X" * 7) + row for row in flat_rows(width=28)]
    level = Level(tuple(rows))
    assert level.width == 35
    flat = pattern_distribution(flat_rows())
    oldest = pattern_distribution([row[0:14] for row in rows])
    # windows at 21, 14 and 7 are flat, only the window at 0 differs
    expected = kl_divergence(flat, oldest) / 4
    assert expected > 0
    assert diversity(level, 21, cfg) == pytest.approx(expected, abs=1e-12)
    assert diversity(level, 21, cfg) == pytest.approx(_reference_diversity(rows, 21), abs=1e-9)
    with pytest.raises(IndexError):
        diversity(level, 22, cfg)


def test_diversity_and_deviation_match_reference_on_random_levels():
    cfg = MetricConfig()
    rng = np.random.default_rng(13)
    for _ in range(50):
        level = _random_level(rng, int(rng.integers(1, 6)))
        for start in range(0, level.width - 14 + 1, 7):
            expected = _reference_diversity(level.rows, start)
            assert diversity(level, start, cfg) == pytest.approx(expected, abs=1e-9)

        segments = level.segments
        current, history = segments[-1], [s.rows for s in segments[:-1]]
        value = historical_deviation(current, segments[:-1], cfg)
        assert value == pytest.approx(_reference_deviation(current.rows, history), abs=1e-9)


def test_diversity_ignores_appended_segments():
    cfg = MetricConfig()
    rng = np.random.default_rng(17)
    for _ in range(10):
        level = _random_level(rng, 3)
        longer = Level(tuple(a + b for a, b in zip(level.rows, _random_level(rng, 2).rows)))
        for start in (0, 14, 28):
            assert diversity(longer, start, cfg) == diversity(level, start, cfg)


def test_fun_on_random_diversity_values():
    cfg = MetricConfig()
    values = np.sort(np.random.default_rng(5).uniform(0.0, 3.0, 10_000))
    scores = np.array([fun(float(d), cfg) for d in values])
    assert (scores <= 0.0).all()
    inside = (values >= cfg.l) & (values <= cfg.u)
    assert (scores[inside] == 0.0).all()
    # penalty grows with distance from the band on both sides
    assert (np.diff(scores[values < cfg.l]) >= 0.0).all()
    assert (np.diff(scores[values > cfg.u]) <= 0.0).all()
    for edge in (cfg.l, cfg.u):
        assert fun(edge - 1e-6, cfg) == pytest.approx(0.0, abs=1e-11)
        assert fun(edge + 1e-6, cfg) == pytest.approx(0.0, abs=1e-11)


@pytest.mark.parametrize(
    "d_value, expected",
    [(0.5, 0.0), (0.26, 0.0), (0.94, 0.0), (0.1, -0.0256), (1.0, -0.0036), (0.0, -0.0676)],
)
def test_fun_band(d_value, expected):
    assert fun(d_value, MetricConfig()) == pytest.approx(expected)


def test_historical_deviation_uses_k_nearest():
    cfg = MetricConfig(m=3, k=2)
    flat, solid, empty = Segment.from_rows(flat_rows()), Segment.filled("X"), Segment.filled("-")
    current = pattern_distribution(flat.rows)
    to_solid = kl_divergence(current, pattern_distribution(solid.rows))
    to_empty = kl_divergence(current, pattern_distribution(empty.rows))

    assert historical_deviation(flat, [], cfg) == 0.0
    assert historical_deviation(flat, [flat], cfg) == 0.0
    assert historical_deviation(flat, [solid, flat], cfg) == pytest.approx(to_solid / 2)
    # only the last m segments count
    history = [flat, flat, solid, empty, solid]
    nearest = sorted([to_solid, to_empty, to_solid])[:2]
    assert historical_deviation(flat, history, cfg) == pytest.approx(sum(nearest) / 2)


def test_historical_deviation_reads_only_last_m_segments():
    cfg = MetricConfig()
    rng = np.random.default_rng(23)
    current = _random_level(rng, 1).segments[0]
    history = _random_level(rng, 25).segments
    baseline = historical_deviation(current, history, cfg)

    planted_outside = list(history)
    planted_outside[-21] = current
    assert historical_deviation(current, planted_outside, cfg) == baseline

    planted_inside = list(history)
    planted_inside[-20] = current
    assert historical_deviation(current, planted_inside, cfg) < baseline


def test_segment_metrics_of_uniform_level():
    cfg = MetricConfig()
    flat = Segment.from_rows(flat_rows())
    level = Level.from_segments([flat] * 4)
    d_value, f_value, h_value = segment_metrics(level, 3, [flat] * 3, cfg)
    assert d_value == 0.0
    assert f_value == pytest.approx(-(cfg.l ** 2))
    assert h_value == 0.0


def test_metric_config_bounds():
    with pytest.raises(ValidationError):
        MetricConfig(l=0.9, u=0.5)
    with pytest.raises(ValidationError):
        MetricConfig(m=3, k=4)


def test_corpus_diversity_stats_per_type():
    cfg = MetricConfig()
    flat = Level.from_segments([Segment.from_rows(flat_rows())] * 2)
    mixed = Level.from_segments([Segment.filled("X"), Segment.from_rows(flat_rows())])
    stats = corpus_diversity_stats([(flat, "overworld"), (mixed, "underground")], cfg, stride=14)

    assert stats["overworld"].count == 2
    assert stats["overworld"].mean == 0.0
    assert stats["underground"].count == 2
    assert stats[TOTAL_TYPE].count == 4
    assert stats[TOTAL_TYPE].mean == pytest.approx(stats["underground"].mean / 2)


def test_corpus_diversity_stats_rejects_empty_corpus():
    with pytest.raises(CorpusError):
        corpus_diversity_stats([], MetricConfig())
