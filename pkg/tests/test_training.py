import numpy as np
import pytest
import torch

from app.core.config import EvaluationConfig, RunConfig
from app.core.exceptions import TrainingError
from app.models import LatentVector, Segment
from app.services.environment_service import Pipeline
from app.services.evaluation_service import evaluate_policy, sample_initial_states
from app.services.generator_service import PoolBackend, PoolEntry, SegmentPool
from app.services.policy_service import DesignerPolicy, RandomDesigner
from app.services.training_service import TRAINING_LOG_FIELDS, train
from tests.conftest import flat_rows, with_tiles


def _config(**overrides) -> RunConfig:
    base = {
        "train.total_steps": 8,
        "train.max_segments": 3,
        "train.checkpoint_every": 1,
        "train.ppo.rollout_length": 4,
        "train.ppo.minibatch_size": 2,
        "train.ppo.update_epochs": 1,
        "train.ppo.hidden_size": 16,
    }
    base.update(overrides)
    return RunConfig().with_overrides(**base)


def test_zero_steps_returns_initial_policy(flat_pipeline):
    config = _config(**{"train.total_steps": 0})
    result = train(config, flat_pipeline)
    reference = DesignerPolicy(16, seed=config.seed)
    assert result.steps == 0
    assert result.log.rows == []
    for a, b in zip(result.policy.parameters(), reference.parameters()):
        assert torch.equal(a, b)


def test_minibatch_larger_than_rollout_is_rejected(flat_pipeline):
    with pytest.raises(TrainingError):
        train(_config(**{"train.ppo.minibatch_size": 8}), flat_pipeline)


def test_short_run_logs_every_update(flat_pipeline):
    saved = []
    result = train(_config(), flat_pipeline, checkpoint=lambda r: saved.append(r.steps))
    assert result.steps == 8
    assert [row.step for row in result.log.rows] == [4, 8]
    assert saved == [4, 8]
    row = result.log.rows[-1].as_dict()
    assert tuple(row) == TRAINING_LOG_FIELDS
    # every episode on the flat pool runs to the segment cap
    assert row["mean_P"] == 3.0


def test_training_is_reproducible(flat_pipeline):
    first = train(_config(), flat_pipeline)
    second = train(_config(), flat_pipeline)
    for a, b in zip(first.policy.parameters(), second.policy.parameters()):
        assert torch.equal(a, b)


def _two_way_pipeline(config: RunConfig, default: Segment, chosen: Segment) -> Pipeline:
    # `chosen` decodes only when the latent mean exceeds 0.15
    pool = SegmentPool(
        (
            PoolEntry(default, LatentVector.zeros()),
            PoolEntry(chosen, LatentVector.from_array(np.full(32, 0.3))),
        ),
        seed=0,
        corpus_hash="test",
    )
    return Pipeline.from_config(config, PoolBackend(pool))


def _learning_config(**overrides) -> RunConfig:
    return _config(
        **{
            "train.total_steps": 3072,
            "train.ppo.rollout_length": 64,
            "train.ppo.minibatch_size": 16,
            "train.ppo.update_epochs": 4,
            "train.ppo.learning_rate": 1e-3,
            "train.checkpoint_every": 100,
            **overrides,
        }
    )


@pytest.mark.slow
def test_playability_training_beats_random_designer(flat_segment, wall_segment):
    config = _learning_config(**{"reward.components": ["P"], "train.max_segments": 5})
    pipeline = _two_way_pipeline(config, wall_segment, flat_segment)
    result = train(config, pipeline)

    cfg = EvaluationConfig(initial_segments=10, trials_per_init=5, max_segments=5)
    inits = sample_initial_states(pipeline, cfg.initial_segments, seed=1)
    trained = evaluate_policy(lambda: result.policy, pipeline, inits, cfg, stop_on_unplayable=True, seed=1)
    baseline = evaluate_policy(lambda: RandomDesigner(1), pipeline, inits, cfg, stop_on_unplayable=True, seed=1)
    assert trained.P.mean > baseline.P.mean


@pytest.mark.slow
def test_fun_training_raises_mean_fun(flat_segment):
    # after flat ground, a full-width block row lands diversity inside the fun band
    platform = Segment.from_rows(with_tiles(flat_rows(), [(8, c, "?") for c in range(14)]))
    config = _learning_config(
        **{"reward.components": ["F"], "train.max_segments": 1, "train.ppo.discount": 0.0}
    )
    pipeline = _two_way_pipeline(config, flat_segment, platform)
    result = train(config, pipeline)
    untrained = DesignerPolicy(16, config.train.ppo.init_log_std, seed=config.seed)

    cfg = EvaluationConfig(initial_segments=10, trials_per_init=5, max_segments=1)
    inits = sample_initial_states(pipeline, cfg.initial_segments, seed=1)
    trained = evaluate_policy(lambda: result.policy, pipeline, inits, cfg, stop_on_unplayable=False, seed=1)
    before = evaluate_policy(lambda: untrained, pipeline, inits, cfg, stop_on_unplayable=False, seed=1)
    assert trained.F.mean > before.F.mean
