import pytest

from app.core.config import RewardComponent, RewardConfig
from app.core.exceptions import RewardError
from app.services.reward_service import RunningNormalizer, compose_reward, make_normalizers

F, H, P = RewardComponent.F, RewardComponent.H, RewardComponent.P


def test_normalizer_scales_by_running_range():
    normalizer = RunningNormalizer(window=10)
    assert normalizer.push(1.0) == 0.5
    assert normalizer.push(3.0) == 1.0
    assert normalizer.push(2.0) == 0.5
    assert normalizer.normalize(-5.0) == 0.0
    assert normalizer.normalize(9.0) == 1.0


def test_normalizer_forgets_old_values():
    normalizer = RunningNormalizer(window=2)
    normalizer.push(0.0)
    normalizer.push(10.0)
    assert normalizer.push(5.0) == 0.0
    assert len(normalizer) == 2


def test_normalizer_state_round_trip():
    normalizer = RunningNormalizer(window=3)
    for value in (1.0, 4.0, 2.0, 8.0):
        normalizer.push(value)
    restored = RunningNormalizer(window=3)
    restored.load_state(normalizer.state())
    assert restored.state() == [4.0, 2.0, 8.0]
    assert restored.normalize(6.0) == normalizer.normalize(6.0)


def test_normalizer_rejects_empty_window():
    with pytest.raises(ValueError):
        RunningNormalizer(window=0)


def test_playability_only_reward_is_raw():
    cfg = RewardConfig(components=[P])
    assert compose_reward({P: 1.0}, make_normalizers(cfg), cfg) == 1.0


def test_full_reward_sums_normalized_components():
    cfg = RewardConfig()
    normalizers = make_normalizers(cfg)
    assert compose_reward({F: -0.1, H: 2.0, P: 1.0}, normalizers, cfg) == 2.0
    assert compose_reward({F: 0.0, H: 1.0, P: 1.0}, normalizers, cfg) == 2.0
    assert len(normalizers[F]) == 2


def test_missing_component_raises():
    cfg = RewardConfig(components=[F, H])
    with pytest.raises(RewardError):
        compose_reward({F: 0.0}, make_normalizers(cfg), cfg)


def test_reward_config_name_is_canonical():
    assert RewardConfig(components=[P, F, P]).name == "FP"
