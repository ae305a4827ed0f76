from pathlib import Path

import pytest

from app.core.config import (
    BackendKind,
    ResampleMode,
    RewardComponent,
    RunConfig,
    Settings,
    load_run_config,
    parse_run_config,
)
from app.core.exceptions import ConfigError


def test_defaults():
    config = load_run_config(None)
    assert config == RunConfig()
    assert config.backend.kind == BackendKind.PROCEDURAL
    assert config.reward.name == "FHP"
    assert (config.metrics.l, config.metrics.u) == (0.26, 0.94)
    assert config.train.ppo.rollout_length == 2048


def test_shipped_config_matches_defaults():
    config = load_run_config(Path(__file__).parent.parent / "configs" / "default.yaml")
    assert config.model_dump(exclude={"paths"}) == RunConfig().model_dump(exclude={"paths"})
    assert config.paths.corpus_dir == "data/vglc"


def test_yaml_overrides(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("seed: 7\nonline:\n  resample_mode: policy\nreward:\n  components: [P, F]\n")
    config = load_run_config(path)
    assert config.seed == 7
    assert config.online.resample_mode == ResampleMode.POLICY
    assert config.reward.components == [RewardComponent.F, RewardComponent.P]


@pytest.mark.parametrize(
    "text",
    [
        "seed: [unclosed\n",
        "unknown_section: 1\n",
        "metrics:\n  l: 0.9\n  u: 0.5\n",
        "backend:\n  segment_width: 16\n",
        "physics:\n  max_jump_rise: 14\n",
        "- just\n- a list\n",
    ],
)
def test_invalid_configs(tmp_path, text):
    path = tmp_path / "run.yaml"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_run_config(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "absent.yaml")


def test_dotted_overrides():
    config = RunConfig().with_overrides(**{"seed": 3, "train.ppo.clip_ratio": 0.1, "paths.out_dir": None})
    assert config.seed == 3
    assert config.train.ppo.clip_ratio == 0.1
    assert config.paths.out_dir == "runs"
    with pytest.raises(ConfigError):
        RunConfig().with_overrides(**{"train.ppo.clip_ratio": -1})


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("RUN_CONFIG", "configs/default.yaml")
    monkeypatch.setenv("TORCH_THREADS", "2")
    settings = Settings()
    assert settings.run_config_path == "configs/default.yaml"
    assert settings.torch_threads == 2


def test_parse_rejects_non_mapping():
    with pytest.raises(ConfigError):
        parse_run_config(["seed"])
