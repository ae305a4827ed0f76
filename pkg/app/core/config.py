"""Application configuration using Pydantic Settings and the YAML run config."""
import math
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.core.exceptions import ConfigError


class Settings(BaseSettings):
    """Process settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Run artifacts used by the HTTP service
    run_config_path: Optional[str] = Field(default=None, alias="RUN_CONFIG")
    policy_path: Optional[str] = Field(default=None, alias="POLICY_PATH")
    pool_path: Optional[str] = Field(default=None, alias="POOL_PATH")

    # Determinism: torch intra-op threads
    torch_threads: int = Field(default=1, alias="TORCH_THREADS")

    # API settings
    api_v1_prefix: str = Field(default="/api/v1", alias="API_V1_PREFIX")

    # Logging
    log_level: str = Field(default="INFO", alias="LOG_LEVEL")


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


class _Section(BaseModel):
    """Base for run config sections: unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid", frozen=True)


class BackendKind(str, Enum):
    """Generator backend kinds."""

    POOL = "pool"
    PROCEDURAL = "procedural"
    EXTERNAL = "external-decoder"


class RewardComponent(str, Enum):
    """Reward components: fun, historical deviation, playability."""

    F = "F"
    H = "H"
    P = "P"


class ResampleMode(str, Enum):
    """How online generation replaces an unplayable candidate."""

    POLICY = "policy"
    RANDOM = "random"


class ActMode(str, Enum):
    """Policy action mode."""

    STOCHASTIC = "stochastic"
    MEAN = "mean"


DEFAULT_LEVEL_TYPES: Dict[str, List[str]] = {
    "underground": ["mario-1-2*", "mario-4-2*"],
    "athletic": ["mario-1-3*", "mario-3-3*", "mario-5-3*", "mario-6-3*"],
}


class BackendConfig(_Section):
    """Generator backend choice and segment geometry."""

    kind: BackendKind = BackendKind.PROCEDURAL
    segment_width: int = Field(default=14, ge=2)
    segment_height: int = Field(default=14, ge=2)
    pool_stride: int = Field(default=14, ge=1)
    pool_seed: int = 0

    @model_validator(mode="after")
    def check_procedural_geometry(self) -> "BackendConfig":
        if self.kind == BackendKind.PROCEDURAL and (
            self.segment_width != 14 or self.segment_height != 14
        ):
            raise ValueError("procedural backend decodes 14x14 segments only")
        return self


class CorpusConfig(_Section):
    """Corpus ingestion: level-type tags by filename pattern and analysis strides."""

    level_types: Dict[str, List[str]] = Field(default_factory=lambda: dict(DEFAULT_LEVEL_TYPES))
    default_type: str = "overworld"
    strides: List[int] = Field(default_factory=lambda: [1, 14])

    @field_validator("strides")
    @classmethod
    def validate_strides(cls, v: List[int]) -> List[int]:
        """Validate strides."""
        if not v or any(s < 1 for s in v):
            raise ValueError("strides must be a nonempty list of integers >= 1")
        return v


class MetricConfig(_Section):
    """Reward metric hyperparameters."""

    pattern_size: int = Field(default=2, ge=1)
    epsilon: float = Field(default=0.001, gt=0)
    window_w: int = Field(default=14, ge=1)
    window_h: int = Field(default=14, ge=1)
    n: int = Field(default=3, ge=0)
    d: int = Field(default=7, ge=1)
    l: float = 0.26
    u: float = 0.94
    m: int = Field(default=20, ge=1)
    k: int = Field(default=10, ge=1)

    @model_validator(mode="after")
    def check_bounds(self) -> "MetricConfig":
        if not 0 < self.l < self.u:
            raise ValueError("fun bounds must satisfy 0 < l < u")
        if self.k > self.m:
            raise ValueError("historical deviation requires 1 <= k <= m")
        return self


class PhysicsParams(_Section):
    """Tick-model physics of the playability agent."""

    max_jump_rise: int = Field(default=4, gt=0)
    max_air_steps: int = Field(default=10, gt=0)
    horizontal_air_control: int = Field(default=1, gt=0)
    gravity: int = Field(default=1, gt=0)


class RewardConfig(_Section):
    """Which metrics form the reward and the normalizer window."""

    components: List[RewardComponent] = Field(
        default_factory=lambda: [RewardComponent.F, RewardComponent.H, RewardComponent.P]
    )
    normalizer_window: int = Field(default=1000, ge=1)

    @field_validator("components")
    @classmethod
    def validate_components(cls, v: List[RewardComponent]) -> List[RewardComponent]:
        """Deduplicate into canonical F, H, P order."""
        if not v:
            raise ValueError("reward needs at least one component")
        return [c for c in RewardComponent if c in v]

    @property
    def name(self) -> str:
        """Short name such as FHP."""
        return "".join(c.value for c in self.components)

    def uses(self, component: RewardComponent) -> bool:
        """Whether a component is part of the reward."""
        return component in self.components


class PPOConfig(_Section):
    """PPO hyperparameters."""

    clip_ratio: float = Field(default=0.2, gt=0)
    discount: float = Field(default=0.99, ge=0, le=1)
    gae_lambda: float = Field(default=0.95, ge=0, le=1)
    rollout_length: int = Field(default=2048, ge=1)
    minibatch_size: int = Field(default=64, ge=1)
    update_epochs: int = Field(default=4, ge=1)
    learning_rate: float = Field(default=3e-4, gt=0)
    entropy_coef: float = Field(default=0.01, ge=0)
    value_coef: float = Field(default=0.5, ge=0)
    max_grad_norm: float = Field(default=0.5, gt=0)
    hidden_size: int = Field(default=64, ge=1)
    init_log_std: float = math.log(0.5)


class TrainConfig(_Section):
    """Training loop limits."""

    total_steps: int = Field(default=100_000, ge=0)
    max_segments: int = Field(default=100, ge=1)
    checkpoint_every: int = Field(default=10, ge=1)
    ppo: PPOConfig = Field(default_factory=PPOConfig)


class OnlineConfig(_Section):
    """Online endless generation."""

    resample_mode: ResampleMode = ResampleMode.RANDOM
    resample_cap: int = Field(default=20, ge=1)
    target_segments: int = Field(default=100, ge=1)
    time_budget_ms: Optional[float] = Field(default=None, gt=0)
    act_mode: ActMode = ActMode.STOCHASTIC


class EvaluationConfig(_Section):
    """Batch evaluation protocol."""

    initial_segments: int = Field(default=30, ge=1)
    trials_per_init: int = Field(default=10, ge=1)
    max_segments: int = Field(default=100, ge=1)
    workers: int = Field(default=1, ge=1)
    latency_segments: int = Field(default=100, ge=1)


class PathsConfig(_Section):
    """Input artifact locations and the output root."""

    corpus_dir: Optional[str] = None
    alphabet_path: Optional[str] = None
    pool_path: Optional[str] = None
    decoder_path: Optional[str] = None
    policy_path: Optional[str] = None
    out_dir: str = "runs"


class RunConfig(_Section):
    """Complete configuration of one run."""

    seed: int = 0
    backend: BackendConfig = Field(default_factory=BackendConfig)
    corpus: CorpusConfig = Field(default_factory=CorpusConfig)
    metrics: MetricConfig = Field(default_factory=MetricConfig)
    physics: PhysicsParams = Field(default_factory=PhysicsParams)
    reward: RewardConfig = Field(default_factory=RewardConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    online: OnlineConfig = Field(default_factory=OnlineConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    paths: PathsConfig = Field(default_factory=PathsConfig)

    @model_validator(mode="after")
    def check_geometry(self) -> "RunConfig":
        if self.physics.max_jump_rise > self.backend.segment_height - 1:
            raise ValueError("max_jump_rise must not exceed segment height - 1")
        if (self.metrics.window_w, self.metrics.window_h) != (
            self.backend.segment_width,
            self.backend.segment_height,
        ):
            raise ValueError("diversity window must have the segment's size")
        return self

    def with_overrides(self, **updates) -> "RunConfig":
        """
        Return a validated copy with top-level or dotted-path overrides.

        Args:
            updates: e.g. seed=3 or **{"paths.out_dir": "x"}

        Returns:
            RunConfig: New config
        """
        data = self.model_dump(mode="json")
        for key, value in updates.items():
            if value is None:
                continue
            node = data
            *parents, leaf = key.split(".")
            for part in parents:
                node = node[part]
            node[leaf] = value
        return parse_run_config(data)


def parse_run_config(data: dict) -> RunConfig:
    """
    Validate a run config mapping.

    Args:
        data: Parsed config document

    Returns:
        RunConfig: Validated config

    Raises:
        ConfigError: If the document is invalid
    """
    if not isinstance(data, dict):
        raise ConfigError("Run config must be a mapping")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid run config: {e}") from e


def load_run_config(path: Optional[str | Path] = None) -> RunConfig:
    """
    Load the YAML run config, or defaults when no path is given.

    Args:
        path: Config file path

    Returns:
        RunConfig: Validated config

    Raises:
        ConfigError: If the file is missing or invalid
    """
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config file '{path}'") from e
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"Config file '{path}' is not valid YAML") from e
    return parse_run_config(data)
