"""Designer training loop: rollouts in the design environment and PPO updates."""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
import torch

from app.core.config import RewardComponent, RunConfig
from app.core.exceptions import TrainingError
from app.models import LatentVector
from app.services.environment_service import MarioPuzzleEnv, Pipeline
from app.services.policy_service import DesignerPolicy
from app.services.ppo_service import RolloutBuffer, UpdateStats, make_optimizer, ppo_update
from app.services.reward_service import RunningNormalizer

logger = logging.getLogger(__name__)

TRAINING_LOG_FIELDS = (
    "step",
    "episodes",
    "mean_return",
    "mean_F",
    "mean_H",
    "mean_P",
    "policy_loss",
    "value_loss",
    "clip_fraction",
    "approx_kl",
)


@dataclass(frozen=True)
class TrainingLogRow:
    """Summary of one rollout and the update that followed it."""

    step: int
    episodes: int
    mean_return: float
    mean_F: float
    mean_H: float
    mean_P: float
    policy_loss: float
    value_loss: float
    clip_fraction: float
    approx_kl: float

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in TRAINING_LOG_FIELDS}


@dataclass
class TrainingLog:
    rows: List[TrainingLogRow] = field(default_factory=list)

    def append(self, row: TrainingLogRow) -> None:
        self.rows.append(row)


@dataclass
class TrainingResult:
    """Trained policy with everything a checkpoint needs."""

    policy: DesignerPolicy
    optimizer: torch.optim.Optimizer
    normalizers: Dict[RewardComponent, RunningNormalizer]
    log: TrainingLog
    steps: int


CheckpointHook = Callable[[TrainingResult], None]


class _EpisodeStats:
    def __init__(self):
        self.returns: List[float] = []
        self.playable: List[int] = []
        self.f_values: List[float] = []
        self.h_values: List[float] = []
        self.current_return = 0.0
        self.current_playable = 0

    def record(self, reward: float, info: dict) -> None:
        self.current_return += reward
        if info.get("playable"):
            self.current_playable += 1
            self.f_values.append(info["F"])
            self.h_values.append(info["H"])

    def end_episode(self) -> None:
        self.returns.append(self.current_return)
        self.playable.append(self.current_playable)
        self.current_return = 0.0
        self.current_playable = 0

    def roll(self) -> None:
        """Forget finished episodes, keep the one in progress."""
        self.returns.clear()
        self.playable.clear()
        self.f_values.clear()
        self.h_values.clear()


def _mean(values: List[float]) -> float:
    return float(np.mean(values)) if values else 0.0


def train(config: RunConfig, pipeline: Pipeline, checkpoint: Optional[CheckpointHook] = None) -> TrainingResult:
    """
    Train a designer policy for `config.train.total_steps` environment steps.

    Args:
        config: Run config (seed, reward, train and PPO sections)
        pipeline: Generator, repairer and tester
        checkpoint: Called every `checkpoint_every` updates and after the last one

    Returns:
        TrainingResult: Final policy, optimizer, normalizers and log

    Raises:
        TrainingError: If the configuration cannot be trained
        PolicyDivergenceError: If the policy diverges
    """
    ppo = config.train.ppo
    if ppo.minibatch_size > ppo.rollout_length:
        raise TrainingError("minibatch_size must not exceed rollout_length")

    policy = DesignerPolicy(ppo.hidden_size, ppo.init_log_std, seed=config.seed)
    optimizer = make_optimizer(policy, ppo)
    env = MarioPuzzleEnv(pipeline, config.reward, config.train.max_segments)
    result = TrainingResult(policy, optimizer, env.normalizers, TrainingLog(), 0)
    total = config.train.total_steps
    if total == 0:
        return result

    logger.info("Training %s policy for %d steps", config.reward.name, total)
    obs, _ = env.reset(seed=config.seed)
    buffer = RolloutBuffer()
    stats = _EpisodeStats()
    updates = 0

    for step in range(1, total + 1):
        state = LatentVector.from_array(obs)
        action, log_prob, value = policy.sample(state, stochastic=True)
        next_obs, reward, terminated, truncated, info = env.step(np.clip(action, -1.0, 1.0))
        stats.record(reward, info)

        bootstrap = 0.0
        if truncated:
            with torch.no_grad():
                bootstrap = float(policy.value(torch.as_tensor(next_obs).unsqueeze(0)).item())
        buffer.add(obs, action, log_prob, reward, value, terminated, truncated, bootstrap)

        if terminated or truncated:
            stats.end_episode()
            obs, _ = env.reset()
        else:
            obs = next_obs

        if len(buffer) == ppo.rollout_length or step == total:
            with torch.no_grad():
                last_value = float(policy.value(torch.as_tensor(obs).unsqueeze(0)).item())
            update: UpdateStats = ppo_update(
                policy, optimizer, buffer.finish(last_value, ppo), ppo, seed=config.seed + updates
            )
            updates += 1
            row = TrainingLogRow(
                step=step,
                episodes=len(stats.returns),
                mean_return=_mean(stats.returns),
                mean_F=_mean(stats.f_values),
                mean_H=_mean(stats.h_values),
                mean_P=_mean([float(p) for p in stats.playable]),
                policy_loss=update.policy_loss,
                value_loss=update.value_loss,
                clip_fraction=update.clip_fraction,
                approx_kl=update.approx_kl,
            )
            result.log.append(row)
            result.steps = step
            logger.info(
                "Update %d at step %d: return %.3f, clip %.3f, kl %.5f",
                updates,
                step,
                row.mean_return,
                row.clip_fraction,
                row.approx_kl,
            )
            buffer.clear()
            stats.roll()
            if checkpoint is not None and (updates % config.train.checkpoint_every == 0 or step == total):
                checkpoint(result)

    return result
