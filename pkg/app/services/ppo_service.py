"""Proximal policy optimization for the designer policy."""
import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
import torch
import torch.nn.functional as F

from app.core.config import PPOConfig
from app.core.exceptions import PolicyDivergenceError, TrainingError
from app.services.policy_service import DesignerPolicy

logger = logging.getLogger(__name__)


@dataclass
class RolloutBuffer:
    """
    Transitions of one rollout, in collection order.

    `bootstrap_values` holds the value of the final observation for steps
    that were truncated at the segment cap and 0 elsewhere.
    """

    states: List[np.ndarray] = field(default_factory=list)
    actions: List[np.ndarray] = field(default_factory=list)
    log_probs: List[float] = field(default_factory=list)
    rewards: List[float] = field(default_factory=list)
    values: List[float] = field(default_factory=list)
    terminated: List[bool] = field(default_factory=list)
    truncated: List[bool] = field(default_factory=list)
    bootstrap_values: List[float] = field(default_factory=list)

    def add(
        self,
        state: np.ndarray,
        action: np.ndarray,
        log_prob: float,
        reward: float,
        value: float,
        terminated: bool,
        truncated: bool,
        bootstrap_value: float = 0.0,
    ) -> None:
        self.states.append(np.asarray(state, dtype=np.float32))
        self.actions.append(np.asarray(action, dtype=np.float32))
        self.log_probs.append(float(log_prob))
        self.rewards.append(float(reward))
        self.values.append(float(value))
        self.terminated.append(bool(terminated))
        self.truncated.append(bool(truncated))
        self.bootstrap_values.append(float(bootstrap_value))

    def __len__(self) -> int:
        return len(self.rewards)

    def clear(self) -> None:
        for values in vars(self).values():
            values.clear()

    def finish(self, last_value: float, cfg: PPOConfig) -> "Batch":
        """Compute advantages and returns and freeze the rollout into tensors."""
        if not self.rewards:
            raise TrainingError("Rollout buffer is empty")
        advantages, returns = compute_gae(
            np.asarray(self.rewards),
            np.asarray(self.values),
            np.asarray(self.terminated),
            np.asarray(self.truncated),
            np.asarray(self.bootstrap_values),
            last_value,
            cfg.discount,
            cfg.gae_lambda,
        )
        advantages = (advantages - advantages.mean()) / (advantages.std() + 1e-8)
        return Batch(
            states=torch.as_tensor(np.stack(self.states), dtype=torch.float32),
            actions=torch.as_tensor(np.stack(self.actions), dtype=torch.float32),
            log_probs=torch.as_tensor(self.log_probs, dtype=torch.float32),
            advantages=torch.as_tensor(advantages, dtype=torch.float32),
            returns=torch.as_tensor(returns, dtype=torch.float32),
        )


@dataclass
class Batch:
    """Training tensors of one rollout."""

    states: torch.Tensor
    actions: torch.Tensor
    log_probs: torch.Tensor
    advantages: torch.Tensor
    returns: torch.Tensor

    def __len__(self) -> int:
        return int(self.states.shape[0])


@dataclass(frozen=True)
class UpdateStats:
    """Means over the minibatches of one update."""

    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float
    approx_kl: float


def compute_gae(
    rewards: np.ndarray,
    values: np.ndarray,
    terminated: np.ndarray,
    truncated: np.ndarray,
    bootstrap_values: np.ndarray,
    last_value: float,
    gamma: float,
    lam: float,
):
    """
    Generalized advantage estimation.

    Terminated steps have no successor value; truncated steps bootstrap from
    their stored final-observation value. Both stop the smoothing recursion.
    `last_value` is the value of the observation after the final step when
    the rollout ends mid-episode.

    Returns:
        Tuple[np.ndarray, np.ndarray]: advantages and returns
    """
    n = len(rewards)
    advantages = np.zeros(n, dtype=np.float64)
    gae = 0.0
    for t in reversed(range(n)):
        if terminated[t]:
            next_value, carry = 0.0, 0.0
        elif truncated[t]:
            next_value, carry = bootstrap_values[t], 0.0
        else:
            next_value = values[t + 1] if t + 1 < n else last_value
            carry = 1.0
        delta = rewards[t] + gamma * next_value - values[t]
        gae = delta + gamma * lam * carry * gae
        advantages[t] = gae
    return advantages, advantages + values


def clipped_surrogate(ratio: torch.Tensor, advantages: torch.Tensor, clip: float) -> torch.Tensor:
    """Elementwise min(r * A, clip(r, 1 - c, 1 + c) * A)."""
    return torch.min(ratio * advantages, torch.clamp(ratio, 1.0 - clip, 1.0 + clip) * advantages)


def surrogate_objective(
    log_probs: torch.Tensor, old_log_probs: torch.Tensor, advantages: torch.Tensor, clip: float
) -> torch.Tensor:
    """Mean clipped surrogate (to be maximized)."""
    return clipped_surrogate(torch.exp(log_probs - old_log_probs), advantages, clip).mean()


def make_optimizer(policy: DesignerPolicy, cfg: PPOConfig) -> torch.optim.Optimizer:
    return torch.optim.Adam(policy.parameters(), lr=cfg.learning_rate)


def ppo_update(
    policy: DesignerPolicy,
    optimizer: torch.optim.Optimizer,
    batch: Batch,
    cfg: PPOConfig,
    seed: int = 0,
) -> UpdateStats:
    """
    Several epochs of clipped-surrogate updates over shuffled minibatches.

    Args:
        policy: Policy to update in place
        optimizer: Optimizer over the policy parameters
        batch: Rollout tensors with advantages and returns
        cfg: PPO hyperparameters
        seed: Minibatch shuffling seed

    Returns:
        UpdateStats: Loss and divergence statistics

    Raises:
        TrainingError: If the batch is empty
        PolicyDivergenceError: If a loss becomes non-finite
    """
    size = len(batch)
    if size == 0:
        raise TrainingError("Cannot update from an empty batch")

    generator = torch.Generator()
    generator.manual_seed(seed)
    totals = {"policy_loss": 0.0, "value_loss": 0.0, "entropy": 0.0, "clip_fraction": 0.0, "approx_kl": 0.0}
    count = 0

    for _ in range(cfg.update_epochs):
        order = torch.randperm(size, generator=generator)
        for start in range(0, size, cfg.minibatch_size):
            idx = order[start:start + cfg.minibatch_size]
            log_probs, entropy, values = policy.evaluate(batch.states[idx], batch.actions[idx])
            old_log_probs = batch.log_probs[idx]

            policy_loss = -surrogate_objective(log_probs, old_log_probs, batch.advantages[idx], cfg.clip_ratio)
            value_loss = F.mse_loss(values, batch.returns[idx])
            entropy_mean = entropy.mean()
            loss = policy_loss + cfg.value_coef * value_loss - cfg.entropy_coef * entropy_mean
            if not torch.isfinite(loss):
                raise PolicyDivergenceError("PPO loss is not finite")

            optimizer.zero_grad()
            loss.backward()
            torch.nn.utils.clip_grad_norm_(policy.parameters(), max_norm=cfg.max_grad_norm)
            optimizer.step()

            with torch.no_grad():
                log_ratio = log_probs - old_log_probs
                totals["policy_loss"] += policy_loss.item()
                totals["value_loss"] += value_loss.item()
                totals["entropy"] += entropy_mean.item()
                totals["clip_fraction"] += ((log_ratio.exp() - 1.0).abs() > cfg.clip_ratio).float().mean().item()
                totals["approx_kl"] += ((log_ratio.exp() - 1.0) - log_ratio).mean().item()
            count += 1

    return UpdateStats(**{key: value / count for key, value in totals.items()})
