"""Designer policy checkpoints (torch)."""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import torch

from app.core.config import RewardConfig, TrainConfig
from app.core.exceptions import CheckpointFormatError
from app.repositories.base import BaseRepository
from app.services.policy_service import DesignerPolicy

logger = logging.getLogger(__name__)

POLICY_FORMAT = "edrl-policy"
POLICY_VERSION = 1


@dataclass
class PolicyCheckpoint:
    """Everything needed to resume or deploy a trained designer."""

    policy: DesignerPolicy
    reward: RewardConfig
    train: TrainConfig
    seed: int = 0
    steps: int = 0
    optimizer_state: Optional[dict] = None
    normalizers: Dict[str, List[float]] = field(default_factory=dict)


class PolicyRepository(BaseRepository[PolicyCheckpoint]):
    """torch.save dict with a format tag and version."""

    def save(self, entity: PolicyCheckpoint, path: str | Path) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        torch.save(
            {
                "format": POLICY_FORMAT,
                "version": POLICY_VERSION,
                "hidden_size": entity.policy.hidden_size,
                "state_dict": entity.policy.state_dict(),
                "generator_state": entity.policy.generator.get_state(),
                "optimizer_state": entity.optimizer_state,
                "normalizers": entity.normalizers,
                "reward": entity.reward.model_dump(mode="json"),
                "train": entity.train.model_dump(mode="json"),
                "seed": entity.seed,
                "steps": entity.steps,
            },
            target,
        )
        logger.info("Policy saved to %s", target)
        return target

    def load(self, path: str | Path) -> PolicyCheckpoint:
        try:
            payload = torch.load(Path(path), map_location="cpu", weights_only=True)
        except FileNotFoundError as e:
            raise CheckpointFormatError(f"Policy checkpoint '{path}' does not exist") from e
        except Exception as e:
            raise CheckpointFormatError(f"'{path}' is not a policy checkpoint", detail=str(e)) from e
        if not isinstance(payload, dict) or payload.get("format") != POLICY_FORMAT:
            raise CheckpointFormatError(f"'{path}' is not a policy checkpoint")
        if payload.get("version") != POLICY_VERSION:
            raise CheckpointFormatError(
                f"'{path}' has unsupported version {payload.get('version')} (expected {POLICY_VERSION})"
            )
        policy = DesignerPolicy(hidden_size=payload["hidden_size"])
        policy.load_state_dict(payload["state_dict"])
        policy.generator.set_state(payload["generator_state"])
        return PolicyCheckpoint(
            policy=policy,
            reward=RewardConfig.model_validate(payload["reward"]),
            train=TrainConfig.model_validate(payload["train"]),
            seed=payload["seed"],
            steps=payload["steps"],
            optimizer_state=payload["optimizer_state"],
            normalizers=payload["normalizers"],
        )


def normalizer_state(normalizers) -> Dict[str, List[float]]:
    """Normalizer buffers keyed by component name."""
    return {component.value: normalizer.state() for component, normalizer in normalizers.items()}

