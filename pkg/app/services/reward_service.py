"""Reward composition with running min-max normalization."""
import logging
from collections import deque
from typing import Dict, Mapping

from app.core.config import RewardComponent, RewardConfig
from app.core.exceptions import RewardError

logger = logging.getLogger(__name__)


class RunningNormalizer:
    """Min-max scaling over the most recent `window` raw values."""

    def __init__(self, window: int = 1000):
        if window < 1:
            raise ValueError("window must be >= 1")
        self.window = window
        self.buffer: deque = deque(maxlen=window)

    def push(self, value: float) -> float:
        """Record a raw value and return it normalized into [0, 1]."""
        self.buffer.append(float(value))
        return self.normalize(value)

    def normalize(self, value: float) -> float:
        if not self.buffer:
            return 0.5
        low, high = min(self.buffer), max(self.buffer)
        if high == low:
            return 0.5
        return min(1.0, max(0.0, (value - low) / (high - low)))

    def state(self) -> list:
        return list(self.buffer)

    def load_state(self, values) -> None:
        self.buffer = deque((float(v) for v in values), maxlen=self.window)

    def __len__(self) -> int:
        return len(self.buffer)


def make_normalizers(cfg: RewardConfig) -> Dict[RewardComponent, RunningNormalizer]:
    """One normalizer for each of F and H."""
    return {
        component: RunningNormalizer(cfg.normalizer_window)
        for component in (RewardComponent.F, RewardComponent.H)
    }


def compose_reward(
    raw: Mapping[RewardComponent, float],
    normalizers: Mapping[RewardComponent, RunningNormalizer],
    cfg: RewardConfig,
) -> float:
    """
    Sum of the configured components for one playable step.

    F and H are pushed to their normalizers and scaled into [0, 1]; P
    contributes its raw per-step value (1 for a playable segment).

    Raises:
        RewardError: If a configured component has no raw value
    """
    total = 0.0
    for component in cfg.components:
        if component not in raw:
            raise RewardError(f"Missing raw value for reward component {component.value}")
        if component == RewardComponent.P:
            total += float(raw[component])
        else:
            total += normalizers[component].push(raw[component])
    return total
