"""Latent vectors: both designer state and designer action."""
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

LATENT_DIM = 32


@dataclass(frozen=True)
class LatentVector:
    """Point of [-1, 1]^32."""

    values: Tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != LATENT_DIM:
            raise ValueError(f"latent vector must have {LATENT_DIM} components, got {len(self.values)}")
        if any(not -1.0 <= v <= 1.0 for v in self.values):
            raise ValueError("latent components must lie in [-1, 1]")

    @classmethod
    def from_array(cls, values: Sequence[float] | np.ndarray) -> "LatentVector":
        """Clip to [-1, 1] and freeze; non-finite input is rejected."""
        arr = np.asarray(values, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise ValueError("latent vector has non-finite components")
        return cls(tuple(float(v) for v in np.clip(arr, -1.0, 1.0)))

    @classmethod
    def zeros(cls) -> "LatentVector":
        return cls((0.0,) * LATENT_DIM)

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)
