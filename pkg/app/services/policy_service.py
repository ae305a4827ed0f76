"""Gaussian designer policy with a value baseline, and the random designer."""
import logging
import math
from typing import Optional, Protocol, Tuple

import numpy as np
import torch
import torch.nn as nn
from torch.distributions import Normal

from app.core.config import ActMode
from app.core.exceptions import PolicyDivergenceError
from app.models import LATENT_DIM, LatentVector

logger = logging.getLogger(__name__)


class Designer(Protocol):
    """Anything that maps a latent state to the next latent action."""

    def act(self, state: LatentVector, stochastic: bool = True) -> LatentVector:
        ...

    def reseed(self, seed: int) -> None:
        ...


def _mlp(sizes, head_gain: float) -> nn.Sequential:
    layers = []
    for i in range(len(sizes) - 1):
        linear = nn.Linear(sizes[i], sizes[i + 1])
        last = i == len(sizes) - 2
        nn.init.orthogonal_(linear.weight, gain=head_gain if last else math.sqrt(2))
        nn.init.zeros_(linear.bias)
        layers.append(linear)
        if not last:
            layers.append(nn.Tanh())
    return nn.Sequential(*layers)


class DesignerPolicy(nn.Module):
    """
    Policy 32 -> h -> h -> 32 with a tanh-bounded mean and a learned per-dimension
    log-stddev; value network 32 -> h -> h -> 1.
    """

    def __init__(
        self,
        hidden_size: int = 64,
        init_log_std: float = math.log(0.5),
        seed: Optional[int] = None,
    ):
        super().__init__()
        self.hidden_size = hidden_size
        # seeded weights come from a forked stream; the global torch RNG is left as it was
        with torch.random.fork_rng(devices=[], enabled=seed is not None):
            if seed is not None:
                torch.manual_seed(seed)
            self.policy_net = _mlp([LATENT_DIM, hidden_size, hidden_size, LATENT_DIM], head_gain=0.01)
            self.value_net = _mlp([LATENT_DIM, hidden_size, hidden_size, 1], head_gain=1.0)
        self.log_std = nn.Parameter(torch.full((LATENT_DIM,), float(init_log_std)))
        self.generator = torch.Generator()
        self.generator.manual_seed(0 if seed is None else seed)

    def mean(self, states: torch.Tensor) -> torch.Tensor:
        return torch.tanh(self.policy_net(states))

    def distribution(self, states: torch.Tensor) -> Normal:
        return Normal(self.mean(states), self.log_std.exp().expand(states.shape[0], LATENT_DIM))

    def value(self, states: torch.Tensor) -> torch.Tensor:
        return self.value_net(states).squeeze(-1)

    def evaluate(self, states: torch.Tensor, actions: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """Log-probabilities, entropies and values for a batch."""
        dist = self.distribution(states)
        return dist.log_prob(actions).sum(-1), dist.entropy().sum(-1), self.value(states)

    @torch.no_grad()
    def sample(self, state: LatentVector, stochastic: bool = True) -> Tuple[np.ndarray, float, float]:
        """
        Raw action, its log-probability and the state value.

        The stochastic sample is drawn from this policy's own generator and is
        not clipped; clip it before handing it to the environment.

        Raises:
            PolicyDivergenceError: If the network output is not finite
        """
        states = torch.as_tensor(state.array(), dtype=torch.float32).unsqueeze(0)
        mean = self.mean(states)
        std = self.log_std.exp()
        if not (torch.isfinite(mean).all() and torch.isfinite(std).all()):
            raise PolicyDivergenceError("Policy network produced non-finite output")
        if stochastic:
            noise = torch.randn(mean.shape, generator=self.generator)
            action = mean + std * noise
        else:
            action = mean
        log_prob = Normal(mean, std).log_prob(action).sum(-1)
        value = self.value(states)
        return action[0].numpy().astype(np.float64), float(log_prob.item()), float(value.item())

    def act(self, state: LatentVector, stochastic: bool = True) -> LatentVector:
        action, _, _ = self.sample(state, stochastic)
        return LatentVector.from_array(action)

    def reseed(self, seed: int) -> None:
        self.generator.manual_seed(seed)


def policy_act(policy: DesignerPolicy, state: LatentVector, mode: ActMode = ActMode.STOCHASTIC) -> LatentVector:
    """Clipped action of a policy in the given mode."""
    return policy.act(state, stochastic=mode == ActMode.STOCHASTIC)


class RandomDesigner:
    """Uniform random actions over [-1, 1]^32, seeded."""

    def __init__(self, seed: int = 0):
        self.rng = np.random.default_rng(seed)

    def act(self, state: Optional[LatentVector] = None, stochastic: bool = True) -> LatentVector:
        return random_act(self.rng)

    def reseed(self, seed: int) -> None:
        self.rng = np.random.default_rng(seed)


def random_act(rng: np.random.Generator) -> LatentVector:
    """One uniform sample over [-1, 1]^32."""
    return LatentVector.from_array(rng.uniform(-1.0, 1.0, LATENT_DIM))
