"""Segment-by-segment level design as a gymnasium environment."""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import gymnasium as gym
import numpy as np
from gymnasium import spaces

from app.core.config import MetricConfig, RewardComponent, RewardConfig, RunConfig
from app.core.exceptions import EnvironmentStateError, InitialSegmentError, PolicyDivergenceError, SpawnError
from app.models import LATENT_DIM, DEFAULT_ALPHABET, ElementCensus, LatentVector, Level, Segment, TileAlphabet
from app.services.generator_service import GeneratorBackend
from app.services.level_service import census, concat
from app.services.metrics_service import segment_metrics
from app.services.player_service import AgentState, PlayabilityTester, PlayResult
from app.services.repair_service import Repairer
from app.services.reward_service import RunningNormalizer, compose_reward, make_normalizers

logger = logging.getLogger(__name__)

# Previous segments played together with a new one
STRIP_PREVIOUS = 3
INITIAL_SEGMENT_ATTEMPTS = 1000


@dataclass(frozen=True)
class Pipeline:
    """Generator, repairer and playability tester of one run."""

    backend: GeneratorBackend
    repairer: Repairer
    tester: PlayabilityTester
    metrics: MetricConfig = field(default_factory=MetricConfig)

    @classmethod
    def from_config(
        cls, config: RunConfig, backend: GeneratorBackend, alphabet: TileAlphabet = DEFAULT_ALPHABET
    ) -> "Pipeline":
        return cls(backend, Repairer(alphabet), PlayabilityTester(config.physics, alphabet), config.metrics)

    @property
    def alphabet(self) -> TileAlphabet:
        return self.tester.alphabet


@dataclass(frozen=True)
class EnvState:
    """
    Designer state after the most recent playable segment.

    `end_state` is in level coordinates; None after an unplayable segment
    (the next test spawns at the first column of the new segment).
    """

    current_latent: LatentVector
    history: Tuple[Segment, ...]
    segments_done: int
    level: Level
    end_state: Optional[AgentState]


@dataclass(frozen=True)
class Proposal:
    """One generated candidate segment and its playtest."""

    latent: LatentVector
    raw: Segment
    segment: Segment
    result: PlayResult
    faulty_before: int
    faulty_after: int
    strip_offset: int

    @property
    def playable(self) -> bool:
        return self.result.playable

    def end_state(self) -> Optional[AgentState]:
        """End state in level coordinates."""
        if self.result.end_state is None:
            return None
        return self.result.end_state.shifted(self.strip_offset)


def history_limit(metrics: MetricConfig, segment_width: int) -> int:
    """Segments the history must keep for H and for the diversity windows."""
    return max(metrics.m, math.ceil(metrics.n * metrics.d / segment_width))


def propose_segment(pipeline: Pipeline, state: EnvState, z: LatentVector) -> Proposal:
    """
    Generate, repair and playtest a segment after `state`.

    The strip is the last three segments of the level plus the candidate; the
    agent starts from the previous end state, or at the candidate's first
    column when there is none.
    """
    raw = pipeline.backend.generate(z)
    segment = pipeline.repairer.repair(raw)
    faulty_before = len(pipeline.repairer.detect(raw))
    faulty_after = len(pipeline.repairer.detect(segment))

    previous = state.level.tail(STRIP_PREVIOUS)
    strip = Level.from_segments(previous + [segment])
    offset = (state.level.segment_count - len(previous)) * state.level.segment_width

    if state.end_state is not None:
        start = state.end_state.shifted(-offset)
    else:
        try:
            start = pipeline.tester.spawn(strip, len(previous) * state.level.segment_width)
        except SpawnError:
            return Proposal(z, raw, segment, PlayResult(False, None, 0), faulty_before, faulty_after, offset)
    result = pipeline.tester.test(strip, start)
    return Proposal(z, raw, segment, result, faulty_before, faulty_after, offset)


def append_segment(pipeline: Pipeline, state: EnvState, proposal: Proposal) -> Tuple[EnvState, Tuple[float, float, float]]:
    """
    Append a proposal to the level and compute its (D, F, H).

    Unplayable proposals are appended too (used by evaluation runs that
    continue past failures); their end state is None.
    """
    level = concat(state.level, proposal.segment)
    index = level.segment_count - 1
    metrics = segment_metrics(level, index, list(state.history), pipeline.metrics)
    limit = history_limit(pipeline.metrics, level.segment_width)
    history = (state.history + (proposal.segment,))[-limit:]
    new_state = EnvState(
        current_latent=proposal.latent if proposal.playable else state.current_latent,
        history=history,
        segments_done=state.segments_done + 1,
        level=level,
        end_state=proposal.end_state(),
    )
    return new_state, metrics


def initial_state(pipeline: Pipeline, rng: np.random.Generator, attempts: int = INITIAL_SEGMENT_ATTEMPTS) -> EnvState:
    """
    Sample uniform latents until one decodes into a playable single segment.

    Raises:
        InitialSegmentError: If no sample is playable within `attempts`
    """
    for attempt in range(1, attempts + 1):
        z = LatentVector.from_array(rng.uniform(-1.0, 1.0, LATENT_DIM))
        segment = pipeline.repairer.repair(pipeline.backend.generate(z))
        try:
            start = pipeline.tester.spawn(segment, 0)
        except SpawnError:
            continue
        result = pipeline.tester.test(segment, start)
        if result.playable:
            logger.debug("Initial segment found after %d samples", attempt)
            return EnvState(
                current_latent=z,
                history=(segment,),
                segments_done=0,
                level=Level.from_segments([segment]),
                end_state=result.end_state,
            )
    raise InitialSegmentError(attempts)


class MarioPuzzleEnv(gym.Env):
    """
    Level design MDP: the state is the latent of the last playable segment
    and each action is the latent of the next one.

    Rewards follow the configured components. An unplayable segment ends the
    episode with reward 0 (terminated); reaching `max_segments` truncates it.
    """

    metadata = {"render_modes": []}

    def __init__(
        self,
        pipeline: Pipeline,
        reward: RewardConfig,
        max_segments: int = 100,
        normalizers: Optional[Dict[RewardComponent, RunningNormalizer]] = None,
    ):
        super().__init__()
        self.pipeline = pipeline
        self.reward_config = reward
        self.max_segments = max_segments
        self.normalizers = normalizers if normalizers is not None else make_normalizers(reward)
        self.observation_space = spaces.Box(low=-1.0, high=1.0, shape=(LATENT_DIM,), dtype=np.float32)
        self.action_space = spaces.Box(low=-1.0, high=1.0, shape=(LATENT_DIM,), dtype=np.float32)
        self.state: Optional[EnvState] = None
        self._done = True

    def _observation(self) -> np.ndarray:
        return self.state.current_latent.array().astype(np.float32)

    def reset(self, seed: Optional[int] = None, options: Optional[dict] = None):
        super().reset(seed=seed)
        self.state = initial_state(self.pipeline, self.np_random)
        self._done = False
        return self._observation(), {"segments_done": 0}

    def step(self, action):
        if self.state is None:
            raise EnvironmentStateError("step() called before reset()")
        if self._done:
            raise EnvironmentStateError("step() called on a finished episode; call reset()")

        arr = np.asarray(action, dtype=np.float64).reshape(-1)
        if arr.shape != (LATENT_DIM,):
            raise EnvironmentStateError(f"action must have {LATENT_DIM} components")
        if not np.all(np.isfinite(arr)):
            raise PolicyDivergenceError("Action has non-finite components")
        z = LatentVector.from_array(arr)

        proposal = propose_segment(self.pipeline, self.state, z)
        info = {
            "playable": proposal.playable,
            "faulty_before": proposal.faulty_before,
            "faulty_after": proposal.faulty_after,
        }
        if not proposal.playable:
            self._done = True
            info["segments_done"] = self.state.segments_done
            logger.debug("Unplayable segment after %d segments", self.state.segments_done)
            return self._observation(), 0.0, True, False, info

        self.state, (d_value, f_value, h_value) = append_segment(self.pipeline, self.state, proposal)
        raw = {RewardComponent.F: f_value, RewardComponent.H: h_value, RewardComponent.P: 1.0}
        reward = compose_reward(raw, self.normalizers, self.reward_config)
        truncated = self.state.segments_done >= self.max_segments
        self._done = truncated
        info.update(
            {
                "D": d_value,
                "F": f_value,
                "H": h_value,
                "census": census(proposal.segment, self.pipeline.alphabet),
                "segments_done": self.state.segments_done,
            }
        )
        return self._observation(), reward, False, truncated, info

    @property
    def level(self) -> Optional[Level]:
        return self.state.level if self.state is not None else None


def census_total(level: Level, alphabet: TileAlphabet = DEFAULT_ALPHABET) -> ElementCensus:
    total = ElementCensus()
    for segment in level.segments:
        total = total + census(segment, alphabet)
    return total

