"""Assembly of backends, pipelines and designers from a run config."""
import logging
from functools import partial
from typing import Optional

from app.core.config import BackendKind, RunConfig
from app.core.exceptions import ConfigError
from app.models import TileAlphabet
from app.models.tile import load_alphabet
from app.repositories.generator import DecoderRepository, PoolRepository
from app.repositories.policy import PolicyRepository
from app.services.environment_service import Pipeline
from app.services.generator_service import GeneratorBackend, PoolBackend, ProceduralBackend
from app.services.policy_service import Designer, DesignerPolicy, RandomDesigner

logger = logging.getLogger(__name__)

RANDOM_DESIGNER = "random"


def make_backend(config: RunConfig, alphabet: TileAlphabet) -> GeneratorBackend:
    """
    Generator backend named by the `backend` section.

    Raises:
        ConfigError: If a required checkpoint path is missing
        CheckpointFormatError: If a checkpoint cannot be read
    """
    kind = config.backend.kind
    if kind == BackendKind.PROCEDURAL:
        return ProceduralBackend(alphabet)
    if kind == BackendKind.POOL:
        if not config.paths.pool_path:
            raise ConfigError("paths.pool_path is required for the pool backend")
        pool = PoolRepository().load(config.paths.pool_path)
        if pool.segment_shape != (config.backend.segment_height, config.backend.segment_width):
            raise ConfigError(f"Pool segments are {pool.segment_shape}, config expects "
                              f"{config.backend.segment_height}x{config.backend.segment_width}")
        return PoolBackend(pool)
    if not config.paths.decoder_path:
        raise ConfigError("paths.decoder_path is required for the external-decoder backend")
    decoder = DecoderRepository().load(config.paths.decoder_path)
    if (decoder.height, decoder.width) != (config.backend.segment_height, config.backend.segment_width):
        raise ConfigError("Decoder output size does not match the configured segment size")
    unknown = [g for g in decoder.glyphs if alphabet.role(g) is None]
    if unknown:
        raise ConfigError(f"Decoder glyphs not in the alphabet: {''.join(unknown)}")
    return decoder


def build_pipeline(config: RunConfig) -> Pipeline:
    alphabet = load_alphabet(config.paths.alphabet_path)
    backend = make_backend(config, alphabet)
    logger.info("Pipeline with %s backend", backend.kind.value)
    return Pipeline.from_config(config, backend, alphabet)


def _load_policy(path: str) -> DesignerPolicy:
    return PolicyRepository().load(path).policy


def designer_factory(policy_path: Optional[str], seed: int = 0):
    """
    Picklable zero-argument designer factory.

    `policy_path` of None or "random" gives the random designer.
    """
    if policy_path is None or policy_path == RANDOM_DESIGNER:
        return partial(RandomDesigner, seed)
    return partial(_load_policy, policy_path)


def load_designer(policy_path: Optional[str], seed: int = 0) -> Designer:
    designer = designer_factory(policy_path, seed)()
    designer.reseed(seed)
    return designer
