"""FastAPI dependencies."""
import logging
from functools import lru_cache

from app.core.config import RunConfig, get_settings, load_run_config
from app.services.environment_service import Pipeline
from app.services.pipeline_service import RANDOM_DESIGNER, build_pipeline, designer_factory

logger = logging.getLogger(__name__)


@lru_cache()
def get_run_config() -> RunConfig:
    """Run config named by RUN_CONFIG (defaults when unset)."""
    settings = get_settings()
    config = load_run_config(settings.run_config_path)
    if settings.pool_path:
        config = config.with_overrides(**{"paths.pool_path": settings.pool_path})
    return config


@lru_cache()
def get_pipeline() -> Pipeline:
    """Process-wide generation pipeline."""
    return build_pipeline(get_run_config())


def get_designer_factory():
    """Zero-argument designer factory from POLICY_PATH (random designer when unset)."""
    settings = get_settings()
    config = get_run_config()
    path = settings.policy_path or config.paths.policy_path or RANDOM_DESIGNER
    return designer_factory(path, config.seed)

