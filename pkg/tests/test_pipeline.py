import numpy as np
import pytest

from app.core.config import RunConfig
from app.core.exceptions import ConfigError
from app.models import DEFAULT_ALPHABET, Level, Segment
from app.repositories.generator import PoolRepository, write_decoder_weights
from app.services.generator_service import ExternalDecoderBackend, PoolBackend, ProceduralBackend
from app.services.pipeline_service import RANDOM_DESIGNER, build_pipeline, designer_factory, make_backend
from app.services.policy_service import RandomDesigner
from app.services.render_service import RenderStyle, parse_style, render_image
from tests.conftest import flat_rows, pool_of


def _config(**overrides) -> RunConfig:
    return RunConfig().with_overrides(**overrides)


def test_default_backend_is_procedural():
    assert isinstance(build_pipeline(RunConfig()).backend, ProceduralBackend)


def test_pool_backend_needs_a_path():
    with pytest.raises(ConfigError):
        make_backend(_config(**{"backend.kind": "pool"}), DEFAULT_ALPHABET)


def test_pool_backend_checks_segment_size(tmp_path):
    path = PoolRepository().save(pool_of(Segment.from_rows(flat_rows())), tmp_path / "pool.edrlpool")
    config = _config(**{"backend.kind": "pool", "paths.pool_path": str(path)})
    assert isinstance(make_backend(config, DEFAULT_ALPHABET), PoolBackend)
    narrow = _config(
        **{
            "backend.kind": "pool",
            "backend.segment_width": 12,
            "metrics.window_w": 12,
            "paths.pool_path": str(path),
        }
    )
    with pytest.raises(ConfigError):
        make_backend(narrow, DEFAULT_ALPHABET)


def test_external_decoder_glyphs_must_be_known(tmp_path):
    layers = [(np.zeros((14 * 14 * 2, 32)), np.zeros(14 * 14 * 2))]
    good = write_decoder_weights(tmp_path / "good.bin", layers, 14, 14, "-X")
    bad = write_decoder_weights(tmp_path / "bad.bin", layers, 14, 14, "-#")
    kind = {"backend.kind": "external-decoder"}
    config = _config(**kind, **{"paths.decoder_path": str(good)})
    assert isinstance(make_backend(config, DEFAULT_ALPHABET), ExternalDecoderBackend)
    with pytest.raises(ConfigError):
        make_backend(_config(**kind, **{"paths.decoder_path": str(bad)}), DEFAULT_ALPHABET)
    with pytest.raises(ConfigError):
        make_backend(_config(**kind), DEFAULT_ALPHABET)


def test_random_designer_factory():
    factory = designer_factory(RANDOM_DESIGNER, seed=4)
    assert isinstance(factory(), RandomDesigner)
    assert factory().act() == RandomDesigner(4).act()


def test_render_styles(flat_segment):
    assert parse_style("image") == RenderStyle.IMAGE
    with pytest.raises(ConfigError):
        parse_style("svg")
    image = render_image(Level.from_segments([flat_segment]), tile=4)
    assert image.size == (56, 56)
    assert image.getpixel((0, 55)) != image.getpixel((0, 0))
