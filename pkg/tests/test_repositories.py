import json

import numpy as np
import pytest

from app.core.config import CorpusConfig, RewardConfig, TrainConfig
from app.core.exceptions import CheckpointFormatError, CorpusError, LevelParseError
from app.models import LatentVector
from app.repositories.corpus import CorpusRepository, level_type_of
from app.repositories.policy import PolicyCheckpoint, PolicyRepository, normalizer_state
from app.repositories.report import MANIFEST_NAME, ReportRepository
from app.core.config import RunConfig
from app.services.policy_service import DesignerPolicy
from app.services.reward_service import make_normalizers
from tests.conftest import flat_rows, with_tiles


def _write_level(path, rows):
    path.write_text("\n".join(rows) + "\n")


def test_level_type_patterns():
    cfg = CorpusConfig()
    assert level_type_of("mario-1-2.txt", cfg) == "underground"
    assert level_type_of("mario-6-3.txt", cfg) == "athletic"
    assert level_type_of("mario-1-1.txt", cfg) == "overworld"


def test_load_corpus_in_name_order(tmp_path):
    _write_level(tmp_path / "mario-1-2.txt", flat_rows(28))
    _write_level(tmp_path / "mario-1-1.txt", flat_rows(42))
    (tmp_path / "notes.md").write_text("ignored")
    corpus = CorpusRepository().load_corpus(tmp_path, CorpusConfig())
    assert [c.name for c in corpus] == ["mario-1-1", "mario-1-2"]
    assert [c.level.width for c in corpus] == [42, 28]
    assert [c.level_type for c in corpus] == ["overworld", "underground"]


def test_load_corpus_errors(tmp_path):
    with pytest.raises(CorpusError):
        CorpusRepository().load_corpus(tmp_path / "absent", CorpusConfig())
    with pytest.raises(CorpusError):
        CorpusRepository().load_corpus(tmp_path, CorpusConfig())
    _write_level(tmp_path / "broken.txt", with_tiles(flat_rows(), [(2, 2, "Z")]))
    with pytest.raises(LevelParseError, match="broken.txt"):
        CorpusRepository().load_corpus(tmp_path, CorpusConfig())


def test_corpus_save_load(tmp_path, flat_segment):
    repo = CorpusRepository()
    _write_level(tmp_path / "a.txt", flat_rows())
    level = repo.load(tmp_path / "a.txt")
    repo.save(level, tmp_path / "b.txt")
    assert (tmp_path / "b.txt").read_bytes() == (tmp_path / "a.txt").read_bytes()


def test_policy_checkpoint_round_trip(tmp_path):
    policy = DesignerPolicy(hidden_size=16, seed=2)
    normalizers = make_normalizers(RewardConfig())
    for normalizer in normalizers.values():
        normalizer.push(1.5)
    checkpoint = PolicyCheckpoint(
        policy=policy,
        reward=RewardConfig(),
        train=TrainConfig(),
        seed=2,
        steps=10,
        normalizers=normalizer_state(normalizers),
    )
    path = PolicyRepository().save(checkpoint, tmp_path / "policy.pt")
    loaded = PolicyRepository().load(path)

    state = LatentVector.from_array(np.linspace(-1, 1, 32))
    assert loaded.policy.act(state, stochastic=False) == policy.act(state, stochastic=False)
    assert loaded.policy.act(state) == policy.act(state)
    assert loaded.reward == RewardConfig()
    assert (loaded.seed, loaded.steps) == (2, 10)
    assert loaded.normalizers == {"F": [1.5], "H": [1.5]}


def test_policy_checkpoint_rejects_other_files(tmp_path):
    path = tmp_path / "policy.pt"
    path.write_bytes(b"not a checkpoint")
    with pytest.raises(CheckpointFormatError):
        PolicyRepository().load(path)
    with pytest.raises(CheckpointFormatError):
        PolicyRepository().load(tmp_path / "absent.pt")


def _write_run(out_dir):
    reports = ReportRepository(out_dir)
    reports.write_csv("rows.csv", ("a", "b"), [{"a": 1, "b": 2, "c": 3}])
    reports.write_json("summary.json", {"x": 1})
    return reports.write_manifest("test", RunConfig(), [out_dir / "rows.csv", None]).read_text()


def test_manifest_is_reproducible(tmp_path):
    first = _write_run(tmp_path)
    assert _write_run(tmp_path) == first
    manifest = json.loads(first)
    assert manifest["command"] == "test"
    assert set(manifest["outputs"]) == {str(tmp_path / "rows.csv"), str(tmp_path / "summary.json")}
    assert (tmp_path / "rows.csv").read_text().splitlines() == ["a,b", "1,2"]
