import numpy as np
import pytest

from app.models import DEFAULT_ALPHABET, Segment, TileRole
from app.models.tile import CANNON_ROLES, PIPE_ROLES
from app.services.repair_service import Repairer, detect_faulty_tiles, repair
from tests.conftest import flat_rows, with_tiles

GLYPHS = sorted(DEFAULT_ALPHABET.glyphs)


def _random_segment(rng, size: int = 14) -> Segment:
    weights = np.array([6.0 if g == "-" else 1.0 for g in GLYPHS])
    cells = rng.choice(GLYPHS, size=(size, size), p=weights / weights.sum())
    return Segment(tuple("".join(row) for row in cells))


def _check_repair(segment: Segment) -> None:
    repaired = repair(segment)
    assert detect_faulty_tiles(repaired) == []
    assert repair(repaired) == repaired
    for before, after in zip(segment.rows, repaired.rows):
        for a, b in zip(before, after):
            role = DEFAULT_ALPHABET.role(a)
            if role != TileRole.EMPTY and role not in PIPE_ROLES and role not in CANNON_ROLES:
                assert a == b


def test_legal_pipe_is_not_faulty():
    rows = with_tiles(flat_rows(), [(9, 4, "<"), (9, 5, ">"), (10, 4, "["), (10, 5, "]"), (11, 4, "["), (11, 5, "]")])
    assert detect_faulty_tiles(Segment.from_rows(rows)) == []


def test_detects_half_pipes_and_floating_cannons():
    rows = with_tiles(flat_rows(), [(5, 3, "<"), (8, 9, "b")])
    assert detect_faulty_tiles(Segment.from_rows(rows)) == [(5, 3, "<"), (8, 9, "b")]


def test_cannon_on_ground_is_legal():
    rows = with_tiles(flat_rows(), [(10, 6, "B"), (11, 6, "b")])
    assert detect_faulty_tiles(Segment.from_rows(rows)) == []


def test_repair_completes_top_and_extends_body():
    rows = with_tiles(flat_rows(), [(8, 5, "<")])
    expected = with_tiles(
        flat_rows(), [(8, 5, "<"), (8, 6, ">"), (9, 5, "["), (9, 6, "]"), (10, 5, "["), (10, 6, "]"),
                      (11, 5, "["), (11, 6, "]")]
    )
    assert repair(Segment.from_rows(rows)) == Segment.from_rows(expected)


def test_repair_deletes_unfixable_tiles():
    # the right half of the pipe top is blocked by a coin
    rows = with_tiles(flat_rows(), [(8, 5, "<"), (8, 6, "o"), (4, 2, "]")])
    repaired = repair(Segment.from_rows(rows))
    assert repaired == Segment.from_rows(with_tiles(flat_rows(), [(8, 6, "o")]))


def test_repairer_binds_alphabet(flat_segment):
    repairer = Repairer()
    assert repairer.repair(flat_segment) == flat_segment
    assert repairer.detect(flat_segment) == []


def test_repair_fuzz():
    rng = np.random.default_rng(0)
    for _ in range(2_000):
        _check_repair(_random_segment(rng))


@pytest.mark.slow
def test_repair_fuzz_long():
    rng = np.random.default_rng(1)
    for _ in range(10_000):
        _check_repair(_random_segment(rng))
