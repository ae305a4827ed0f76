"""Pipe and cannon legality: faulty-tile detection and rule-based repair."""
from dataclasses import dataclass
from typing import List, Tuple

from app.models import DEFAULT_ALPHABET, Segment, TileAlphabet, TileRole
from app.models.tile import CANNON_ROLES, PIPE_ROLES

FaultyTile = Tuple[int, int, str]

_LEFT_PIPE = {TileRole.PIPE_TOP_LEFT, TileRole.PIPE_BODY_LEFT}
_RIGHT_PIPE = {TileRole.PIPE_TOP_RIGHT, TileRole.PIPE_BODY_RIGHT}


def _role_at(grid: List[List[str]], alphabet: TileAlphabet, row: int, col: int):
    if 0 <= row < len(grid) and 0 <= col < len(grid[0]):
        return alphabet.role(grid[row][col])
    return None


def _is_support(role) -> bool:
    """Solid tile that is not part of a pipe."""
    return role in (TileRole.SOLID, TileRole.BREAKABLE, TileRole.QUESTION) or role in CANNON_ROLES


def _tile_is_faulty(grid: List[List[str]], alphabet: TileAlphabet, row: int, col: int) -> bool:
    role = alphabet.role(grid[row][col])
    at = lambda r, c: _role_at(grid, alphabet, r, c)  # noqa: E731

    if role == TileRole.CANNON_BODY:
        return at(row - 1, col) not in CANNON_ROLES
    if role not in PIPE_ROLES:
        return False

    if role == TileRole.PIPE_TOP_LEFT and at(row, col + 1) != TileRole.PIPE_TOP_RIGHT:
        return True
    if role == TileRole.PIPE_TOP_RIGHT and at(row, col - 1) != TileRole.PIPE_TOP_LEFT:
        return True
    if role == TileRole.PIPE_BODY_LEFT and (
        at(row, col + 1) != TileRole.PIPE_BODY_RIGHT or at(row - 1, col) not in _LEFT_PIPE
    ):
        return True
    if role == TileRole.PIPE_BODY_RIGHT and (
        at(row, col - 1) != TileRole.PIPE_BODY_LEFT or at(row - 1, col) not in _RIGHT_PIPE
    ):
        return True

    # the column continues as body down to a solid tile or the bottom
    if row + 1 < len(grid):
        below = at(row + 1, col)
        body = TileRole.PIPE_BODY_LEFT if role in _LEFT_PIPE else TileRole.PIPE_BODY_RIGHT
        if below != body and not _is_support(below):
            return True
    return False


def _faulty(grid: List[List[str]], alphabet: TileAlphabet) -> List[FaultyTile]:
    return [
        (r, c, grid[r][c])
        for r in range(len(grid))
        for c in range(len(grid[0]))
        if _tile_is_faulty(grid, alphabet, r, c)
    ]


def detect_faulty_tiles(segment: Segment, alphabet: TileAlphabet = DEFAULT_ALPHABET) -> List[FaultyTile]:
    """
    Pipe and cannon tiles that violate adjacency rules, in row-major order.

    Returns:
        List[FaultyTile]: (row, col, glyph) triples
    """
    return _faulty(segment.to_grid(), alphabet)


def repair(segment: Segment, alphabet: TileAlphabet = DEFAULT_ALPHABET) -> Segment:
    """
    Legalize pipes and cannons.

    Rules, in order: complete broken top pairs into empty cells, extend body pairs down
    through empty cells to support or the bottom, then delete whatever is still faulty
    until nothing is.
    """
    grid = segment.to_grid()
    height, width = len(grid), len(grid[0])
    empty = alphabet.glyph(TileRole.EMPTY)
    top_left = alphabet.glyph(TileRole.PIPE_TOP_LEFT)
    top_right = alphabet.glyph(TileRole.PIPE_TOP_RIGHT)
    body_left = alphabet.glyph(TileRole.PIPE_BODY_LEFT)
    body_right = alphabet.glyph(TileRole.PIPE_BODY_RIGHT)

    # rule 1
    for r in range(height):
        for c in range(width):
            role = alphabet.role(grid[r][c])
            if role == TileRole.PIPE_TOP_LEFT and c + 1 < width:
                if alphabet.role(grid[r][c + 1]) == TileRole.EMPTY:
                    grid[r][c + 1] = top_right
            elif role == TileRole.PIPE_TOP_RIGHT and c - 1 >= 0:
                if alphabet.role(grid[r][c - 1]) == TileRole.EMPTY:
                    grid[r][c - 1] = top_left

    # rule 2
    for r in range(height):
        for c in range(width - 1):
            if (
                alphabet.role(grid[r][c]) != TileRole.PIPE_TOP_LEFT
                or alphabet.role(grid[r][c + 1]) != TileRole.PIPE_TOP_RIGHT
            ):
                continue
            for below in range(r + 1, height):
                left = alphabet.role(grid[below][c])
                right = alphabet.role(grid[below][c + 1])
                if left == TileRole.PIPE_BODY_LEFT and right == TileRole.PIPE_BODY_RIGHT:
                    continue
                if left == TileRole.EMPTY and right == TileRole.EMPTY:
                    grid[below][c] = body_left
                    grid[below][c + 1] = body_right
                    continue
                break

    # rule 3
    faulty = _faulty(grid, alphabet)
    while faulty:
        for r, c, _ in faulty:
            grid[r][c] = empty
        faulty = _faulty(grid, alphabet)

    return Segment(tuple("".join(row) for row in grid))


@dataclass(frozen=True)
class Repairer:
    """Repair and fault counting bound to an alphabet."""

    alphabet: TileAlphabet = DEFAULT_ALPHABET

    def detect(self, segment: Segment) -> List[FaultyTile]:
        return detect_faulty_tiles(segment, self.alphabet)

    def repair(self, segment: Segment) -> Segment:
        return repair(segment, self.alphabet)
