"""Level text format, slicing, concatenation and element census."""
from typing import Dict, List

from app.core.exceptions import DimensionMismatchError, LevelParseError
from app.models import DEFAULT_ALPHABET, ElementCensus, Level, Segment, TileAlphabet, TileRole
from app.models.level import SEGMENT_HEIGHT, SEGMENT_WIDTH


def parse_level(
    text: str,
    alphabet: TileAlphabet = DEFAULT_ALPHABET,
    height: int = SEGMENT_HEIGHT,
    segment_width: int = SEGMENT_WIDTH,
) -> Level:
    """
    Parse VGLC plain text (one glyph per tile, newline-separated rows).

    Args:
        text: Level text
        alphabet: Glyph alphabet
        height: Required number of rows
        segment_width: Segment width of the resulting level

    Returns:
        Level: Parsed level

    Raises:
        LevelParseError: Ragged lines, unknown glyph or wrong height
    """
    trailing_newline = text.endswith("\n")
    body = text[:-1] if trailing_newline else text
    lines = body.split("\n")
    if len(lines) != height:
        raise LevelParseError(f"Expected {height} rows, got {len(lines)}")

    width = len(lines[0])
    if width == 0:
        raise LevelParseError("Level has no columns")
    for r, line in enumerate(lines):
        if len(line) != width:
            raise LevelParseError(f"Ragged line {r}: length {len(line)}, expected {width}")
        for c, glyph in enumerate(line):
            if alphabet.role(glyph) is None:
                raise LevelParseError("Unknown glyph", glyph=glyph, row=r, col=c)

    return Level(tuple(lines), segment_width, trailing_newline)


def serialize_level(level: Level) -> str:
    """Inverse of parse_level, byte-exact."""
    text = "\n".join(level.rows)
    return text + "\n" if level.trailing_newline else text


def slice_segments(level: Level, width: int = SEGMENT_WIDTH, stride: int = SEGMENT_WIDTH) -> List[Segment]:
    """
    Cut windows of `width` columns at offsets 0, stride, 2*stride, ...

    Args:
        level: Source level
        width: Window width
        stride: Offset step

    Returns:
        List[Segment]: Windows that fit entirely inside the level

    Raises:
        DimensionMismatchError: If width exceeds the level width
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if width > level.width:
        raise DimensionMismatchError((level.height, width), (level.height, level.width))
    return [level.window(offset, width) for offset in range(0, level.width - width + 1, stride)]


def concat(level: Level, segment: Segment) -> Level:
    """
    Append a segment to the right end of a level.

    Raises:
        DimensionMismatchError: If height or width disagree
    """
    if segment.shape != (level.height, level.segment_width):
        raise DimensionMismatchError((level.height, level.segment_width), segment.shape)
    rows = tuple(a + b for a, b in zip(level.rows, segment.rows))
    return Level(rows, level.segment_width, level.trailing_newline)


def census(segment: Segment, alphabet: TileAlphabet = DEFAULT_ALPHABET) -> ElementCensus:
    """
    Count level elements of one segment.

    A gap is a maximal run of columns whose bottom tile is not solid.
    """
    bottom = segment.rows[-1]
    gaps = 0
    in_gap = False
    for glyph in bottom:
        open_column = not alphabet.is_solid(glyph)
        if open_column and not in_gap:
            gaps += 1
        in_gap = open_column

    counts: Dict[TileRole, int] = {}
    for row in segment.rows:
        for glyph in row:
            role = alphabet.role(glyph)
            counts[role] = counts.get(role, 0) + 1

    return ElementCensus(
        gaps=gaps,
        pipes=counts.get(TileRole.PIPE_TOP_LEFT, 0),
        enemies=counts.get(TileRole.ENEMY, 0),
        bullets=counts.get(TileRole.CANNON_HEAD, 0),
        coins=counts.get(TileRole.COIN, 0),
        question_marks=counts.get(TileRole.QUESTION, 0),
    )


def census_rows(level: Level, alphabet: TileAlphabet = DEFAULT_ALPHABET) -> List[dict]:
    """Per-segment census rows for CSV export."""
    return [
        {"segment": i, **census(segment, alphabet).as_dict()}
        for i, segment in enumerate(level.segments)
    ]
