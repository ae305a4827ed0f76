"""Segment and level grids."""
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

from app.core.exceptions import DimensionMismatchError

SEGMENT_HEIGHT = 14
SEGMENT_WIDTH = 14


@dataclass(frozen=True)
class Segment:
    """Rectangular tile grid, row 0 at the top."""

    rows: Tuple[str, ...]

    def __post_init__(self):
        if not self.rows or not self.rows[0]:
            raise ValueError("Segment needs at least one row and one column")
        width = len(self.rows[0])
        if any(len(row) != width for row in self.rows):
            raise ValueError("Segment rows must have equal width")

    @classmethod
    def from_rows(cls, rows: Iterable[str]) -> "Segment":
        """Build a segment from row strings."""
        return cls(tuple(rows))

    @classmethod
    def filled(cls, glyph: str, height: int = SEGMENT_HEIGHT, width: int = SEGMENT_WIDTH) -> "Segment":
        """Segment with every cell set to one glyph."""
        return cls(tuple(glyph * width for _ in range(height)))

    @property
    def height(self) -> int:
        return len(self.rows)

    @property
    def width(self) -> int:
        return len(self.rows[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    def tile(self, row: int, col: int) -> str:
        return self.rows[row][col]

    def to_grid(self) -> List[List[str]]:
        """Mutable copy of the grid."""
        return [list(row) for row in self.rows]

    def text(self) -> str:
        return "\n".join(self.rows)


@dataclass(frozen=True)
class Level:
    """Full level grid; generated levels are a concatenation of equal-width segments."""

    rows: Tuple[str, ...]
    segment_width: int = SEGMENT_WIDTH
    trailing_newline: bool = field(default=True, compare=False)

    def __post_init__(self):
        if not self.rows:
            raise ValueError("Level needs at least one row")
        width = len(self.rows[0])
        if any(len(row) != width for row in self.rows):
            raise ValueError("Level rows must have equal width")

    @classmethod
    def empty(cls, height: int = SEGMENT_HEIGHT, segment_width: int = SEGMENT_WIDTH) -> "Level":
        """Level with no columns yet."""
        return cls(tuple("" for _ in range(height)), segment_width)

    @classmethod
    def from_segments(cls, segments: Sequence[Segment]) -> "Level":
        """Concatenate segments left to right."""
        if not segments:
            raise ValueError("from_segments needs at least one segment")
        first = segments[0]
        for segment in segments[1:]:
            if segment.shape != first.shape:
                raise DimensionMismatchError(first.shape, segment.shape)
        rows = tuple("".join(s.rows[r] for s in segments) for r in range(first.height))
        return cls(rows, first.width)

    @property
    def height(self) -> int:
        return len(self.rows)

    @property
    def width(self) -> int:
        return len(self.rows[0])

    @property
    def segment_count(self) -> int:
        """Number of complete segments."""
        return self.width // self.segment_width

    @property
    def segments(self) -> List[Segment]:
        """Complete segments in generation order."""
        return [self.segment(i) for i in range(self.segment_count)]

    def segment(self, index: int) -> Segment:
        """Segment at a segment index; negative indices count from the end."""
        if index < 0:
            index += self.segment_count
        if not 0 <= index < self.segment_count:
            raise IndexError(f"segment index {index} out of range")
        return self.window(index * self.segment_width, self.segment_width)

    def window(self, start: int, width: int) -> Segment:
        """Copy of columns [start, start + width)."""
        if start < 0 or start + width > self.width:
            raise IndexError(f"window [{start}, {start + width}) outside level width {self.width}")
        return Segment(tuple(row[start:start + width] for row in self.rows))

    def tail(self, segments: int) -> List[Segment]:
        """The last `segments` complete segments (fewer if the level is shorter)."""
        count = min(segments, self.segment_count)
        return [self.segment(i) for i in range(self.segment_count - count, self.segment_count)]


@dataclass(frozen=True)
class ElementCensus:
    """Level-element counts of one segment."""

    gaps: int = 0
    pipes: int = 0
    enemies: int = 0
    bullets: int = 0
    coins: int = 0
    question_marks: int = 0

    def __add__(self, other: "ElementCensus") -> "ElementCensus":
        return ElementCensus(
            gaps=self.gaps + other.gaps,
            pipes=self.pipes + other.pipes,
            enemies=self.enemies + other.enemies,
            bullets=self.bullets + other.bullets,
            coins=self.coins + other.coins,
            question_marks=self.question_marks + other.question_marks,
        )

    def as_dict(self) -> dict:
        return {
            "gaps": self.gaps,
            "pipes": self.pipes,
            "enemies": self.enemies,
            "bullets": self.bullets,
            "coins": self.coins,
            "question_marks": self.question_marks,
        }


CENSUS_FIELDS: Tuple[str, ...] = tuple(ElementCensus().as_dict())
