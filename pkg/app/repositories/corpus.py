"""Corpus repository: VGLC level files on disk."""
import fnmatch
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List

from app.core.config import CorpusConfig
from app.core.exceptions import CorpusError, LevelParseError
from app.models import DEFAULT_ALPHABET, Level, TileAlphabet
from app.models.level import SEGMENT_HEIGHT, SEGMENT_WIDTH
from app.repositories.base import BaseRepository
from app.services.level_service import parse_level, serialize_level

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CorpusLevel:
    """One corpus file."""

    name: str
    level: Level
    level_type: str


def level_type_of(name: str, cfg: CorpusConfig) -> str:
    """Type tag of a file name; the first matching pattern wins."""
    for level_type, patterns in cfg.level_types.items():
        if any(fnmatch.fnmatch(name, pattern) for pattern in patterns):
            return level_type
    return cfg.default_type


class CorpusRepository(BaseRepository[Level]):
    """Reads and writes level text files."""

    def __init__(
        self,
        alphabet: TileAlphabet = DEFAULT_ALPHABET,
        height: int = SEGMENT_HEIGHT,
        segment_width: int = SEGMENT_WIDTH,
    ):
        self.alphabet = alphabet
        self.height = height
        self.segment_width = segment_width

    def save(self, entity: Level, path: str | Path) -> Path:
        return self.write_bytes(path, serialize_level(entity).encode("utf-8"))

    def load(self, path: str | Path) -> Level:
        text = self.read_bytes(path).decode("utf-8")
        try:
            return parse_level(text, self.alphabet, self.height, self.segment_width)
        except LevelParseError as e:
            raise LevelParseError(f"{Path(path).name}: {e.message}") from e

    def load_corpus(self, directory: str | Path, cfg: CorpusConfig) -> List[CorpusLevel]:
        """
        Every `*.txt` level in a directory, in sorted file-name order.

        Args:
            directory: Corpus directory
            cfg: Type tag patterns

        Returns:
            List[CorpusLevel]: Parsed levels with their type tags

        Raises:
            CorpusError: If the directory is missing or holds no levels
            LevelParseError: If a file cannot be parsed
        """
        root = Path(directory)
        if not root.is_dir():
            raise CorpusError(f"Corpus directory '{directory}' does not exist")
        files = sorted(root.glob("*.txt"))
        if not files:
            raise CorpusError(f"Corpus directory '{directory}' has no .txt levels")
        corpus = [CorpusLevel(f.stem, self.load(f), level_type_of(f.name, cfg)) for f in files]
        counts: Dict[str, int] = {}
        for item in corpus:
            counts[item.level_type] = counts.get(item.level_type, 0) + 1
        logger.info("Loaded %d levels from %s: %s", len(corpus), directory, counts)
        return corpus
