"""Latent-to-segment generator backends."""
import hashlib
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import BackendKind
from app.core.exceptions import CorpusError, GeneratorError
from app.models import LATENT_DIM, DEFAULT_ALPHABET, LatentVector, Level, Segment, TileAlphabet, TileRole
from app.models.level import SEGMENT_HEIGHT, SEGMENT_WIDTH
from app.services.level_service import serialize_level, slice_segments
from app.services.repair_service import repair

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PoolEntry:
    """One pool segment and its latent code."""

    segment: Segment
    code: LatentVector


@dataclass(frozen=True)
class SegmentPool:
    """Repaired corpus segments with seeded latent codes."""

    entries: Tuple[PoolEntry, ...]
    seed: int
    corpus_hash: str
    source: str = ""

    def __post_init__(self):
        if not self.entries:
            raise GeneratorError("Segment pool has no entries")
        shape = self.entries[0].segment.shape
        if any(e.segment.shape != shape for e in self.entries):
            raise GeneratorError("Segment pool entries differ in size")

    @property
    def segment_shape(self) -> Tuple[int, int]:
        return self.entries[0].segment.shape


class GeneratorBackend(ABC):
    """Deterministic decoder from [-1, 1]^32 to a segment."""

    kind: BackendKind

    @abstractmethod
    def generate(self, z: LatentVector) -> Segment:
        """Decode a latent vector."""


class PoolBackend(GeneratorBackend):
    """Nearest-code lookup in a segment pool."""

    kind = BackendKind.POOL

    def __init__(self, pool: Optional[SegmentPool]):
        self.pool = pool
        self._codes = None
        if pool is not None:
            self._codes = np.stack([entry.code.array() for entry in pool.entries])

    def generate(self, z: LatentVector) -> Segment:
        if self.pool is None or self._codes is None:
            raise GeneratorError("Pool backend is not initialized")
        distances = np.sum((self._codes - z.array()) ** 2, axis=1)
        # argmin returns the lowest index on ties
        return self.pool.entries[int(np.argmin(distances))].segment


def _round(x: float) -> int:
    """Round half away from zero."""
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def ground_heights(z: LatentVector) -> List[int]:
    """Per-column ground heights from dims 0-13, smoothed to steps of at most 2."""
    values = z.values
    heights = [_round(4 + 3 * values[i]) for i in range(SEGMENT_WIDTH)]
    for c in range(1, SEGMENT_WIDTH):
        heights[c] = min(max(heights[c], heights[c - 1] - 2), heights[c - 1] + 2)
    return heights


def procedural_decode(z: LatentVector, alphabet: TileAlphabet = DEFAULT_ALPHABET) -> Segment:
    """
    Fixed decoding of a latent vector into a 14x14 segment.

    dims 0-13 ground heights, 14-17 gaps, 18-21 pipes, 22-25 enemies,
    26-29 question blocks (positive) or coins (negative), 30-31 breakable platforms.
    """
    h, w = SEGMENT_HEIGHT, SEGMENT_WIDTH
    v = z.values
    heights = ground_heights(z)

    for j in range(14, 18):
        if v[j] > 0.5:
            c = min(_round(6.5 * (v[j] + 1)), w - 2)
            heights[c] = heights[c + 1] = 0

    pipes = []
    taken = set()
    for j in range(18, 22):
        if v[j] > 0.3:
            c = min(_round(6 * (v[j] + 1)), w - 2)
            # pipes never share a column
            if c in taken or c + 1 in taken:
                continue
            taken.update((c, c + 1))
            base = max(heights[c], heights[c + 1])
            heights[c] = heights[c + 1] = base
            pipes.append((c, 2 + _round(v[j] + 1)))

    empty = alphabet.glyph(TileRole.EMPTY)
    grid = [[empty] * w for _ in range(h)]
    ground = alphabet.glyph(TileRole.SOLID)
    for c, height in enumerate(heights):
        for r in range(h - height, h):
            grid[r][c] = ground

    def surface(col: int) -> int:
        """Row index of the topmost ground tile (h for a gap)."""
        return h - heights[col]

    for c, pipe_height in pipes:
        top = max(surface(c) - pipe_height, 0)
        for col, head, body in (
            (c, TileRole.PIPE_TOP_LEFT, TileRole.PIPE_BODY_LEFT),
            (c + 1, TileRole.PIPE_TOP_RIGHT, TileRole.PIPE_BODY_RIGHT),
        ):
            grid[top][col] = alphabet.glyph(head)
            for r in range(top + 1, surface(col)):
                grid[r][col] = alphabet.glyph(body)

    def place(row: int, col: int, glyph: str) -> None:
        if 0 <= row < h and 0 <= col < w and grid[row][col] == empty:
            grid[row][col] = glyph

    for j in range(30, 32):
        if v[j] > 0.6:
            c = _round(5 * (v[j] + 1))
            row = surface(c) - 3
            for col in range(c, min(c + 3, w)):
                place(row, col, alphabet.glyph(TileRole.BREAKABLE))

    for j in range(26, 30):
        if abs(v[j]) > 0.5:
            c = min(_round(6.5 * (v[j] + 1)), w - 1)
            role = TileRole.QUESTION if v[j] > 0 else TileRole.COIN
            place(surface(c) - 4, c, alphabet.glyph(role))

    for j in range(22, 26):
        if v[j] > 0.4:
            c = min(_round(6.5 * (v[j] + 1)), w - 1)
            if heights[c] > 0:
                place(surface(c) - 1, c, alphabet.glyph(TileRole.ENEMY))

    return Segment(tuple("".join(row) for row in grid))


class ProceduralBackend(GeneratorBackend):
    """Closed-form latent decoder."""

    kind = BackendKind.PROCEDURAL

    def __init__(self, alphabet: TileAlphabet = DEFAULT_ALPHABET):
        self.alphabet = alphabet

    def generate(self, z: LatentVector) -> Segment:
        return procedural_decode(z, self.alphabet)


class ExternalDecoderBackend(GeneratorBackend):
    """Feed-forward decoder loaded from a weights file (tanh hidden layers, per-tile argmax)."""

    kind = BackendKind.EXTERNAL

    def __init__(
        self,
        layers: Sequence[Tuple[np.ndarray, np.ndarray]],
        height: int,
        width: int,
        glyphs: str,
    ):
        if not layers:
            raise GeneratorError("External decoder has no layers")
        if layers[0][0].shape[1] != LATENT_DIM:
            raise GeneratorError(f"Decoder input size must be {LATENT_DIM}")
        if layers[-1][0].shape[0] != height * width * len(glyphs):
            raise GeneratorError("Decoder output size does not match height x width x glyphs")
        self.layers = [(np.asarray(wt, np.float64), np.asarray(b, np.float64)) for wt, b in layers]
        self.height = height
        self.width = width
        self.glyphs = glyphs

    def generate(self, z: LatentVector) -> Segment:
        x = z.array()
        for i, (weights, bias) in enumerate(self.layers):
            x = weights @ x + bias
            if i < len(self.layers) - 1:
                x = np.tanh(x)
        indices = np.argmax(x.reshape(self.height, self.width, len(self.glyphs)), axis=2)
        return Segment(tuple("".join(self.glyphs[i] for i in row) for row in indices))


def corpus_hash(levels: Sequence[Level]) -> str:
    """sha256 over the serialized corpus, in order."""
    digest = hashlib.sha256()
    for level in levels:
        digest.update(serialize_level(level).encode("utf-8"))
    return digest.hexdigest()


def build_pool(
    corpus: Sequence[Level],
    width: int = SEGMENT_WIDTH,
    stride: int = SEGMENT_WIDTH,
    seed: int = 0,
    alphabet: TileAlphabet = DEFAULT_ALPHABET,
    source: str = "",
) -> SegmentPool:
    """
    Slice, repair and encode a corpus.

    Args:
        corpus: Source levels
        width: Segment width
        stride: Slicing stride
        seed: Seed of the uniform code distribution
        alphabet: Glyph alphabet
        source: Corpus descriptor

    Returns:
        SegmentPool: Pool with one code per segment

    Raises:
        CorpusError: If the corpus is empty
    """
    if not corpus:
        raise CorpusError("Cannot build a pool from an empty corpus")
    segments = [
        repair(segment, alphabet)
        for level in corpus
        for segment in slice_segments(level, width, stride)
    ]
    codes = np.random.default_rng(seed).uniform(-1.0, 1.0, size=(len(segments), LATENT_DIM))
    entries = tuple(
        PoolEntry(segment, LatentVector.from_array(code)) for segment, code in zip(segments, codes)
    )
    logger.info("Built pool of %d segments (seed %d)", len(entries), seed)
    return SegmentPool(entries, seed, corpus_hash(corpus), source)
