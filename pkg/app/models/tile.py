"""Tile roles and the glyph alphabet."""
from enum import Enum as PyEnum
from pathlib import Path
from typing import Dict, FrozenSet, Optional

import yaml
from pydantic import BaseModel, ConfigDict, PrivateAttr, ValidationError, field_validator

from app.core.exceptions import ConfigError


class TileRole(PyEnum):
    """Tile role enumeration."""

    EMPTY = "empty"
    SOLID = "solid"
    BREAKABLE = "breakable"
    QUESTION = "question"
    COIN = "coin"
    ENEMY = "enemy"
    PIPE_TOP_LEFT = "pipe-top-left"
    PIPE_TOP_RIGHT = "pipe-top-right"
    PIPE_BODY_LEFT = "pipe-body-left"
    PIPE_BODY_RIGHT = "pipe-body-right"
    CANNON_HEAD = "cannon-head"
    CANNON_BODY = "cannon-body"


PIPE_ROLES: FrozenSet[TileRole] = frozenset(
    {
        TileRole.PIPE_TOP_LEFT,
        TileRole.PIPE_TOP_RIGHT,
        TileRole.PIPE_BODY_LEFT,
        TileRole.PIPE_BODY_RIGHT,
    }
)
CANNON_ROLES: FrozenSet[TileRole] = frozenset({TileRole.CANNON_HEAD, TileRole.CANNON_BODY})

# Roles that support the player and block movement
SOLID_ROLES: FrozenSet[TileRole] = frozenset(
    {TileRole.SOLID, TileRole.BREAKABLE, TileRole.QUESTION} | PIPE_ROLES | CANNON_ROLES
)


class TileAlphabet(BaseModel):
    """Total mapping glyph -> role for one level format."""

    model_config = ConfigDict(frozen=True)

    glyphs: Dict[str, TileRole]

    _solid: FrozenSet[str] = PrivateAttr(default=frozenset())
    _canonical: Dict[TileRole, str] = PrivateAttr(default_factory=dict)

    @field_validator("glyphs")
    @classmethod
    def validate_glyphs(cls, v: Dict[str, TileRole]) -> Dict[str, TileRole]:
        """Every glyph is one character and every role is represented."""
        for glyph in v:
            if len(glyph) != 1 or glyph in "\r\n":
                raise ValueError(f"glyph {glyph!r} must be a single printable character")
        missing = set(TileRole) - set(v.values())
        if missing:
            names = ", ".join(sorted(r.value for r in missing))
            raise ValueError(f"alphabet has no glyph for roles: {names}")
        return v

    def __hash__(self) -> int:
        return hash(tuple(sorted((g, r.value) for g, r in self.glyphs.items())))

    def model_post_init(self, __context) -> None:
        self._solid = frozenset(g for g, r in self.glyphs.items() if r in SOLID_ROLES)
        canonical: Dict[TileRole, str] = {}
        for glyph, role in self.glyphs.items():
            canonical.setdefault(role, glyph)
        self._canonical = canonical

    @property
    def solid_glyphs(self) -> FrozenSet[str]:
        """Glyphs the player can stand on."""
        return self._solid

    def role(self, glyph: str) -> Optional[TileRole]:
        """Role of a glyph, None if the glyph is unknown."""
        return self.glyphs.get(glyph)

    def is_solid(self, glyph: str) -> bool:
        """Whether a glyph blocks and supports the player."""
        return glyph in self._solid

    def glyph(self, role: TileRole) -> str:
        """First declared glyph for a role."""
        return self._canonical[role]


DEFAULT_ALPHABET = TileAlphabet(
    glyphs={
        "-": TileRole.EMPTY,
        "X": TileRole.SOLID,
        "S": TileRole.BREAKABLE,
        "?": TileRole.QUESTION,
        "Q": TileRole.QUESTION,
        "o": TileRole.COIN,
        "E": TileRole.ENEMY,
        "<": TileRole.PIPE_TOP_LEFT,
        ">": TileRole.PIPE_TOP_RIGHT,
        "[": TileRole.PIPE_BODY_LEFT,
        "]": TileRole.PIPE_BODY_RIGHT,
        "B": TileRole.CANNON_HEAD,
        "b": TileRole.CANNON_BODY,
    }
)


def load_alphabet(path: Optional[str | Path] = None) -> TileAlphabet:
    """
    Load a glyph -> role mapping from a YAML or JSON file.

    Args:
        path: Alphabet file, None for the VGLC default

    Returns:
        TileAlphabet: Validated alphabet

    Raises:
        ConfigError: If the file is missing or the mapping is invalid
    """
    if path is None:
        return DEFAULT_ALPHABET
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"Cannot read alphabet file '{path}'") from e
    if isinstance(data, dict) and "glyphs" not in data:
        data = {"glyphs": data}
    try:
        return TileAlphabet.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid alphabet file '{path}': {e}") from e
