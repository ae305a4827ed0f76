"""ASCII and raster rendering of levels."""
from enum import Enum
from typing import Dict, Tuple

from PIL import Image, ImageDraw

from app.core.exceptions import ConfigError
from app.models import DEFAULT_ALPHABET, Level, TileAlphabet, TileRole
from app.services.level_service import serialize_level

TILE_PIXELS = 8

ROLE_COLORS: Dict[TileRole, Tuple[int, int, int]] = {
    TileRole.EMPTY: (92, 148, 252),
    TileRole.SOLID: (132, 94, 60),
    TileRole.BREAKABLE: (200, 76, 12),
    TileRole.QUESTION: (252, 188, 0),
    TileRole.COIN: (252, 224, 56),
    TileRole.ENEMY: (164, 100, 34),
    TileRole.PIPE_TOP_LEFT: (60, 188, 12),
    TileRole.PIPE_TOP_RIGHT: (60, 188, 12),
    TileRole.PIPE_BODY_LEFT: (40, 140, 8),
    TileRole.PIPE_BODY_RIGHT: (40, 140, 8),
    TileRole.CANNON_HEAD: (20, 20, 20),
    TileRole.CANNON_BODY: (70, 70, 70),
}


class RenderStyle(str, Enum):
    ASCII = "ascii"
    IMAGE = "image"


def parse_style(style: str) -> RenderStyle:
    try:
        return RenderStyle(style)
    except ValueError:
        allowed = ", ".join(s.value for s in RenderStyle)
        raise ConfigError(f"Unknown render style '{style}' (expected one of: {allowed})") from None


def render_ascii(level: Level) -> str:
    """Glyph-preserving text rendering (parses back to the same level)."""
    return serialize_level(level)


def render_image(level: Level, alphabet: TileAlphabet = DEFAULT_ALPHABET, tile: int = TILE_PIXELS) -> Image.Image:
    """RGB image with one `tile` x `tile` block per tile, colored by role."""
    image = Image.new("RGB", (level.width * tile, level.height * tile), ROLE_COLORS[TileRole.EMPTY])
    draw = ImageDraw.Draw(image)
    for r, row in enumerate(level.rows):
        for c, glyph in enumerate(row):
            role = alphabet.role(glyph)
            if role is None or role == TileRole.EMPTY:
                continue
            x, y = c * tile, r * tile
            draw.rectangle([x, y, x + tile - 1, y + tile - 1], fill=ROLE_COLORS[role])
    return image
