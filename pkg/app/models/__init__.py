"""Domain models."""
from app.models.latent import LATENT_DIM, LatentVector
from app.models.level import CENSUS_FIELDS, ElementCensus, Level, Segment
from app.models.tile import DEFAULT_ALPHABET, TileAlphabet, TileRole

__all__ = [
    "LATENT_DIM",
    "LatentVector",
    "CENSUS_FIELDS",
    "ElementCensus",
    "Level",
    "Segment",
    "DEFAULT_ALPHABET",
    "TileAlphabet",
    "TileRole",
]
