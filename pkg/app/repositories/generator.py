"""Segment pool and external decoder checkpoints."""
import json
import struct
from pathlib import Path
from typing import Sequence, Tuple

import numpy as np

from app.core.exceptions import CheckpointFormatError
from app.models import LatentVector, Segment
from app.repositories.base import BaseRepository
from app.services.generator_service import ExternalDecoderBackend, PoolEntry, SegmentPool

POOL_MAGIC = b"EDRLPOOL"
POOL_VERSION = 1
DECODER_MAGIC = b"EDRLDEC\0"
DECODER_VERSION = 1


class PoolRepository(BaseRepository[SegmentPool]):
    """Pool file: magic, version byte, UTF-8 JSON body."""

    def save(self, entity: SegmentPool, path: str | Path) -> Path:
        height, width = entity.segment_shape
        body = {
            "seed": entity.seed,
            "corpus_hash": entity.corpus_hash,
            "source": entity.source,
            "width": width,
            "height": height,
            "entries": [
                {"rows": list(e.segment.rows), "code": list(e.code.values)} for e in entity.entries
            ],
        }
        data = POOL_MAGIC + bytes([POOL_VERSION]) + json.dumps(body, sort_keys=True).encode("utf-8")
        return self.write_bytes(path, data)

    def load(self, path: str | Path) -> SegmentPool:
        data = self.read_bytes(path)
        offset = self.check_header(data, POOL_MAGIC, POOL_VERSION, path)
        try:
            body = json.loads(data[offset:].decode("utf-8"))
            entries = tuple(
                PoolEntry(Segment(tuple(e["rows"])), LatentVector(tuple(float(v) for v in e["code"])))
                for e in body["entries"]
            )
            pool = SegmentPool(entries, int(body["seed"]), body["corpus_hash"], body.get("source", ""))
        except (ValueError, KeyError, TypeError) as e:
            raise CheckpointFormatError(f"'{path}' has a malformed pool body", detail=str(e)) from e
        if pool.segment_shape != (body["height"], body["width"]):
            raise CheckpointFormatError(f"'{path}' declares {body['height']}x{body['width']} segments")
        return pool


class DecoderRepository(BaseRepository[ExternalDecoderBackend]):
    """
    Decoder weights: magic, version byte, little-endian uint32 layer count,
    then per layer uint32 in, uint32 out, float32 weights (out x in, row-major)
    and float32 biases; then uint32 height, width, glyph count and the glyphs.
    """

    def save(self, entity: ExternalDecoderBackend, path: str | Path) -> Path:
        return write_decoder_weights(path, entity.layers, entity.height, entity.width, entity.glyphs)

    def load(self, path: str | Path) -> ExternalDecoderBackend:
        data = self.read_bytes(path)
        offset = self.check_header(data, DECODER_MAGIC, DECODER_VERSION, path)
        try:
            (count,), offset = struct.unpack_from("<I", data, offset), offset + 4
            layers = []
            for _ in range(count):
                n_in, n_out = struct.unpack_from("<II", data, offset)
                offset += 8
                weights = np.frombuffer(data, dtype="<f4", count=n_in * n_out, offset=offset).reshape(n_out, n_in)
                offset += 4 * n_in * n_out
                bias = np.frombuffer(data, dtype="<f4", count=n_out, offset=offset)
                offset += 4 * n_out
                layers.append((weights.astype(np.float64), bias.astype(np.float64)))
            height, width, n_glyphs = struct.unpack_from("<III", data, offset)
            offset += 12
            glyphs = data[offset:offset + n_glyphs].decode("ascii")
            if len(glyphs) != n_glyphs or offset + n_glyphs != len(data):
                raise ValueError("glyph table length mismatch")
        except (struct.error, ValueError, UnicodeDecodeError) as e:
            raise CheckpointFormatError(f"'{path}' has a malformed decoder body", detail=str(e)) from e
        return ExternalDecoderBackend(layers, height, width, glyphs)


def write_decoder_weights(
    path: str | Path,
    layers: Sequence[Tuple[np.ndarray, np.ndarray]],
    height: int,
    width: int,
    glyphs: str,
) -> Path:
    """Write a decoder weights file (weights stored as float32)."""
    parts = [DECODER_MAGIC, bytes([DECODER_VERSION]), struct.pack("<I", len(layers))]
    for weights, bias in layers:
        weights = np.asarray(weights, dtype="<f4")
        n_out, n_in = weights.shape
        parts.append(struct.pack("<II", n_in, n_out))
        parts.append(weights.tobytes(order="C"))
        parts.append(np.asarray(bias, dtype="<f4").reshape(n_out).tobytes())
    parts.append(struct.pack("<III", height, width, len(glyphs)))
    parts.append(glyphs.encode("ascii"))
    return BaseRepository.write_bytes(path, b"".join(parts))
