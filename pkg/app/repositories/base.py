"""Base repository for artifacts stored as files."""
import hashlib
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Generic, TypeVar

from app.core.exceptions import CheckpointFormatError, DataError

ModelType = TypeVar("ModelType")


def file_sha256(path: str | Path) -> str:
    """Hex sha256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


class BaseRepository(Generic[ModelType], ABC):
    """Save and load one artifact type."""

    @abstractmethod
    def save(self, entity: ModelType, path: str | Path) -> Path:
        """
        Write an artifact.

        Args:
            entity: Artifact to write
            path: Destination file

        Returns:
            Path: Written file
        """

    @abstractmethod
    def load(self, path: str | Path) -> ModelType:
        """
        Read an artifact.

        Args:
            path: Source file

        Returns:
            ModelType: Loaded artifact
        """

    @staticmethod
    def read_bytes(path: str | Path) -> bytes:
        try:
            return Path(path).read_bytes()
        except OSError as e:
            raise DataError(f"Cannot read '{path}'", detail=str(e)) from e

    @staticmethod
    def write_bytes(path: str | Path, data: bytes) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)
        return target

    @staticmethod
    def check_header(data: bytes, magic: bytes, version: int, path: str | Path) -> int:
        """
        Validate magic and version byte.

        Returns:
            int: Offset of the body
        """
        if not data.startswith(magic):
            raise CheckpointFormatError(f"'{path}' is not a {magic.rstrip(bytes(1)).decode()} file")
        if len(data) <= len(magic) or data[len(magic)] != version:
            found = data[len(magic)] if len(data) > len(magic) else None
            raise CheckpointFormatError(f"'{path}' has unsupported version {found} (expected {version})")
        return len(magic) + 1
