"""Run outputs: CSV reports, text, images and the run manifest."""
import csv
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

from PIL import Image

from app.core.config import RunConfig
from app.repositories.base import file_sha256

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


class ReportRepository:
    """Writes the artifacts of one command into an output directory."""

    def __init__(self, out_dir: str | Path):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.written: List[Path] = []

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def _record(self, path: Path) -> Path:
        if path not in self.written:
            self.written.append(path)
        logger.info("Wrote %s", path)
        return path

    def record(self, path: str | Path) -> Path:
        """Track a file written by another repository."""
        return self._record(Path(path))

    def write_csv(self, name: str, fields: Sequence[str], rows: Iterable[Mapping]) -> Path:
        target = self.path(name)
        with open(target, "w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(fields))
            writer.writeheader()
            for row in rows:
                writer.writerow({key: row[key] for key in fields})
        return self._record(target)

    def write_text(self, name: str, text: str) -> Path:
        target = self.path(name)
        target.write_text(text, encoding="utf-8")
        return self._record(target)

    def write_json(self, name: str, payload) -> Path:
        target = self.path(name)
        target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return self._record(target)

    def write_image(self, name: str, image: Image.Image) -> Path:
        target = self.path(name)
        image.save(target, format="PNG")
        return self._record(target)

    def write_manifest(
        self,
        command: str,
        config: RunConfig,
        inputs: Optional[Sequence[str | Path]] = None,
    ) -> Path:
        """
        manifest.json: command, seed, full config and sha256 of every input and output.

        No timestamps, so reruns with the same inputs produce the same manifest.
        """
        def digests(paths) -> Dict[str, str]:
            return {str(p): file_sha256(p) for p in paths if p and Path(p).is_file()}

        manifest = {
            "command": command,
            "seed": config.seed,
            "config": config.model_dump(mode="json"),
            "inputs": digests(inputs or []),
            "outputs": digests(p for p in self.written if p.name != MANIFEST_NAME),
        }
        target = self.path(MANIFEST_NAME)
        target.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return target
