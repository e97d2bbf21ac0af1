"""
Run manifests: everything needed to reproduce a command.

A manifest is a configuration file whose first lines are '#' comments with
the run metadata, so it can be passed back as ``--config``.
"""
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from src.config import ARTIFACT_VERSION
from src.errors import DataFileError

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'run_manifest.txt'


@dataclass(frozen=True)
class RunManifest:
    """Command, resolved configuration, seed, version and start time."""
    command: str
    config: dict[str, str]
    seed: int
    version: str = ARTIFACT_VERSION
    started_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def render(self) -> str:
        lines = [
            f"# command={self.command}",
            f"# version={self.version}",
            f"# seed={self.seed}",
            f"# started_at={self.started_at}",
        ]
        lines += [f"{key}={value}" for key, value in self.config.items()]
        return '\n'.join(lines) + '\n'

    def write(self, path: Path) -> Path:
        """Write the manifest, creating parent directories."""
        try:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            Path(path).write_text(self.render())
        except OSError as exc:
            raise DataFileError(f"Cannot write manifest {path}: {exc}") from exc
        logger.info("Wrote run manifest %s", path)
        return Path(path)
