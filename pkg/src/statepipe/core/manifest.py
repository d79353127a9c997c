"""Pipeline manifest: per-stage content hashes, per-video status and counters."""

import logging
import os
import tempfile
import threading
from datetime import UTC, datetime
from pathlib import Path

from pydantic import BaseModel, Field

from statepipe.core.exceptions import FormatError
from statepipe.models.base import StageName
from statepipe.utils.hash_generator import HashGenerator

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1


def manifest_path(work_dir: str | Path) -> Path:
    """Location of the manifest inside a work directory."""
    return Path(work_dir) / MANIFEST_NAME


class StageRecord(BaseModel):
    """Completed stage: what went in, what came out."""

    stage: StageName
    input_hash: str = Field(description="Hash of settings, external inputs and upstream outputs")
    outputs: dict[str, str] = Field(
        default_factory=dict,
        description="Work-dir relative POSIX path -> content hash",
    )
    counters: dict[str, float] = Field(default_factory=dict)
    completed_at: str = Field(default_factory=lambda: datetime.now(UTC).isoformat())


class PipelineManifest(BaseModel):
    """State of one object category's work directory."""

    version: int = MANIFEST_VERSION
    object_name: str
    stages: dict[StageName, StageRecord] = Field(default_factory=dict)
    videos: dict[str, dict[StageName, str]] = Field(
        default_factory=dict,
        description="video id -> stage -> status",
    )
    executed: list[StageName] = Field(default_factory=list, description="Stages run by the latest invocation")
    skipped: list[StageName] = Field(default_factory=list, description="Stages found up to date")

    def counters(self) -> dict[str, float]:
        """Counters of every recorded stage, keyed ``<stage>.<name>``."""
        return {
            f"{stage.value}.{name}": value
            for stage, record in sorted(self.stages.items(), key=lambda item: list(StageName).index(item[0]))
            for name, value in sorted(record.counters.items())
        }

    def set_video_status(self, video_id: str, stage: StageName, status: str) -> None:
        """Record a video's status for a stage."""
        self.videos.setdefault(video_id, {})[stage] = status


class ManifestStore:
    """Reads, hashes and atomically rewrites ``manifest.json``; writes are serialized."""

    def __init__(self, path: Path, hash_generator: HashGenerator | None = None) -> None:
        """
        Initialize the store.

        Args:
            path: Manifest file location
            hash_generator: Hasher for stage outputs

        """
        self.path = path
        self.hasher = hash_generator or HashGenerator()
        self._lock = threading.Lock()

    @property
    def work_dir(self) -> Path:
        """Directory that recorded output paths are relative to."""
        return self.path.parent

    def load(self) -> PipelineManifest | None:
        """
        The stored manifest, or None when there is none yet.

        Raises:
            FormatError: The file exists but does not validate

        """
        if not self.path.is_file():
            return None
        try:
            return PipelineManifest.model_validate_json(self.path.read_text(encoding="utf-8"))
        except ValueError as e:
            msg = f"Unreadable manifest: {e}"
            raise FormatError(msg, path=str(self.path)) from e

    def save(self, manifest: PipelineManifest) -> None:
        """Atomically replace the manifest file."""
        text = manifest.model_dump_json(indent=2) + "\n"
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp_name = tempfile.mkstemp(dir=self.path.parent, prefix=".manifest-")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as handle:
                    handle.write(text)
                Path(tmp_name).replace(self.path)
            except BaseException:
                Path(tmp_name).unlink(missing_ok=True)
                raise
        logger.debug("Saved manifest with %d stages", len(manifest.stages))

    def hash_outputs(self, relative_paths: list[str]) -> dict[str, str]:
        """
        Hash files and directory trees under the work directory.

        Directories contribute one entry per contained file; missing paths
        contribute nothing.
        """
        hashes: dict[str, str] = {}
        for relative in relative_paths:
            target = self.work_dir / relative
            if target.is_dir():
                for name, digest in self.hasher.hash_tree(target).items():
                    hashes[f"{relative.rstrip('/')}/{name}"] = digest
            elif target.is_file():
                hashes[relative] = self.hasher.hash_file(target)
        return hashes

    def is_current(
        self,
        manifest: PipelineManifest | None,
        stage: StageName,
        input_hash: str,
        relative_paths: list[str],
    ) -> bool:
        """True when the stage ran with these inputs and its outputs are byte-unchanged."""
        if manifest is None:
            return False
        record = manifest.stages.get(stage)
        if record is None or record.input_hash != input_hash:
            return False
        current = self.hash_outputs(relative_paths)
        if current != record.outputs:
            logger.info("%s outputs changed on disk", stage.value)
            return False
        return True
