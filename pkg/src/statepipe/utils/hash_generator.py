"""Content hashing for manifests and response-cache keys."""

import hashlib
import json
from pathlib import Path
from typing import Any

from statepipe.core.exceptions import FormatError

# Manifest hashes and response-cache keys share one algorithm
STATEPIPE_HASH_ALGORITHM = "sha256"


class HashGenerator:
    """Hex digests of files, strings, directory trees and JSON payloads."""

    def __init__(self, algorithm: str = STATEPIPE_HASH_ALGORITHM) -> None:
        """Initialize with specified algorithm (defaults to SHA256)."""
        self.algorithm: str = algorithm.lower()
        if self.algorithm not in hashlib.algorithms_available:
            message: str = f"Hash algorithm '{self.algorithm}' is not available"
            raise ValueError(message)

    def hash_file(self, file_path: Path, chunk_size: int = 8192) -> str:
        """
        Hash a file's bytes.

        Raises:
            FormatError: The file is missing or unreadable

        """
        hasher = hashlib.new(self.algorithm)
        try:
            with file_path.open("rb") as f:
                for chunk in iter(lambda: f.read(chunk_size), b""):
                    hasher.update(chunk)
        except OSError as e:
            message = f"Cannot hash {file_path}: {e}"
            raise FormatError(message, path=str(file_path)) from e
        return hasher.hexdigest()

    def hash_string(self, data: str, encoding: str = "utf-8") -> str:
        """Hash encoded text."""
        return hashlib.new(self.algorithm, data.encode(encoding)).hexdigest()

    def hash_json(self, payload: Any) -> str:  # noqa: ANN401
        """Hash a JSON-serializable payload in canonical form (sorted keys, no spaces)."""
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return self.hash_string(canonical)

    def hash_tree(self, root: Path, pattern: str = "*") -> dict[str, str]:
        """Hash every file under a directory, keyed by POSIX path relative to root."""
        return {
            path.relative_to(root).as_posix(): self.hash_file(path)
            for path in sorted(root.rglob(pattern))
            if path.is_file()
        }
