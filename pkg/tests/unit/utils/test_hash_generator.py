"""Tests for content hashing."""

import hashlib
from pathlib import Path

import pytest

from statepipe.core.exceptions import FormatError
from statepipe.utils.hash_generator import HashGenerator


class TestHashGenerator:
    """Digests used by the manifest and the response caches."""

    def test_canonical_json(self) -> None:
        """Key order and whitespace do not change the hash."""
        hasher = HashGenerator()
        assert hasher.hash_json({"b": 1, "a": [1, 2]}) == hasher.hash_json({"a": [1, 2], "b": 1})
        assert hasher.hash_json({"a": 1}) == hashlib.sha256(b'{"a":1}').hexdigest()

    def test_tree(self, tmp_path: Path) -> None:
        """Files keyed by relative POSIX path; directories are not entries."""
        (tmp_path / "sub").mkdir()
        (tmp_path / "sub" / "x.txt").write_text("x")
        (tmp_path / "y.txt").write_text("y")
        hasher = HashGenerator()
        assert hasher.hash_tree(tmp_path) == {"sub/x.txt": hasher.hash_string("x"), "y.txt": hasher.hash_string("y")}

    def test_missing_file(self, tmp_path: Path) -> None:
        """Unreadable files are format errors."""
        with pytest.raises(FormatError, match="Cannot hash"):
            HashGenerator().hash_file(tmp_path / "absent")

    def test_unknown_algorithm(self) -> None:
        """Unsupported algorithms are rejected up front."""
        with pytest.raises(ValueError, match="not available"):
            HashGenerator("nope")
