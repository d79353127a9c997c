"""Base parser class for language-model and transcript parsers."""

import re
import string
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Generic, TypeVar

T = TypeVar("T")

_PUNCTUATION = re.compile(f"[{re.escape(string.punctuation)}]")
_WHITESPACE = re.compile(r"\s+")


@dataclass(frozen=True)
class ParseResult(Generic[T]):
    """A parsed value plus whether the raw text followed the expected format."""

    value: T
    ok: bool = True


class BaseParser(ABC, Generic[T]):
    """
    Abstract base class for response parsers.

    Parsers never raise on malformed model output: they return a documented
    fallback value and record the problem, so callers can report counters.
    """

    def __init__(self) -> None:
        """Initialize the parser."""
        self.errors: list[str] = []
        self.malformed_count: int = 0

    @abstractmethod
    def parse(self, text: str) -> T:
        """Parse raw response text.

        Args:
            text: Raw response text

        Returns:
            Parsed value (a fallback value when the text is malformed)
        """

    def get_errors(self) -> list[str]:
        """Get list of parsing errors.

        Returns:
            List of error messages
        """
        return self.errors.copy()

    def clear_errors(self) -> None:
        """Clear the error list and the malformed counter."""
        self.errors.clear()
        self.malformed_count = 0

    def _add_error(self, error_message: str) -> None:
        """Record a malformed item.

        Args:
            error_message: Error message to add
        """
        self.errors.append(error_message)
        self.malformed_count += 1

    def _parse_lines(self, text: str) -> list[str]:
        """Split text into stripped, non-empty lines."""
        return [line.strip() for line in text.splitlines() if line.strip()]


def normalize_text(text: str) -> str:
    """Lowercase, strip punctuation and collapse whitespace."""
    return _WHITESPACE.sub(" ", _PUNCTUATION.sub(" ", text.lower())).strip()


def tokenize(text: str) -> set[str]:
    """Normalized token set."""
    return set(normalize_text(text).split())


def jaccard(a: str, b: str) -> float:
    """Token-level Jaccard overlap of two strings."""
    left, right = tokenize(a), tokenize(b)
    if not left and not right:
        return 0.0
    return len(left & right) / len(left | right)
