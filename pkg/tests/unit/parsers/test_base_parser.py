"""Test base parser functionality."""

import pytest

from statepipe.parsers.base import BaseParser
from statepipe.parsers.base.parser import jaccard, normalize_text, tokenize


class EchoParser(BaseParser[str]):
    """Parser returning its input, flagging empty text."""

    def parse(self, text: str) -> str:
        """Echo the text."""
        if not text:
            self._add_error("empty")
        return text


def test_base_parser_initialization() -> None:
    """A fresh parser has no errors."""
    parser = EchoParser()
    assert parser.errors == []
    assert parser.malformed_count == 0


def test_parse_lines() -> None:
    """Lines are stripped and blanks dropped."""
    parser = EchoParser()
    assert parser._parse_lines("line 1\n  line 2  \n\nline 3\n") == ["line 1", "line 2", "line 3"]


def test_error_handling() -> None:
    """Errors are counted and cleared together."""
    parser = EchoParser()
    parser.parse("")
    parser.parse("")
    assert parser.get_errors() == ["empty", "empty"]
    assert parser.malformed_count == 2

    parser.clear_errors()
    assert parser.get_errors() == []
    assert parser.malformed_count == 0


@pytest.mark.parametrize(
    ("raw", "expected"),
    [
        ("Peel the Apple!", "peel the apple"),
        ("  slice,  it\tthinly. ", "slice it thinly"),
        ("", ""),
    ],
)
def test_normalize_text(raw: str, expected: str) -> None:
    """Lowercased, punctuation-free, single-spaced."""
    assert normalize_text(raw) == expected


def test_jaccard() -> None:
    """Token overlap over token union."""
    assert jaccard("peel the apple", "Peel the apple.") == 1.0
    assert jaccard("peel the apple", "slice the apple") == pytest.approx(2 / 4)
    assert jaccard("", "") == 0.0
    assert tokenize("a b a") == {"a", "b"}
