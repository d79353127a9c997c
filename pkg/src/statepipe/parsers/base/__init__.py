"""Base parser module."""

from statepipe.parsers.base.parser import BaseParser, ParseResult

__all__ = ["BaseParser", "ParseResult"]
