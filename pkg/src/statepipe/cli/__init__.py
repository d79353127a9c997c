"""
Statepipe CLI interface.

Built with Click for command handling and Rich for terminal output.
"""

from statepipe.cli.main import main

__all__ = [
    "main",
]
