"""
Statepipe package entry point for python -m statepipe usage.

This module enables running Statepipe as a module:
    python -m statepipe [commands...]
"""

from statepipe.cli.main import main

if __name__ == "__main__":
    main()
