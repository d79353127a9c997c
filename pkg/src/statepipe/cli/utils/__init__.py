"""CLI utilities: Rich output, logging setup and configuration loading."""
