"""Subcommands of the Statepipe CLI."""
