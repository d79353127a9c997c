"""
Output utilities for the Statepipe CLI.

Console instances, logging setup, formatted messages and Rich-rendered help.
"""

import logging
import sys
import types
from typing import Any, Self

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.progress import Progress, SpinnerColumn, TextColumn, TimeElapsedColumn
from rich.text import Text
from rich.theme import Theme

from statepipe.utils.logging import PACKAGE_LOGGER

__all__ = [
    "ProgressReporter",
    "RichCommand",
    "RichGroup",
    "console",
    "error_console",
    "handle_keyboard_interrupt",
    "log_level",
    "print_error",
    "print_success",
    "print_warning",
    "setup_logging",
    "success_console",
]

STATEPIPE_THEME = Theme(
    {
        "info": "cyan",
        "warning": "yellow",
        "error": "bold red",
        "success": "bold green",
        "debug": "dim cyan",
        "highlight": "bold magenta",
    },
)

console = Console(theme=STATEPIPE_THEME)
error_console = Console(stderr=True, theme=STATEPIPE_THEME, style="error")
success_console = Console(theme=STATEPIPE_THEME, style="success")


def log_level(verbose: int = 0, quiet: bool = False) -> int:  # noqa: FBT001, FBT002
    """Logging level for a verbosity count: 0 warnings, 1 info, 2+ debug; quiet means errors only."""
    if quiet:
        return logging.ERROR
    if verbose == 0:
        return logging.WARNING
    if verbose == 1:
        return logging.INFO
    return logging.DEBUG


def setup_logging(verbose: int = 0, quiet: bool = False) -> None:  # noqa: FBT001, FBT002
    """
    Route library logging through a Rich handler.

    Args:
        verbose: Verbosity count from ``-v``
        quiet: Suppress everything below errors

    """
    level = log_level(verbose, quiet)
    rich_handler = RichHandler(
        console=error_console,
        show_time=verbose > 1,
        show_path=verbose > 1,
        markup=False,
        rich_tracebacks=True,
    )
    rich_handler.setLevel(level)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[rich_handler],
        force=True,
    )
    logging.getLogger(PACKAGE_LOGGER).setLevel(level)


def print_warning(message: str, **kwargs: Any) -> None:  # noqa: ANN401
    """Print a warning message."""
    console.print(f"⚠️ {message}", style="warning", **kwargs)


def print_error(message: str, **kwargs: Any) -> None:  # noqa: ANN401
    """Print an error message."""
    error_console.print(f"❌ {message}", style="error", **kwargs)


def print_success(message: str, **kwargs: Any) -> None:  # noqa: ANN401
    """Print a success message."""
    success_console.print(f"✅ {message}", style="success", **kwargs)


def handle_keyboard_interrupt() -> None:
    """Handle Ctrl+C gracefully."""
    print_warning("Operation cancelled by user")
    sys.exit(130)


class ProgressReporter:
    """Spinner for long-running stages."""

    def __init__(self, description: str, console: Console | None = None, *, enabled: bool = True) -> None:
        """Initialize with the first description."""
        self.description = description
        self.console = console or globals()["console"]
        self.enabled = enabled
        self.progress: Progress | None = None
        self.task: Any = None

    def __enter__(self) -> Self:
        """Start the spinner."""
        if self.enabled:
            self.progress = Progress(
                SpinnerColumn(),
                TextColumn("[progress.description]{task.description}"),
                TimeElapsedColumn(),
                console=self.console,
                transient=True,
            )
            self.progress.start()
            self.task = self.progress.add_task(self.description, total=None)
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc_val: BaseException | None,
        exc_tb: types.TracebackType | None,
    ) -> None:
        """Stop the spinner."""
        if self.progress:
            self.progress.stop()

    def update(self, description: str) -> None:
        """Update the progress description."""
        if self.progress and self.task is not None:
            self.progress.update(self.task, description=description)


def _options_section(content: Text, params: list[click.Parameter]) -> None:
    options = [p for p in params if isinstance(p, click.Option)]
    if not options:
        return
    content.append("Options:\n", style="bold yellow")
    for param in options:
        opts = "/".join(param.opts)
        envvar = f" [env {param.envvar}]" if isinstance(param.envvar, str) else ""
        content.append(f"  {opts:24} {param.help or ''}{envvar}\n")
    content.append("\n")


def _help_panel(content: Text, title: str) -> None:
    console.print(Panel(content, title=title, border_style="magenta", padding=(1, 2)))


class RichGroup(click.Group):
    """Click group whose help page is a Rich panel."""

    def format_help(self, ctx: click.Context, formatter: click.HelpFormatter) -> None:  # noqa: ARG002
        """Render usage, options and subcommands."""
        content = Text()
        if self.name:
            content.append(f"{self.name}\n", style="bold magenta")
        summary = self.get_short_help_str(limit=120)
        if summary:
            content.append(f"{summary}\n\n")
        content.append("Usage:\n", style="bold yellow")
        content.append(f"  {self.get_usage(ctx)}\n\n", style="dim")
        _options_section(content, self.params)
        if self.commands:
            content.append("Commands:\n", style="bold yellow")
            for name in self.list_commands(ctx):
                command = self.commands[name]
                content.append(f"  {name:24} {command.get_short_help_str(limit=80)}\n")
        _help_panel(content, "Statepipe CLI Help")


class RichCommand(click.Command):
    """Click command whose help page is a Rich panel with an optional examples block."""

    def format_help(self, ctx: click.Context, formatter: click.HelpFormatter) -> None:  # noqa: ARG002
        """Render description, usage, arguments, options and examples."""
        description, _, examples = (self.help or "No help available.").partition("Examples:")
        content = Text()
        if self.name:
            content.append(f"{self.name}\n", style="bold magenta")
        content.append(f"{description.strip()}\n\n")
        content.append("Usage:\n", style="bold yellow")
        content.append(f"  {self.get_usage(ctx)}\n\n", style="dim")

        arguments = [p for p in self.params if isinstance(p, click.Argument)]
        if arguments:
            content.append("Arguments:\n", style="bold yellow")
            for param in arguments:
                name = (param.name or "").upper()
                content.append(f"  {name:24} {'required' if param.required else 'optional'}\n")
            content.append("\n")
        _options_section(content, self.params)

        lines = [line for line in examples.splitlines() if line.strip()]
        if lines:
            content.append("Examples:\n", style="bold yellow")
            for line in lines:
                style = "dim cyan" if line.strip().startswith("#") else "dim"
                content.append(f"  {line.strip()}\n", style=style)
        _help_panel(content, f"Statepipe - {self.name}")
