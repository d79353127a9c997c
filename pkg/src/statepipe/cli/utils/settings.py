"""
Configuration helpers for the Statepipe CLI.

Loads the pipeline YAML, applies the global command-line overrides and builds
the application container.
"""

from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import click
import pydantic

from statepipe.cli.utils.output import console, handle_keyboard_interrupt, print_error
from statepipe.containers.application import ApplicationContainer
from statepipe.containers.config import LlmClientConfig, StatepipeConfig, TrainConfig, load_statepipe_config
from statepipe.core.exceptions import StatepipeError
from statepipe.models import CacheMode


@dataclass(frozen=True)
class GlobalOptions:
    """Overrides given on the top-level command line."""

    cache: Path | None = None
    mode: CacheMode | None = None
    seed: int | None = None
    threads: int | None = None
    deterministic: bool = False
    llm_url: str | None = None
    llm_key: str | None = None
    vlm_url: str | None = None

    @property
    def worker_threads(self) -> int | None:
        """Thread count to enforce, if any."""
        return 1 if self.deterministic else self.threads

    def apply_llm(self, llm: LlmClientConfig) -> LlmClientConfig:
        """Client settings with the cache, mode and endpoint overrides applied."""
        update: dict[str, object] = {}
        if self.cache is not None:
            update["cache_dir"] = str(self.cache / "llm")
        if self.mode is not None:
            update["mode"] = self.mode
        if self.llm_url:
            update["url"] = self.llm_url
        if self.llm_key:
            update["api_key"] = self.llm_key
        return llm.model_copy(update=update)

    def apply(self, config: StatepipeConfig) -> StatepipeConfig:
        """Configuration with every override applied."""
        vlm_update: dict[str, object] = {}
        if self.cache is not None:
            vlm_update["cache_dir"] = str(self.cache / "vlm")
        if self.mode is not None:
            vlm_update["mode"] = self.mode
        if self.vlm_url:
            vlm_update["url"] = self.vlm_url

        update: dict[str, object] = {
            "llm": self.apply_llm(config.llm),
            "vlm": config.vlm.model_copy(update=vlm_update),
        }
        if self.seed is not None:
            update["train"] = config.train.model_copy(update={"seed": self.seed})
        threads = self.worker_threads
        if threads is not None:
            update["pipeline"] = config.pipeline.model_copy(update={"threads": threads})
            update["labeler"] = config.labeler.model_copy(update={"max_concurrency": threads})
            update["alignment"] = config.alignment.model_copy(update={"max_concurrency": threads})
        return config.model_copy(update=update)


def global_options(ctx: click.Context) -> GlobalOptions:
    """Overrides stored by the top-level group."""
    return ctx.obj.get("options", GlobalOptions()) if ctx.obj else GlobalOptions()


def load_settings(ctx: click.Context, train_config: Path | None = None) -> StatepipeConfig:
    """
    Load the ``--config`` pipeline file with all overrides applied.

    Args:
        ctx: Click context holding the global options
        train_config: Optional key=value (or YAML) training configuration

    Raises:
        click.UsageError: No configuration file was given

    """
    config_file = ctx.obj.get("config_file") if ctx.obj else None
    if config_file is None:
        msg = "this command needs a pipeline configuration (--config or STATEPIPE_CONFIG)"
        raise click.UsageError(msg)
    settings = load_statepipe_config(config_file)
    if train_config is not None:
        settings = settings.model_copy(update={"train": TrainConfig.from_file(train_config)})
    return global_options(ctx).apply(settings)


def optional_settings(ctx: click.Context) -> StatepipeConfig | None:
    """The ``--config`` pipeline file with overrides applied, or None when no file was given."""
    if not ctx.obj or ctx.obj.get("config_file") is None:
        return None
    return load_settings(ctx)


def llm_settings(ctx: click.Context) -> LlmClientConfig:
    """Chat client settings from ``--config`` when given, else the defaults with the global overrides."""
    settings = optional_settings(ctx)
    if settings is not None:
        return settings.llm
    return global_options(ctx).apply_llm(LlmClientConfig())


def train_settings(ctx: click.Context, train_config: Path | None) -> TrainConfig:
    """
    Training settings for the standalone train commands.

    The key=value file wins over the ``train`` section of ``--config``; the
    global ``--seed`` applies to either.
    """
    if train_config is not None:
        config = TrainConfig.from_file(train_config)
    else:
        settings = optional_settings(ctx)
        config = settings.train if settings is not None else TrainConfig()
    seed = global_options(ctx).seed
    return config if seed is None else config.model_copy(update={"seed": seed})


def build_container(settings: StatepipeConfig) -> ApplicationContainer:
    """Application container configured from validated settings."""
    container = ApplicationContainer()
    container.config.from_dict(settings.model_dump(mode="json"))
    return container


@contextmanager
def cli_errors(ctx: click.Context) -> Iterator[None]:
    """Print library and validation errors, with a traceback at ``-v``, and exit 1."""
    try:
        yield
    except KeyboardInterrupt:
        handle_keyboard_interrupt()
    except (StatepipeError, pydantic.ValidationError) as e:
        print_error(e.message if isinstance(e, StatepipeError) else str(e))
        if ctx.obj and ctx.obj.get("verbose", 0) > 0:
            console.print_exception()
        ctx.exit(1)
