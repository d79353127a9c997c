"""
Main CLI entry point for Statepipe.

Global options configure logging, the response caches, seeding and threading
for every subcommand.
"""

from pathlib import Path

import click
from rich.panel import Panel
from rich.text import Text

from statepipe.cli.commands.evaluate import evaluate, evaluate_changeit, predict
from statepipe.cli.commands.lexicon import lexicon
from statepipe.cli.commands.pipeline import align, curate, label, run, selftrain, train
from statepipe.cli.commands.synth import synth
from statepipe.cli.utils.output import RichGroup, console, setup_logging
from statepipe.cli.utils.settings import GlobalOptions
from statepipe.models import CacheMode


@click.group(invoke_without_command=True, cls=RichGroup)
@click.option("--version", is_flag=True, help="Show version information and exit.")
@click.option("--verbose", "-v", count=True, help="Increase verbosity (-v info, -vv debug).")
@click.option("--quiet", "-q", is_flag=True, help="Suppress all output except errors.")
@click.option(
    "--config",
    "config_file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    envvar="STATEPIPE_CONFIG",
    help="Pipeline configuration YAML.",
)
@click.option(
    "--cache",
    type=click.Path(file_okay=False, path_type=Path),
    help="Response cache root; llm/ and vlm/ live beneath it.",
)
@click.option(
    "--mode",
    type=click.Choice([m.value for m in CacheMode], case_sensitive=False),
    help="Cache mode for both model clients.",
)
@click.option("--seed", type=int, help="Training and synthetic-world seed.")
@click.option("--threads", type=click.IntRange(min=1), help="Worker threads across videos and requests.")
@click.option("--deterministic", is_flag=True, help="Force a single thread everywhere.")
@click.option("--llm-url", envvar="STATEPIPE_LLM_URL", help="Chat-completion endpoint.")
@click.option("--llm-key", envvar="STATEPIPE_LLM_KEY", help="Chat-completion bearer token.")
@click.option("--vlm-url", envvar="STATEPIPE_VLM_URL", help="Vision-language endpoint.")
@click.pass_context
def main(  # noqa: PLR0913
    ctx: click.Context,
    version: bool,  # noqa: FBT001
    verbose: int,
    quiet: bool,  # noqa: FBT001
    config_file: Path | None,
    cache: Path | None,
    mode: str | None,
    seed: int | None,
    threads: int | None,
    deterministic: bool,  # noqa: FBT001
    llm_url: str | None,
    llm_key: str | None,
    vlm_url: str | None,
) -> None:
    """
    Statepipe - weakly-supervised object-state recognition from narrated videos.

    Narrations become frame-wise state pseudo-labels through a language-model
    prompt chain and frame alignment; classifiers trained on them are refined
    by mean-teacher self-training and scored with F1-max, mAP and causal
    precision@1.
    """
    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose
    ctx.obj["quiet"] = quiet
    ctx.obj["config_file"] = config_file
    ctx.obj["options"] = GlobalOptions(
        cache=cache,
        mode=CacheMode(mode.lower()) if mode else None,
        seed=seed,
        threads=threads,
        deterministic=deterministic,
        llm_url=llm_url,
        llm_key=llm_key,
        vlm_url=vlm_url,
    )

    setup_logging(verbose, quiet)

    if version:
        show_version()
        ctx.exit()

    if ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())


def show_version() -> None:
    """Display version information."""
    from statepipe import __author__, __version__

    version_text = Text()
    version_text.append("Statepipe ", style="bold magenta")
    version_text.append(f"v{__version__}", style="bold green")
    version_text.append(f"\nBy {__author__}", style="dim")
    console.print(Panel(version_text, title="Version Information", border_style="magenta", padding=(1, 2)))


main.add_command(curate)
main.add_command(label)
main.add_command(align)
main.add_command(train)
main.add_command(selftrain)
main.add_command(run)
main.add_command(predict)
main.add_command(evaluate)
main.add_command(evaluate_changeit)
main.add_command(synth)
main.add_command(lexicon)


if __name__ == "__main__":
    main()
