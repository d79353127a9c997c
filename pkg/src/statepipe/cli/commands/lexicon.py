"""Verb lexicon command for the Statepipe CLI."""

from pathlib import Path

import click
from rich.table import Table

from statepipe.api_clients import LabelerClient
from statepipe.cli.utils.output import RichCommand, console, print_success
from statepipe.cli.utils.settings import cli_errors, llm_settings
from statepipe.ingest import build_verb_lexicon
from statepipe.models import StateVocabulary


@click.command(cls=RichCommand)
@click.argument("vocab", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("output", type=click.Path(dir_okay=False, path_type=Path))
@click.pass_context
def lexicon(ctx: click.Context, vocab: Path, output: Path) -> None:
    """
    Ask the language model for verbs tied to each state and write the lexicon JSON.

    Client settings come from --config when given, else from the defaults and
    the global --cache/--mode/--llm-url options.

    Examples:
        statepipe --mode record --cache cache lexicon vocab.json lexicon.json

    """
    with cli_errors(ctx):
        llm = llm_settings(ctx)
        vocabulary = StateVocabulary.from_file(vocab)
        with LabelerClient(llm) as client:
            built = build_verb_lexicon(vocabulary, client)
        built.to_file(output)
        if ctx.obj.get("quiet", False):
            return
        table = Table(title=f"Verb lexicon: {built.object_name}")
        table.add_column("State", style="cyan")
        table.add_column("Verbs")
        for state in vocabulary.state_names:
            table.add_row(state, ", ".join(built.verbs.get(state, ())))
        console.print(table)
        print_success(f"Lexicon written to {output}")
