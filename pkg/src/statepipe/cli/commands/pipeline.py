"""
Pipeline commands for the Statepipe CLI.

``run`` executes every stage that is not up to date. ``curate``, ``label``,
``train`` and ``selftrain`` have two forms: without ``--out`` they run the
configured pipeline up to and including their stage; with ``--out`` they run
that stage alone on the files named on the command line.
"""

import logging
from collections.abc import Callable
from pathlib import Path
from typing import TypeVar

import click
from rich.table import Table

from statepipe.api_clients import LabelerClient
from statepipe.cli.utils.output import ProgressReporter, RichCommand, console, log_level, print_success
from statepipe.cli.utils.settings import (
    build_container,
    cli_errors,
    global_options,
    llm_settings,
    load_settings,
    optional_settings,
    train_settings,
)
from statepipe.containers.config import CurationConfig, LabelerConfig, StatepipeConfig
from statepipe.core.formats import LABEL_SUFFIX, list_video_ids
from statepipe.core.manifest import PipelineManifest
from statepipe.ingest import build_verb_lexicon, write_kept_videos
from statepipe.ingest import curate as curate_videos
from statepipe.labeler import ChainLabeler
from statepipe.models import CacheMode, StageName, StateVocabulary, VerbLexicon
from statepipe.nn import save_model
from statepipe.parsers import discover_transcripts, load_transcript, load_video_record
from statepipe.training import (
    STUDENT_TCN,
    Example,
    Trainer,
    load_dataset,
    load_teachers,
    save_teachers,
    unlabeled_dataset,
)
from statepipe.utils.logging import setup_file_logging

_input_file = click.Path(exists=True, dir_okay=False, path_type=Path)
_input_dir = click.Path(exists=True, file_okay=False, path_type=Path)

_train_config_option = click.option(
    "--train-config",
    type=_input_file,
    help="key=value training configuration replacing the YAML train section.",
)
_stage_train_config_option = click.option(
    "--config",
    "--train-config",
    "train_config",
    type=_input_file,
    help="key=value training configuration (replaces the YAML train section when staged).",
)
_force_option = click.option("--force", is_flag=True, help="Ignore recorded hashes and rerun (staged form).")

Adjust = Callable[[StatepipeConfig], StatepipeConfig]
T = TypeVar("T")


def manifest_table(manifest: PipelineManifest) -> Table:
    """Stage status and counters of a manifest."""
    table = Table(title=f"Pipeline: {manifest.object_name}")
    table.add_column("Stage", style="cyan")
    table.add_column("Status")
    table.add_column("Counters", style="dim")
    for stage in StageName:
        record = manifest.stages.get(stage)
        if record is None:
            continue
        if stage in manifest.executed:
            status = "[green]ran[/green]"
        elif stage in manifest.skipped:
            status = "up to date"
        else:
            status = "[dim]not checked[/dim]"
        counters = ", ".join(
            f"{name}={value:.3f}" if isinstance(value, float) and not value.is_integer() else f"{name}={value:g}"
            for name, value in sorted(record.counters.items())
        )
        table.add_row(stage.value, status, counters)
    return table


def _run_stages(  # noqa: PLR0913
    ctx: click.Context,
    *,
    until: StageName | None,
    force: bool,
    train_config: Path | None,
    log_file: Path | None = None,
    adjust: Adjust | None = None,
) -> None:
    with cli_errors(ctx):
        settings = load_settings(ctx, train_config)
        if adjust is not None:
            settings = adjust(settings)
        if log_file is not None:
            level = min(log_level(ctx.obj.get("verbose", 0), ctx.obj.get("quiet", False)), logging.INFO)
            setup_file_logging(log_file, level=logging.getLevelName(level))
        container = build_container(settings)
        runner = container.pipeline_container.runner()
        quiet = ctx.obj.get("quiet", False)
        try:
            with ProgressReporter("Running pipeline...", enabled=not quiet):
                manifest = runner.run(force=force, until=until)
        finally:
            container.api_client_container.labeler_client().close()
        if not quiet:
            console.print(manifest_table(manifest))
            print_success(f"Manifest written to {container.core_container.manifest_store().path}")


def _staged_only(command: str, **standalone: object) -> None:
    """Reject standalone inputs given without ``--out``."""
    for option, value in standalone.items():
        if value is not None:
            msg = f"{command}: --{option} is only used together with --out"
            raise click.UsageError(msg)


def _needed(command: str, option: str, value: T | None) -> T:
    """A standalone input that ``--out`` requires."""
    if value is None:
        msg = f"{command} --out also needs --{option}"
        raise click.UsageError(msg)
    return value


def _quiet(ctx: click.Context) -> bool:
    return bool(ctx.obj.get("quiet", False)) if ctx.obj else False


def _training_set(features: Path, labels: Path, vocab: Path | None) -> list[Example]:
    vocabulary = StateVocabulary.from_file(vocab) if vocab is not None else None
    return load_dataset(features, labels, vocabulary, list_video_ids(labels, LABEL_SUFFIX))


@click.command(cls=RichCommand)
@_force_option
@_train_config_option
@click.option(
    "--log-file",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Also write plain-text logs to this file.",
)
@click.pass_context
def run(ctx: click.Context, force: bool, train_config: Path | None, log_file: Path | None) -> None:  # noqa: FBT001
    """
    Run curate, label, align, train, selftrain and eval, skipping up-to-date stages.

    Examples:
        # Offline run over a synthetic world
        statepipe --config synth/statepipe.yaml --mode replay run

        # Rerun everything with a file log
        statepipe --config statepipe.yaml run --force --log-file run.log

    """
    _run_stages(ctx, until=None, force=force, train_config=train_config, log_file=log_file)


@click.command(cls=RichCommand)
@_force_option
@_train_config_option
@click.option("--vocab", type=_input_file, help="State vocabulary JSON.")
@click.option("--transcripts", type=_input_dir, help="Directory of <video_id>.jsonl transcripts.")
@click.option("--lexicon", "lexicon_file", type=_input_file, help="Verb lexicon JSON; built by the language model when absent.")
@click.option("--max-words", type=click.IntRange(min=1), help="Longest narration kept, in words.")
@click.option("--strict-title-and-narration", is_flag=True, help="Require the object name in title and narration.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Write the kept videos as JSON lines.")
@click.pass_context
def curate(  # noqa: PLR0913
    ctx: click.Context,
    force: bool,  # noqa: FBT001
    train_config: Path | None,
    vocab: Path | None,
    transcripts: Path | None,
    lexicon_file: Path | None,
    max_words: int | None,
    strict_title_and_narration: bool,  # noqa: FBT001
    out: Path | None,
) -> None:
    """
    Filter training videos by object name, lexicon verbs and narration length.

    --max-words and --strict-title-and-narration also override the curation
    section of --config in the staged form.

    Examples:
        # Staged: run the pipeline up to curation
        statepipe --config statepipe.yaml curate --max-words 8000

        # Standalone
        statepipe curate --vocab vocab.json --transcripts transcripts --lexicon lexicon.json --out kept.jsonl

    """
    if out is None:
        _staged_only("curate", vocab=vocab, transcripts=transcripts, lexicon=lexicon_file)

        def adjust(settings: StatepipeConfig) -> StatepipeConfig:
            update: dict[str, object] = {}
            if max_words is not None:
                update["max_words"] = max_words
            if strict_title_and_narration:
                update["strict_title_and_narration"] = True
            return settings.model_copy(update={"curation": settings.curation.model_copy(update=update)})

        _run_stages(ctx, until=StageName.CURATE, force=force, train_config=train_config, adjust=adjust)
        return

    vocab = _needed("curate", "vocab", vocab)
    transcripts = _needed("curate", "transcripts", transcripts)
    with cli_errors(ctx):
        vocabulary = StateVocabulary.from_file(vocab)
        if lexicon_file is not None:
            verbs = VerbLexicon.from_file(lexicon_file)
        else:
            with LabelerClient(llm_settings(ctx)) as client:
                verbs = build_verb_lexicon(vocabulary, client)
        videos = [load_video_record(path) for path in discover_transcripts(transcripts)]
        kept = curate_videos(
            videos,
            vocabulary,
            verbs,
            max_words or CurationConfig().max_words,
            strict_title_and_narration=strict_title_and_narration,
        )
        write_kept_videos(kept, verbs, out)
        if not _quiet(ctx):
            print_success(f"Kept {len(kept)} of {len(videos)} videos; written to {out}")


@click.command(cls=RichCommand)
@_force_option
@_train_config_option
@click.option("--vocab", type=_input_file, help="State vocabulary JSON.")
@click.option("--transcript", type=_input_file, help="One <video_id>.jsonl transcript.")
@click.option(
    "--mode",
    type=click.Choice([m.value for m in CacheMode], case_sensitive=False),
    help="Response cache mode of the chat client.",
)
@click.option("--cache", "cache_dir", type=click.Path(file_okay=False, path_type=Path), help="Response cache directory.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Write the action-state chain JSON.")
@click.pass_context
def label(  # noqa: PLR0913
    ctx: click.Context,
    force: bool,  # noqa: FBT001
    train_config: Path | None,
    vocab: Path | None,
    transcript: Path | None,
    mode: str | None,
    cache_dir: Path | None,
    out: Path | None,
) -> None:
    """
    Run the prompt chain on curated transcripts (actions, descriptions, verdicts).

    In the standalone form --cache is the response cache directory itself;
    client and prompt-chain settings otherwise come from --config when given.

    Examples:
        # Staged
        statepipe --config statepipe.yaml label

        # Standalone, offline
        statepipe label --vocab vocab.json --transcript v.jsonl --mode replay --cache cache/llm --out chain.json

    """
    if out is None:
        _staged_only("label", vocab=vocab, transcript=transcript, mode=mode, cache=cache_dir)
        _run_stages(ctx, until=StageName.LABEL, force=force, train_config=train_config)
        return

    vocab = _needed("label", "vocab", vocab)
    transcript = _needed("label", "transcript", transcript)
    with cli_errors(ctx):
        update: dict[str, object] = {}
        if mode is not None:
            update["mode"] = CacheMode(mode.lower())
        if cache_dir is not None:
            update["cache_dir"] = str(cache_dir)
        llm = llm_settings(ctx).model_copy(update=update)
        settings = optional_settings(ctx)
        labeler = settings.labeler if settings is not None else LabelerConfig()
        threads = global_options(ctx).worker_threads
        if settings is None and threads is not None:
            labeler = labeler.model_copy(update={"max_concurrency": threads})

        vocabulary = StateVocabulary.from_file(vocab)
        narration = load_transcript(transcript)
        with LabelerClient(llm) as client:
            chain = ChainLabeler(client, labeler).run_chain(narration, vocabulary)
        chain.to_file(out)
        if not _quiet(ctx):
            print_success(
                f"{len(chain.actions)} actions, {chain.malformed_count} malformed verdict rows; chain written to {out}",
            )


@click.command(cls=RichCommand)
@_force_option
@_train_config_option
@click.pass_context
def align(ctx: click.Context, force: bool, train_config: Path | None) -> None:  # noqa: FBT001
    """
    Align chain verdicts to frames and write pseudo-label files.

    Examples:
        statepipe --config statepipe.yaml align

    """
    _run_stages(ctx, until=StageName.ALIGN, force=force, train_config=train_config)


@click.command(cls=RichCommand)
@_force_option
@_stage_train_config_option
@click.option("--features", type=_input_dir, help="Directory of <video_id>.fsq feature files.")
@click.option("--labels", type=_input_dir, help="Directory of <video_id>.labels.json label files.")
@click.option("--vocab", type=_input_file, help="Check the label files' state order against this vocabulary.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), help="Directory for the two teachers.")
@click.pass_context
def train(  # noqa: PLR0913
    ctx: click.Context,
    force: bool,  # noqa: FBT001
    train_config: Path | None,
    features: Path | None,
    labels: Path | None,
    vocab: Path | None,
    out: Path | None,
) -> None:
    """
    Train the teacher MLP and teacher TCN on the pseudo-labels.

    Examples:
        # Staged
        statepipe --config statepipe.yaml train --config train.cfg

        # Standalone
        statepipe train --features features --labels labels --config train.cfg --out teachers

    """
    if out is None:
        _staged_only("train", features=features, labels=labels, vocab=vocab)
        _run_stages(ctx, until=StageName.TRAIN, force=force, train_config=train_config)
        return

    features = _needed("train", "features", features)
    labels = _needed("train", "labels", labels)
    with cli_errors(ctx):
        config = train_settings(ctx, train_config)
        dataset = _training_set(features, labels, vocab)
        with ProgressReporter("Training teachers...", enabled=not _quiet(ctx)):
            teachers = Trainer(config).train_teachers(dataset)
        save_teachers(teachers, out)
        if not _quiet(ctx):
            print_success(f"Teachers trained on {len(dataset)} videos; written to {out}")


@click.command(cls=RichCommand)
@_force_option
@_stage_train_config_option
@click.option("--teachers", "teachers_dir", type=_input_dir, help="Directory written by the train command.")
@click.option("--features", type=_input_dir, help="Directory of <video_id>.fsq feature files.")
@click.option("--labels", type=_input_dir, help="Label files naming the videos; optional when targets_on=all.")
@click.option("--vocab", type=_input_file, help="Check the label files' state order against this vocabulary.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), help="Directory for the student TCN.")
@click.pass_context
def selftrain(  # noqa: PLR0913
    ctx: click.Context,
    force: bool,  # noqa: FBT001
    train_config: Path | None,
    teachers_dir: Path | None,
    features: Path | None,
    labels: Path | None,
    vocab: Path | None,
    out: Path | None,
) -> None:
    """
    Self-train the student TCN against the EMA teacher ensemble.

    Without --labels every feature file is used and every frame is a target.
    With --labels the label files name the videos and, with
    targets_on=assigned, supply the target mask.

    Examples:
        # Staged
        statepipe --config statepipe.yaml selftrain

        # Standalone
        statepipe selftrain --teachers teachers --features features --config train.cfg --out student

    """
    if out is None:
        _staged_only("selftrain", teachers=teachers_dir, features=features, labels=labels, vocab=vocab)
        _run_stages(ctx, until=StageName.SELFTRAIN, force=force, train_config=train_config)
        return

    teachers_dir = _needed("selftrain", "teachers", teachers_dir)
    features = _needed("selftrain", "features", features)
    with cli_errors(ctx):
        config = train_settings(ctx, train_config)
        if labels is None and config.targets_on == "assigned":
            msg = "selftrain --out without --labels needs targets_on=all"
            raise click.UsageError(msg)
        teachers = load_teachers(teachers_dir, config.precision.dtype)
        if labels is None:
            dataset = unlabeled_dataset(features, teachers.tcn.spec.num_states)
        else:
            dataset = _training_set(features, labels, vocab)
        with ProgressReporter("Self-training student...", enabled=not _quiet(ctx)):
            student = Trainer(config).self_train(teachers, dataset)
        save_model(student, out / STUDENT_TCN)
        if not _quiet(ctx):
            print_success(f"Student trained on {len(dataset)} videos; written to {out}")
