"""Prediction and evaluation commands for the Statepipe CLI."""

from pathlib import Path

import click
from pydantic import BaseModel

from statepipe.cli.utils.output import RichCommand, console, print_success
from statepipe.cli.utils.settings import cli_errors
from statepipe.core.formats import label_vocabulary
from statepipe.metrics import evaluate_changeit_directories, evaluate_directories
from statepipe.models import Precision, StateVocabulary
from statepipe.nn import load_model
from statepipe.reports import ReportGenerator
from statepipe.training import predict_directory

_existing_dir = click.Path(exists=True, file_okay=False, path_type=Path)


def _emit(report: BaseModel, output: Path | None, output_format: str, *, quiet: bool) -> None:
    generator = ReportGenerator()
    if output is not None:
        generator.write_json_report(report, output)
    if output_format == "json":
        click.echo(generator.generate_json_report(report), nl=False)
    elif not quiet:
        generator.print_report(report, console)
    if output is not None and not quiet:
        print_success(f"Report saved to: {output}")


_report_options = [
    click.option(
        "--pred",
        "predictions",
        required=True,
        type=_existing_dir,
        help="Directory of <video_id>.fsq prediction matrices.",
    ),
    click.option(
        "--gt",
        "ground_truth",
        required=True,
        type=_existing_dir,
        help="Directory of ground-truth annotations.",
    ),
    click.option(
        "--out",
        "-o",
        "output",
        type=click.Path(dir_okay=False, path_type=Path),
        help="Write the canonical JSON report to this file.",
    ),
    click.option(
        "--format",
        "output_format",
        type=click.Choice(["table", "json"], case_sensitive=False),
        default="table",
        help="Console output format.",
    ),
]


def _with_report_options(command: click.Command) -> click.Command:
    for option in reversed(_report_options):
        command = option(command)
    return command


@click.command(name="eval", cls=RichCommand)
@_with_report_options
@click.option(
    "--vocab",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="State vocabulary JSON; read from the ground-truth label files when absent.",
)
@click.option("--video", "videos", multiple=True, help="Evaluate only these video ids.")
@click.option("--per-video", is_flag=True, help="Add per-video F1-max to the report.")
@click.pass_context
def evaluate(  # noqa: PLR0913
    ctx: click.Context,
    predictions: Path,
    ground_truth: Path,
    output: Path | None,
    output_format: str,
    vocab: Path | None,
    videos: tuple[str, ...],
    per_video: bool,  # noqa: FBT001
) -> None:
    """
    Score T×K prediction files with per-state F1-max and average precision.

    Examples:
        statepipe eval --pred work/predictions --gt gt --out report.json
        statepipe eval --pred preds --gt gt --vocab vocab.json --format json

    """
    with cli_errors(ctx):
        vocabulary = StateVocabulary.from_file(vocab) if vocab is not None else label_vocabulary(ground_truth)
        report = evaluate_directories(
            predictions,
            ground_truth,
            vocabulary,
            list(videos) or None,
            per_video=per_video,
        )
        _emit(report, output, output_format, quiet=ctx.obj.get("quiet", False))


@click.command(name="eval-changeit", cls=RichCommand)
@_with_report_options
@click.pass_context
def evaluate_changeit(
    ctx: click.Context,
    predictions: Path,
    ground_truth: Path,
    output: Path | None,
    output_format: str,
) -> None:
    """
    Causally ordered precision@1 of T×3 phase predictions against phase annotations.

    Examples:
        statepipe eval-changeit --pred phase_preds --gt changeit_gt --out report.json

    """
    with cli_errors(ctx):
        report = evaluate_changeit_directories(predictions, ground_truth)
        _emit(report, output, output_format, quiet=ctx.obj.get("quiet", False))


@click.command(cls=RichCommand)
@click.argument("model", type=click.Path(path_type=Path))
@click.argument("features", type=_existing_dir)
@click.argument("out_dir", type=click.Path(file_okay=False, path_type=Path))
@click.option(
    "--precision",
    type=click.Choice([p.value for p in Precision]),
    default=Precision.SINGLE.value,
    help="Arithmetic precision.",
)
@click.pass_context
def predict(ctx: click.Context, model: Path, features: Path, out_dir: Path, precision: str) -> None:
    """
    Write final-stage probabilities of a saved model for every feature file.

    MODEL is the checkpoint path (its .json spec sidecar sits next to it).

    Examples:
        statepipe predict work/student/student_tcn.spw features preds

    """
    with cli_errors(ctx):
        loaded = load_model(model, Precision(precision).dtype)
        written = predict_directory(loaded, features, out_dir)
        if not ctx.obj.get("quiet", False):
            print_success(f"Wrote {len(written)} prediction files to {out_dir}")
