"""Synthetic world command for the Statepipe CLI."""

from pathlib import Path

import click
from rich.table import Table

from statepipe.cli.utils.output import RichCommand, console, print_success
from statepipe.cli.utils.settings import cli_errors
from statepipe.synthetic import CONFIG_NAME, SyntheticSpec, generate_synthetic


@click.command(cls=RichCommand)
@click.argument("out_dir", type=click.Path(file_okay=False, path_type=Path))
@click.option("--videos", "num_videos", type=click.IntRange(min=1), default=4, help="Number of videos.")
@click.option("--frames", "num_frames", type=click.IntRange(min=1), default=64, help="Frames per video (T).")
@click.option("--dim", "feature_dim", type=click.IntRange(min=1), default=16, help="Feature dimension (D).")
@click.option("--states", "num_states", type=click.IntRange(min=1), default=4, help="State count (K).")
@click.option("--action-rate", type=click.FloatRange(0.0, 1.0, min_open=True), default=0.1, help="Actions per frame.")
@click.option("--mask-rate", type=click.FloatRange(0.0, 1.0), default=0.0, help="Fraction of label cells hidden.")
@click.option("--noise", "noise_scale", type=click.FloatRange(min=0.0), default=0.1, help="Feature noise scale.")
@click.pass_context
def synth(
    ctx: click.Context,
    out_dir: Path,
    num_videos: int,
    num_frames: int,
    feature_dim: int,
    num_states: int,
    action_rate: float,
    mask_rate: float,
    noise_scale: float,
) -> None:
    """
    Write a synthetic world: features, ground truth, scripted LLM cache, stub scorer and config.

    The seed comes from the global --seed option (default 0).

    Examples:
        statepipe --seed 3 synth worlds/w3 --mask-rate 0.4
        statepipe --config worlds/w3/statepipe.yaml run

    """
    with cli_errors(ctx):
        options = ctx.obj.get("options")
        spec = SyntheticSpec(
            seed=options.seed if options is not None and options.seed is not None else 0,
            num_videos=num_videos,
            num_frames=num_frames,
            feature_dim=feature_dim,
            num_states=num_states,
            action_rate=action_rate,
            mask_rate=mask_rate,
            noise_scale=noise_scale,
        )
        world = generate_synthetic(spec, out_dir)
        if ctx.obj.get("quiet", False):
            return
        table = Table(title=f"Synthetic world (seed {spec.seed})")
        table.add_column("Video", style="cyan")
        table.add_column("Actions", justify="right")
        table.add_column("Hidden cells", justify="right")
        for video in world.videos:
            table.add_row(video.video_id, str(len(video.actions)), str(int(video.hidden.sum())))
        console.print(table)
        print_success(f"Pipeline config written to {out_dir / CONFIG_NAME}")
