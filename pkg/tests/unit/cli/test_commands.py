"""Tests for the command-line interface."""

import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from statepipe.cli.main import main
from statepipe.cli.utils.settings import GlobalOptions
from statepipe.containers.config import StatepipeConfig, TrainConfig
from statepipe.core.formats import read_matrix_file, write_label_file, write_matrix_file
from statepipe.models import ActionStateChain, CacheMode, GroundTruthTimeline, StateVocabulary, VerbLexicon
from statepipe.nn import ModelSpec, build_model, save_model
from statepipe.synthetic import CONFIG_NAME, SyntheticWorld
from statepipe.training.inference import STUDENT_TCN, TEACHER_MLP, TEACHER_TCN


@pytest.fixture
def cli() -> CliRunner:
    """Click test runner."""
    return CliRunner()


@pytest.fixture
def eval_inputs(tmp_path: Path, apple_vocab: StateVocabulary) -> Path:
    """Vocabulary, ground truth and perfect predictions for two videos."""
    apple_vocab.to_file(tmp_path / "vocab.json")
    rows = {"a": [[1, 0, 0], [1, 1, 0], [0, 1, 1]], "b": [[1, 0, 0], [0, 0, 1]]}
    for video_id, matrix in rows.items():
        truth = GroundTruthTimeline.from_binary(video_id, np.array(matrix))
        write_label_file(truth, apple_vocab, tmp_path / "gt" / f"{video_id}.labels.json")
        write_matrix_file(np.array(matrix, dtype=np.float32), tmp_path / "pred" / f"{video_id}.fsq")
    return tmp_path


class TestMainGroup:
    """Top-level options."""

    def test_version(self, cli: CliRunner) -> None:
        """--version prints the version panel."""
        result = cli.invoke(main, ["--version"])
        assert result.exit_code == 0
        assert "Statepipe" in result.output

    def test_help_without_command(self, cli: CliRunner) -> None:
        """No subcommand shows help."""
        result = cli.invoke(main, [])
        assert result.exit_code == 0

    def test_stage_command_needs_config(self, cli: CliRunner) -> None:
        """Pipeline commands without --config are usage errors."""
        result = cli.invoke(main, ["run"], env={"STATEPIPE_CONFIG": None})
        assert result.exit_code == 2


class TestGlobalOptions:
    """Overrides applied to a loaded configuration."""

    def test_overrides(self, tmp_path: Path, synthetic_config: StatepipeConfig) -> None:
        """Cache root, mode, seed and deterministic threading."""
        options = GlobalOptions(cache=tmp_path / "c", mode=CacheMode.RECORD, seed=9, threads=8, deterministic=True)
        applied = options.apply(synthetic_config)
        assert applied.llm.cache_dir == str(tmp_path / "c" / "llm")
        assert applied.vlm.cache_dir == str(tmp_path / "c" / "vlm")
        assert applied.llm.mode is CacheMode.RECORD
        assert applied.vlm.mode is CacheMode.RECORD
        assert applied.train.seed == 9
        assert (applied.pipeline.threads, applied.labeler.max_concurrency, applied.alignment.max_concurrency) == (
            1,
            1,
            1,
        )

    def test_no_overrides(self, synthetic_config: StatepipeConfig) -> None:
        """Empty options leave the configuration alone."""
        assert GlobalOptions().apply(synthetic_config) == synthetic_config

    def test_threads(self, synthetic_config: StatepipeConfig) -> None:
        """--threads sets every concurrency knob."""
        applied = GlobalOptions(threads=3).apply(synthetic_config)
        assert applied.pipeline.threads == 3
        assert applied.alignment.max_concurrency == 3


class TestEvalCommands:
    """eval and eval-changeit."""

    def test_eval_json(self, cli: CliRunner, eval_inputs: Path) -> None:
        """JSON output on stdout and the report file."""
        out = eval_inputs / "report.json"
        result = cli.invoke(
            main,
            [
                "eval",
                "--pred",
                str(eval_inputs / "pred"),
                "--gt",
                str(eval_inputs / "gt"),
                "--vocab",
                str(eval_inputs / "vocab.json"),
                "--format",
                "json",
                "--out",
                str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(out.read_text())
        assert payload["mean_f1_max"] == 1.0
        assert payload["mean_average_precision"] == 1.0
        assert json.loads(result.output[: result.output.rindex("}") + 1])["num_videos"] == 2

    def test_eval_vocabulary_from_label_files(self, cli: CliRunner, eval_inputs: Path) -> None:
        """Without --vocab the states come from the ground-truth files."""
        out = eval_inputs / "report.json"
        result = cli.invoke(
            main,
            ["eval", "--pred", str(eval_inputs / "pred"), "--gt", str(eval_inputs / "gt"), "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(out.read_text())
        assert payload["num_videos"] == 2
        assert payload["mean_f1_max"] == 1.0

    def test_eval_table(self, cli: CliRunner, eval_inputs: Path) -> None:
        """Table output names the object."""
        result = cli.invoke(
            main,
            ["eval", "--pred", str(eval_inputs / "pred"), "--gt", str(eval_inputs / "gt")],
        )
        assert result.exit_code == 0
        assert "apple" in result.output

    def test_eval_needs_pred_and_gt(self, cli: CliRunner, eval_inputs: Path) -> None:
        """Both directories are required options."""
        result = cli.invoke(main, ["eval", "--gt", str(eval_inputs / "gt")])
        assert result.exit_code == 2
        assert "--pred" in result.output

    def test_eval_failure_exits_one(self, cli: CliRunner, eval_inputs: Path) -> None:
        """A missing prediction is reported and exits 1."""
        (eval_inputs / "pred" / "b.fsq").unlink()
        result = cli.invoke(
            main,
            ["eval", "--pred", str(eval_inputs / "pred"), "--gt", str(eval_inputs / "gt")],
        )
        assert result.exit_code == 1

    def test_eval_changeit(self, cli: CliRunner, tmp_path: Path) -> None:
        """Phase predictions scored per category."""
        (tmp_path / "gt").mkdir()
        (tmp_path / "gt" / "v.phases.json").write_text(
            json.dumps({"video_id": "v", "category": "apple", "initial": [0], "action": [2], "end": [4]}),
        )
        matrix = np.zeros((5, 3), dtype=np.float32)
        matrix[0, 0], matrix[2, 1], matrix[4, 2] = 1.0, 1.0, 1.0
        write_matrix_file(matrix, tmp_path / "pred" / "v.fsq")
        out = tmp_path / "changeit.json"
        result = cli.invoke(
            main,
            [
                "eval-changeit",
                "--pred",
                str(tmp_path / "pred"),
                "--gt",
                str(tmp_path / "gt"),
                "--out",
                str(out),
                "--format",
                "json",
            ],
        )
        assert result.exit_code == 0, result.output
        assert json.loads(out.read_text())["mean_action_precision"] == 1.0


class TestStandaloneStages:
    """curate, label, train and selftrain run on explicit files when --out is given."""

    def test_curate(self, cli: CliRunner, tmp_path: Path, synthetic_world: SyntheticWorld) -> None:
        """Every synthetic video is kept with the verbs its narration uses."""
        world = tmp_path / "world"
        out = tmp_path / "kept.jsonl"
        result = cli.invoke(
            main,
            [
                "curate",
                "--vocab",
                str(world / "vocab.json"),
                "--transcripts",
                str(world / "transcripts"),
                "--lexicon",
                str(world / "lexicon.json"),
                "--max-words",
                "500",
                "--out",
                str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        rows = [json.loads(line) for line in out.read_text().splitlines()]
        assert [row["video_id"] for row in rows] == [v.video_id for v in synthetic_world.videos]
        assert all(row["verbs"] for row in rows)
        assert all(row["word_count"] <= 500 for row in rows)

    def test_curate_word_limit(self, cli: CliRunner, tmp_path: Path, synthetic_world: SyntheticWorld) -> None:  # noqa: ARG002
        """A one-word limit keeps nothing and still writes the file."""
        world = tmp_path / "world"
        out = tmp_path / "kept.jsonl"
        result = cli.invoke(
            main,
            [
                "curate",
                "--vocab",
                str(world / "vocab.json"),
                "--transcripts",
                str(world / "transcripts"),
                "--lexicon",
                str(world / "lexicon.json"),
                "--max-words",
                "1",
                "--out",
                str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        assert out.read_text() == ""

    def test_label_replay(self, cli: CliRunner, tmp_path: Path, synthetic_world: SyntheticWorld) -> None:
        """The chain of one transcript comes back from the scripted cache."""
        world = tmp_path / "world"
        video = synthetic_world.videos[0]
        out = tmp_path / "chain.json"
        result = cli.invoke(
            main,
            [
                "--config",
                str(world / CONFIG_NAME),
                "label",
                "--vocab",
                str(world / "vocab.json"),
                "--transcript",
                str(world / "transcripts" / f"{video.video_id}.jsonl"),
                "--mode",
                "replay",
                "--cache",
                str(world / "cache" / "llm"),
                "--out",
                str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        chain = ActionStateChain.from_file(out)
        assert chain.video_id == video.video_id
        assert len(chain.actions) == len(video.actions)

    def test_label_cache_miss_exits_one(self, cli: CliRunner, tmp_path: Path, synthetic_world: SyntheticWorld) -> None:
        """Replaying from an empty cache is an error, not a network call."""
        world = tmp_path / "world"
        video = synthetic_world.videos[0]
        result = cli.invoke(
            main,
            [
                "--config",
                str(world / CONFIG_NAME),
                "label",
                "--vocab",
                str(world / "vocab.json"),
                "--transcript",
                str(world / "transcripts" / f"{video.video_id}.jsonl"),
                "--mode",
                "replay",
                "--cache",
                str(tmp_path / "empty"),
                "--out",
                str(tmp_path / "chain.json"),
            ],
        )
        assert result.exit_code == 1
        assert not (tmp_path / "chain.json").exists()

    @pytest.mark.slow
    def test_train_then_selftrain(
        self,
        cli: CliRunner,
        tmp_path: Path,
        synthetic_world: SyntheticWorld,  # noqa: ARG002
        tiny_train_config: TrainConfig,
    ) -> None:
        """Teachers from train feed selftrain on the features alone; both write checkpoints with specs."""
        world = tmp_path / "world"
        train_cfg = tmp_path / "train.cfg"
        train_cfg.write_text(tiny_train_config.to_kv_text(), encoding="utf-8")
        data = ["--features", str(world / "features"), "--labels", str(world / "ground_truth")]

        teachers = str(tmp_path / "teachers")
        result = cli.invoke(main, ["-q", "train", *data, "--config", str(train_cfg), "--out", teachers])
        assert result.exit_code == 0, result.output
        for name in (TEACHER_MLP, TEACHER_TCN):
            assert (tmp_path / "teachers" / f"{name}.spw").is_file()
            assert (tmp_path / "teachers" / f"{name}.json").is_file()

        result = cli.invoke(
            main,
            [
                "-q",
                "selftrain",
                "--teachers",
                str(tmp_path / "teachers"),
                "--features",
                str(world / "features"),
                "--config",
                str(train_cfg),
                "--out",
                str(tmp_path / "student"),
            ],
        )
        assert result.exit_code == 0, result.output
        assert (tmp_path / "student" / f"{STUDENT_TCN}.spw").is_file()

    @pytest.mark.parametrize(
        ("args", "missing"),
        [
            (["curate"], "--vocab"),
            (["label", "--vocab", "{tmp}/vocab.json"], "--transcript"),
            (["train", "--labels", "{tmp}"], "--features"),
            (["selftrain", "--features", "{tmp}"], "--teachers"),
        ],
    )
    def test_out_without_inputs(self, cli: CliRunner, tmp_path: Path, args: list[str], missing: str) -> None:
        """The standalone form names the first missing input and exits 2."""
        (tmp_path / "vocab.json").write_text("{}", encoding="utf-8")
        argv = [a.format(tmp=tmp_path) for a in args]
        result = cli.invoke(main, [*argv, "--out", str(tmp_path / "out")])
        assert result.exit_code == 2
        assert missing in result.output

    def test_selftrain_without_labels_needs_all_targets(
        self,
        cli: CliRunner,
        tmp_path: Path,
        tiny_train_config: TrainConfig,
    ) -> None:
        """Masking to assigned cells needs label files."""
        train_cfg = tmp_path / "train.cfg"
        assigned = tiny_train_config.model_copy(update={"targets_on": "assigned"})
        train_cfg.write_text(assigned.to_kv_text(), encoding="utf-8")
        for name in ("teachers", "features"):
            (tmp_path / name).mkdir()
        result = cli.invoke(
            main,
            [
                "selftrain",
                "--teachers",
                str(tmp_path / "teachers"),
                "--features",
                str(tmp_path / "features"),
                "--config",
                str(train_cfg),
                "--out",
                str(tmp_path / "student"),
            ],
        )
        assert result.exit_code == 2
        assert "targets_on=all" in result.output

    def test_standalone_input_without_out(self, cli: CliRunner, tmp_path: Path, synthetic_world: SyntheticWorld) -> None:  # noqa: ARG002
        """Input options without --out are a usage error."""
        world = tmp_path / "world"
        result = cli.invoke(
            main,
            ["--config", str(world / CONFIG_NAME), "train", "--features", str(world / "features")],
        )
        assert result.exit_code == 2
        assert "--out" in result.output


class TestSynthAndPredict:
    """Synthetic worlds, lexicon replay and predictions."""

    def test_synth(self, cli: CliRunner, tmp_path: Path) -> None:
        """A world and its pipeline config are written."""
        out = tmp_path / "w"
        result = cli.invoke(
            main,
            ["--seed", "3", "synth", str(out), "--videos", "2", "--frames", "20", "--dim", "4", "--states", "2"],
        )
        assert result.exit_code == 0, result.output
        assert (out / CONFIG_NAME).is_file()
        assert sorted(p.name for p in (out / "features").iterdir()) == ["synth000.fsq", "synth001.fsq"]

    def test_lexicon_replay(self, cli: CliRunner, tmp_path: Path, synthetic_world: SyntheticWorld) -> None:
        """The lexicon comes back from the scripted cache without a network."""
        world = tmp_path / "world"
        out = tmp_path / "lexicon.json"
        result = cli.invoke(
            main,
            ["--config", str(world / CONFIG_NAME), "-q", "lexicon", str(world / "vocab.json"), str(out)],
        )
        assert result.exit_code == 0, result.output
        assert VerbLexicon.from_file(out).verbs == synthetic_world.lexicon.verbs

    def test_predict(self, cli: CliRunner, tmp_path: Path, synthetic_world: SyntheticWorld) -> None:
        """Probabilities for every feature file."""
        spec = synthetic_world.spec
        model_spec = ModelSpec(
            kind="tcn",
            input_dim=spec.feature_dim,
            num_states=spec.num_states,
            stages=2,
            layers=2,
            channels=4,
        )
        save_model(build_model(model_spec), tmp_path / "m" / "student_tcn")
        checkpoint = tmp_path / "m" / "student_tcn.spw"
        result = cli.invoke(main, ["predict", str(checkpoint), str(tmp_path / "world" / "features"), str(tmp_path / "p")])
        assert result.exit_code == 0, result.output
        probs = read_matrix_file(tmp_path / "p" / "synth000.fsq")
        assert probs.shape == (spec.num_frames, spec.num_states)
