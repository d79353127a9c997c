"""
Pipeline orchestration for one object category.

Stages run in order curate -> label -> align -> train -> selftrain -> eval.
Each stage's input hash covers its settings, the external files it reads and
the previous stage's record; a stage whose input hash matches the manifest and
whose outputs are byte-unchanged on disk is skipped. Once a stage executes,
every later stage executes too.
"""

import json
import logging
import shutil
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, TypeVar

import httpx
import numpy as np

from statepipe.aligner import Aligner, AlignmentStats
from statepipe.api_clients import LabelerClient, ScorerSet, build_scorers
from statepipe.containers.config import StatepipeConfig
from statepipe.core.exceptions import ConfigurationError, PipelineError, StatepipeError
from statepipe.core.formats import (
    LABEL_SUFFIX,
    feature_path,
    label_path,
    list_video_ids,
    read_feature_file,
    read_label_file,
    write_label_file,
)
from statepipe.core.manifest import ManifestStore, PipelineManifest, StageRecord, manifest_path
from statepipe.ingest import build_verb_lexicon, decide
from statepipe.labeler import ChainLabeler
from statepipe.labeler.chain import CompletionClient
from statepipe.metrics import evaluate_directories, evaluate_pseudo_labels
from statepipe.models import (
    ActionStateChain,
    GroundTruthTimeline,
    PseudoLabelTimeline,
    StageName,
    StateVocabulary,
    VerbLexicon,
)
from statepipe.models.timeline import UNASSIGNED
from statepipe.nn import load_model, save_model
from statepipe.parsers import discover_transcripts, load_transcript, load_video_record
from statepipe.parsers.transcript import TRANSCRIPT_SUFFIX
from statepipe.reports import ReportGenerator
from statepipe.training import Example, Trainer, load_dataset, load_teachers, predict_directory, save_teachers
from statepipe.training.inference import STUDENT_TCN
from statepipe.utils.hash_generator import HashGenerator

logger = logging.getLogger(__name__)

R = TypeVar("R")

# Work-directory layout
CURATED = "curated.json"
BUILT_LEXICON = "lexicon.json"
CHAINS = "chains"
LABELS = "labels"
TEACHERS = "teachers"
STUDENT = "student"
PREDICTIONS = "predictions"
REPORT = "report.json"
PSEUDO_LABEL_REPORT = "pseudo_labels.json"
CHAIN_SUFFIX = ".chain.json"

STAGE_OUTPUTS: dict[StageName, list[str]] = {
    StageName.CURATE: [CURATED, BUILT_LEXICON],
    StageName.LABEL: [CHAINS],
    StageName.ALIGN: [LABELS],
    StageName.TRAIN: [TEACHERS],
    StageName.SELFTRAIN: [STUDENT],
    StageName.EVAL: [PREDICTIONS, REPORT, PSEUDO_LABEL_REPORT],
}


def _write_json(path: Path, payload: Any) -> None:  # noqa: ANN401
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


class PipelineRunner:
    """Runs the stages of one pipeline configuration against a work directory."""

    def __init__(
        self,
        config: StatepipeConfig,
        client: CompletionClient,
        scorer_factory: Callable[[], ScorerSet],
        manifest_store: ManifestStore,
        hash_generator: HashGenerator | None = None,
        report_generator: ReportGenerator | None = None,
    ) -> None:
        """
        Initialize the runner.

        Args:
            config: Validated, path-resolved configuration
            client: Chat-completion client for the lexicon and the prompt chain
            scorer_factory: Builds the frame scorers when alignment runs
            manifest_store: Manifest of the work directory
            hash_generator: Hasher for stage inputs
            report_generator: Renders the evaluation reports

        """
        self.config = config
        self.paths = config.pipeline
        self.work_dir = Path(config.pipeline.work_dir)
        self.client = client
        self.scorer_factory = scorer_factory
        self.store = manifest_store
        self.hasher = hash_generator or HashGenerator()
        self.reports = report_generator or ReportGenerator()
        self._scorers: ScorerSet | None = None
        self._external: dict[str, Any] = {}

    # ------------------------------------------------------------ checks

    def check_inputs(self) -> StateVocabulary:
        """
        Validate referenced inputs before any stage runs.

        Raises:
            ConfigurationError: A referenced file or directory is missing

        """
        paths = self.paths
        required = {"vocabulary": paths.vocab, "transcripts": paths.transcripts, "features": paths.features}
        if paths.lexicon:
            required["lexicon"] = paths.lexicon
        if paths.ground_truth:
            required["ground truth"] = paths.ground_truth
        for what, location in required.items():
            if not Path(location).exists():
                msg = f"{what} not found: {location}"
                raise ConfigurationError(msg)
        return StateVocabulary.from_file(Path(paths.vocab))

    # ----------------------------------------------------------- hashing

    def _file_hash(self, location: str | None) -> str | None:
        if not location or not Path(location).is_file():
            return None
        return self.hasher.hash_file(Path(location))

    def _tree_hash(self, location: str | None) -> str | None:
        if not location or not Path(location).is_dir():
            return None
        cached = self._external.get(location)
        if cached is None:
            cached = self.hasher.hash_json(self.hasher.hash_tree(Path(location)))
            self._external[location] = cached
        return cached

    def _stage_inputs(self, stage: StageName) -> dict[str, Any]:
        cfg = self.config
        llm = {"model": cfg.llm.model, "temperature": cfg.llm.temperature}
        if stage is StageName.CURATE:
            return {
                "curation": cfg.curation.model_dump(mode="json"),
                "vocab": self._file_hash(self.paths.vocab),
                "lexicon": self._file_hash(self.paths.lexicon) if self.paths.lexicon else llm,
                "transcripts": self._tree_hash(self.paths.transcripts),
            }
        if stage is StageName.LABEL:
            return {
                "labeler": cfg.labeler.model_dump(mode="json", exclude={"max_concurrency"}),
                "llm": llm,
                "vocab": self._file_hash(self.paths.vocab),
            }
        if stage is StageName.ALIGN:
            vlm = cfg.vlm
            return {
                "alignment": cfg.alignment.model_dump(mode="json", exclude={"max_concurrency"}),
                "scorer": {"kind": vlm.kind.value, "model": vlm.model},
                "stub_fixture": self._file_hash(vlm.stub_fixture),
                "text_embeddings": self._file_hash(vlm.text_embeddings),
                "frame_embeddings": self._tree_hash(vlm.frame_embeddings_dir),
                "features": self._tree_hash(self.paths.features),
            }
        if stage in {StageName.TRAIN, StageName.SELFTRAIN}:
            return {"train": cfg.train.model_dump(mode="json"), "features": self._tree_hash(self.paths.features)}
        return {
            "ground_truth": self._tree_hash(self.paths.ground_truth),
            "eval_videos": sorted(self.paths.eval_videos),
        }

    def input_hash(self, stage: StageName, upstream: StageRecord | None) -> str:
        """Hash of a stage's settings, external inputs and predecessor record."""
        previous = None if upstream is None else {"input": upstream.input_hash, "outputs": upstream.outputs}
        return self.hasher.hash_json({"stage": stage.value, "inputs": self._stage_inputs(stage), "upstream": previous})

    # ----------------------------------------------------------- running

    def run(self, *, force: bool = False, until: StageName | None = None) -> PipelineManifest:
        """
        Run every stage that is not up to date.

        Args:
            force: Ignore recorded hashes and run every stage
            until: Last stage to consider; later stages keep their records

        Returns:
            The manifest written to the work directory

        Raises:
            ConfigurationError: Missing inputs, raised before any stage runs
            PipelineError: The first failing stage, with its video id when known

        """
        vocab = self.check_inputs()
        previous = None if force else self.store.load()
        manifest = PipelineManifest(
            object_name=vocab.object_primary_name,
            stages={} if previous is None else dict(previous.stages),
            videos={} if previous is None else previous.videos,
        )
        upstream: StageRecord | None = None
        dirty = force
        for stage in StageName:
            if stage is StageName.EVAL and not self.paths.ground_truth:
                logger.info("No ground truth configured; skipping evaluation")
                break
            outputs = STAGE_OUTPUTS[stage]
            input_hash = self.input_hash(stage, upstream)
            if not dirty and previous is not None and self.store.is_current(previous, stage, input_hash, outputs):
                logger.info("%s is up to date", stage.value)
                record = previous.stages[stage]
                manifest.skipped.append(stage)
            else:
                dirty = True
                logger.info("Running %s", stage.value)
                self._clear(outputs)
                manifest.stages.pop(stage, None)
                for statuses in manifest.videos.values():
                    statuses.pop(stage, None)
                try:
                    counters = self._execute(stage, vocab, manifest)
                except PipelineError:
                    self.store.save(manifest)
                    raise
                except StatepipeError as e:
                    self.store.save(manifest)
                    raise PipelineError(e.message, stage.value) from e
                record = StageRecord(
                    stage=stage,
                    input_hash=input_hash,
                    outputs=self.store.hash_outputs(outputs),
                    counters=counters,
                )
                manifest.executed.append(stage)
            manifest.stages[stage] = record
            self.store.save(manifest)
            upstream = record
            if stage is until:
                break
        logger.info(
            "Pipeline finished: %d stages run, %d up to date",
            len(manifest.executed),
            len(manifest.skipped),
        )
        return manifest

    def _clear(self, outputs: Sequence[str]) -> None:
        for relative in outputs:
            target = self.work_dir / relative
            if target.is_dir():
                shutil.rmtree(target)
            elif target.exists():
                target.unlink()

    def _execute(self, stage: StageName, vocab: StateVocabulary, manifest: PipelineManifest) -> dict[str, float]:
        handlers = {
            StageName.CURATE: self._curate,
            StageName.LABEL: self._label,
            StageName.ALIGN: self._align,
            StageName.TRAIN: self._train,
            StageName.SELFTRAIN: self._selftrain,
            StageName.EVAL: self._evaluate,
        }
        return handlers[stage](vocab, manifest)

    def _per_video(self, stage: StageName, video_ids: Sequence[str], work: Callable[[str], R]) -> list[R]:
        """Run ``work`` per video across threads; results keep ``video_ids`` order."""

        def guarded(video_id: str) -> R:
            try:
                return work(video_id)
            except PipelineError:
                raise
            except StatepipeError as e:
                raise PipelineError(e.message, stage.value, video_id) from e

        threads = self.paths.threads
        if threads == 1 or len(video_ids) <= 1:
            return [guarded(video_id) for video_id in video_ids]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(guarded, video_ids))

    def _kept_videos(self) -> list[str]:
        payload = json.loads((self.work_dir / CURATED).read_text(encoding="utf-8"))
        return [str(video_id) for video_id in payload["kept"]]

    # ------------------------------------------------------------ stages

    def _lexicon(self, vocab: StateVocabulary) -> VerbLexicon:
        if self.paths.lexicon:
            return VerbLexicon.from_file(Path(self.paths.lexicon))
        lexicon = build_verb_lexicon(vocab, self.client)
        lexicon.to_file(self.work_dir / BUILT_LEXICON)
        return lexicon

    def _curate(self, vocab: StateVocabulary, manifest: PipelineManifest) -> dict[str, float]:
        lexicon = self._lexicon(vocab)
        decisions = []
        for path in discover_transcripts(Path(self.paths.transcripts)):
            video_id = path.name.removesuffix(TRANSCRIPT_SUFFIX)
            try:
                video = load_video_record(path)
            except StatepipeError as e:
                raise PipelineError(e.message, StageName.CURATE.value, video_id) from e
            decision = decide(
                video,
                vocab,
                lexicon,
                self.config.curation.max_words,
                strict_title_and_narration=self.config.curation.strict_title_and_narration,
            )
            manifest.set_video_status(video.video_id, StageName.CURATE, "kept" if decision.kept else decision.reason)
            decisions.append(
                {
                    "video_id": decision.video_id,
                    "kept": decision.kept,
                    "reason": decision.reason,
                    "verbs": list(decision.verbs),
                    "word_count": decision.word_count,
                },
            )
        kept = [d["video_id"] for d in decisions if d["kept"]]
        _write_json(self.work_dir / CURATED, {"kept": kept, "decisions": decisions})
        logger.info("Curated %d of %d videos", len(kept), len(decisions))
        return {"videos": len(decisions), "kept": len(kept), "lexicon_skipped_rows": lexicon.skipped_rows}

    def _label(self, vocab: StateVocabulary, manifest: PipelineManifest) -> dict[str, float]:
        transcripts = Path(self.paths.transcripts)

        def label(video_id: str) -> ActionStateChain:
            transcript = load_transcript(transcripts / f"{video_id}{TRANSCRIPT_SUFFIX}")
            chain = ChainLabeler(self.client, self.config.labeler).run_chain(transcript, vocab)
            chain.to_file(self.work_dir / CHAINS / f"{video_id}{CHAIN_SUFFIX}")
            return chain

        video_ids = self._kept_videos()
        chains = self._per_video(StageName.LABEL, video_ids, label)
        for chain in chains:
            manifest.set_video_status(chain.video_id, StageName.LABEL, f"{len(chain.actions)} actions")
        (self.work_dir / CHAINS).mkdir(parents=True, exist_ok=True)
        return {
            "videos": len(chains),
            "actions": sum(len(c.actions) for c in chains),
            "malformed_rows": sum(c.malformed_count for c in chains),
            "total_rows": sum(c.total_rows for c in chains),
        }

    def _align(self, vocab: StateVocabulary, manifest: PipelineManifest) -> dict[str, float]:
        if self._scorers is None:
            self._scorers = self.scorer_factory()
        scorers = self._scorers
        features = Path(self.paths.features)

        def align(video_id: str) -> tuple[PseudoLabelTimeline, AlignmentStats]:
            chain = ActionStateChain.from_file(self.work_dir / CHAINS / f"{video_id}{CHAIN_SUFFIX}")
            num_frames = read_feature_file(feature_path(features, video_id), video_id=video_id).num_frames
            aligner = Aligner(scorers, self.config.alignment)
            timeline = aligner.align(chain, num_frames, vocab)
            write_label_file(timeline, vocab, label_path(self.work_dir / LABELS, video_id))
            return timeline, aligner.stats

        video_ids = self._kept_videos()
        results = self._per_video(StageName.ALIGN, video_ids, align)
        stats = AlignmentStats()
        assigned = cells = 0
        for timeline, video_stats in results:
            stats.merge(video_stats)
            assigned += int(np.count_nonzero(timeline.labels != UNASSIGNED))
            cells += timeline.labels.size
            manifest.set_video_status(
                timeline.video_id,
                StageName.ALIGN,
                f"assignment rate {timeline.assignment_rate:.3f}",
            )
        (self.work_dir / LABELS).mkdir(parents=True, exist_ok=True)
        counters: dict[str, float] = {name: float(value) for name, value in stats.as_dict().items()}
        counters["assignment_rate"] = assigned / cells if cells else 0.0
        logger.info("Aligned %d videos, assignment rate %.3f", len(results), counters["assignment_rate"])
        return counters

    def _training_set(self, vocab: StateVocabulary) -> list[Example]:
        labels = self.work_dir / LABELS
        return load_dataset(Path(self.paths.features), labels, vocab, list_video_ids(labels, LABEL_SUFFIX))

    def _train(self, vocab: StateVocabulary, manifest: PipelineManifest) -> dict[str, float]:
        dataset = self._training_set(vocab)
        trainer = Trainer(self.config.train)
        teachers = trainer.train_teachers(dataset)
        save_teachers(teachers, self.work_dir / TEACHERS)
        for features, _ in dataset:
            manifest.set_video_status(features.video_id, StageName.TRAIN, "trained")
        run = trainer.run
        return {
            "videos": len(dataset),
            "steps_mlp": run.steps.get("teacher_mlp", 0),
            "steps_tcn": run.steps.get("teacher_tcn", 0),
            "final_loss_mlp": (run.loss_history.get("teacher_mlp") or [0.0])[-1],
            "final_loss_tcn": (run.loss_history.get("teacher_tcn") or [0.0])[-1],
        }

    def _selftrain(self, vocab: StateVocabulary, manifest: PipelineManifest) -> dict[str, float]:
        dtype = self.config.train.precision.dtype
        teachers = load_teachers(self.work_dir / TEACHERS, dtype)
        dataset = self._training_set(vocab)
        trainer = Trainer(self.config.train)
        student = trainer.self_train(teachers, dataset)
        save_model(student, self.work_dir / STUDENT / STUDENT_TCN)
        for features, _ in dataset:
            manifest.set_video_status(features.video_id, StageName.SELFTRAIN, "self-trained")
        return {
            "videos": len(dataset),
            "steps": trainer.run.steps.get("student_tcn", 0),
            "final_loss": (trainer.run.loss_history.get("student_tcn") or [0.0])[-1],
        }

    def _evaluate(self, vocab: StateVocabulary, manifest: PipelineManifest) -> dict[str, float]:
        ground_truth = Path(str(self.paths.ground_truth))
        video_ids = sorted(self.paths.eval_videos) or list_video_ids(ground_truth, LABEL_SUFFIX)
        student = load_model(self.work_dir / STUDENT / STUDENT_TCN, self.config.train.precision.dtype)
        predictions = self.work_dir / PREDICTIONS
        predict_directory(student, Path(self.paths.features), predictions, video_ids)
        report = evaluate_directories(predictions, ground_truth, vocab, video_ids)
        self.reports.write_json_report(report, self.work_dir / REPORT)
        for video_id in video_ids:
            manifest.set_video_status(video_id, StageName.EVAL, "evaluated")
        counters = {
            "videos": report.num_videos,
            "mean_f1_max": report.mean_f1_max,
            "mean_average_precision": report.mean_average_precision,
        }

        pseudo = self.work_dir / LABELS
        overlap = [v for v in list_video_ids(pseudo, LABEL_SUFFIX) if label_path(ground_truth, v).is_file()]
        if overlap:
            timelines = {v: read_label_file(label_path(pseudo, v), vocab) for v in overlap}
            truth = {}
            for video_id in overlap:
                timeline = read_label_file(label_path(ground_truth, video_id), vocab, ground_truth=True)
                if isinstance(timeline, GroundTruthTimeline):
                    truth[video_id] = timeline
            quality = evaluate_pseudo_labels(timelines, truth, vocab)
            self.reports.write_json_report(quality, self.work_dir / PSEUDO_LABEL_REPORT)
            counters["pseudo_label_mean_f1"] = quality.mean_f1
            counters["pseudo_label_assignment_rate"] = quality.assignment_rate
        return counters


def run_pipeline(
    config: StatepipeConfig,
    *,
    force: bool = False,
    transport: httpx.BaseTransport | None = None,
) -> PipelineManifest:
    """
    Run the pipeline of one configuration without a container.

    Args:
        config: Validated, path-resolved configuration
        force: Ignore recorded hashes
        transport: Optional httpx transport for both clients

    Returns:
        The written manifest

    """
    hasher = HashGenerator()
    with LabelerClient(config.llm, transport=transport, hash_generator=hasher) as client:
        runner = PipelineRunner(
            config,
            client,
            lambda: build_scorers(config.vlm, transport),
            ManifestStore(manifest_path(config.pipeline.work_dir), hasher),
            hasher,
        )
        return runner.run(force=force)
