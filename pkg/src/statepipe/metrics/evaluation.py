"""Evaluation reports over videos: frame-wise state scores, pseudo-label quality, ChangeIt."""

import logging
import math
from collections import defaultdict
from collections.abc import Mapping, Sequence
from pathlib import Path

import numpy as np
from pydantic import Field

from statepipe.core.exceptions import EvaluationError
from statepipe.core.formats import (
    FEATURE_SUFFIX,
    LABEL_SUFFIX,
    feature_path,
    label_path,
    list_video_ids,
    read_label_file,
    read_matrix_file,
)
from statepipe.metrics.causal import PhaseAnnotation, PhaseScores, causal_precision_at_1
from statepipe.metrics.ranking import average_precision, f1_max, map_over_states
from statepipe.models import GroundTruthTimeline, PseudoLabelTimeline, StatepipeBaseModel, StateVocabulary
from statepipe.models.timeline import POS, UNASSIGNED

logger = logging.getLogger(__name__)

PHASE_SUFFIX = ".phases.json"


class StateScores(StatepipeBaseModel):
    """Scores of one state category pooled over the evaluated videos."""

    name: str
    f1_max: float = Field(ge=0.0, le=1.0)
    threshold: float | None = Field(description="None when the best threshold is +inf")
    average_precision: float | None = Field(default=None, ge=0.0, le=1.0)
    num_positive: int = Field(ge=0)
    defined: bool = True


class EvalReport(StatepipeBaseModel):
    """Frame-wise evaluation of one object category."""

    object_name: str
    states: tuple[StateScores, ...]
    mean_f1_max: float = Field(ge=0.0, le=1.0)
    mean_average_precision: float = Field(ge=0.0, le=1.0)
    excluded_states: int = Field(ge=0)
    num_videos: int = Field(ge=0)
    num_frames: int = Field(ge=0)
    per_video_f1_max: dict[str, dict[str, float]] | None = None


class PseudoLabelStateQuality(StatepipeBaseModel):
    """Assigned-cell agreement of one state with ground truth."""

    name: str
    precision: float
    recall: float
    f1: float
    accuracy: float
    assignment_rate: float


class PseudoLabelReport(StatepipeBaseModel):
    """Pseudo-label quality of one object category."""

    object_name: str
    states: tuple[PseudoLabelStateQuality, ...]
    mean_f1: float
    mean_accuracy: float
    assignment_rate: float
    num_videos: int


class ChangeItCategoryScores(StatepipeBaseModel):
    """Precision@1 of one ChangeIt category."""

    category: str
    state_precision: float
    action_precision: float
    num_videos: int


class ChangeItReport(StatepipeBaseModel):
    """Causally ordered precision@1 per category and averaged over categories."""

    categories: tuple[ChangeItCategoryScores, ...]
    mean_state_precision: float
    mean_action_precision: float


def _pooled(
    predictions: Mapping[str, np.ndarray],
    ground_truth: Mapping[str, GroundTruthTimeline],
) -> tuple[list[str], np.ndarray, np.ndarray]:
    """Stack prediction and label rows of every video with ground truth."""
    if not ground_truth:
        msg = "no ground-truth videos to evaluate"
        raise EvaluationError(msg)
    missing = sorted(set(ground_truth) - set(predictions))
    if missing:
        msg = f"no predictions for {len(missing)} evaluated videos: {missing[:5]}"
        raise EvaluationError(msg)
    videos = sorted(ground_truth)
    for video_id in videos:
        pred, truth = predictions[video_id], ground_truth[video_id]
        if pred.shape != truth.labels.shape:
            msg = f"{video_id}: prediction {pred.shape} vs ground truth {truth.labels.shape}"
            raise EvaluationError(msg)
    scores = np.concatenate([np.asarray(predictions[v], dtype=np.float64) for v in videos])
    labels = np.concatenate([ground_truth[v].labels == POS for v in videos])
    return videos, scores, labels


def evaluate_predictions(
    predictions: Mapping[str, np.ndarray],
    ground_truth: Mapping[str, GroundTruthTimeline],
    vocab: StateVocabulary,
    *,
    per_video: bool = False,
) -> EvalReport:
    """
    F1-max and AP per state, pooled over all frames of all evaluated videos.

    Args:
        predictions: T×K probabilities per video id
        ground_truth: Binary timelines per video id; these define the eval set
        vocab: State order and names
        per_video: Also report per-video F1-max (diagnostic)

    Raises:
        EvaluationError: Missing predictions, shape mismatch, or no state with positives

    """
    videos, scores, labels = _pooled(predictions, ground_truth)
    if scores.shape[1] != vocab.num_states:
        msg = f"predictions have {scores.shape[1]} states, vocabulary {vocab.num_states}"
        raise EvaluationError(msg)

    states = []
    for k, name in enumerate(vocab.state_names):
        best = f1_max(scores[:, k], labels[:, k])
        ap = average_precision(scores[:, k], labels[:, k]) if best.defined else None
        if not best.defined:
            logger.warning("State %r has no positive frame in the evaluation set", name)
        states.append(
            StateScores(
                name=name,
                f1_max=best.f1,
                threshold=None if math.isinf(best.threshold) else best.threshold,
                average_precision=ap,
                num_positive=int(labels[:, k].sum()),
                defined=best.defined,
            ),
        )

    mean_ap, excluded = map_over_states([s.average_precision for s in states])
    defined_f1 = [s.f1_max for s in states if s.defined]
    breakdown = None
    if per_video:
        breakdown = {
            video_id: {
                name: f1_max(predictions[video_id][:, k], ground_truth[video_id].labels[:, k] == POS).f1
                for k, name in enumerate(vocab.state_names)
            }
            for video_id in videos
        }
    return EvalReport(
        object_name=vocab.object_primary_name,
        states=tuple(states),
        mean_f1_max=float(np.mean(defined_f1)),
        mean_average_precision=mean_ap,
        excluded_states=excluded,
        num_videos=len(videos),
        num_frames=int(scores.shape[0]),
        per_video_f1_max=breakdown,
    )


def _ratio(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator else 0.0


def evaluate_pseudo_labels(
    timelines: Mapping[str, PseudoLabelTimeline],
    ground_truth: Mapping[str, GroundTruthTimeline],
    vocab: StateVocabulary,
) -> PseudoLabelReport:
    """
    Agreement of assigned pseudo-label cells with ground truth, per state.

    Precision and accuracy count assigned cells only; recall divides by every
    ground-truth positive, so Unassigned positives count as misses.

    Raises:
        EvaluationError: Missing timelines or shape mismatch

    """
    labels_by_video = {video_id: t.labels for video_id, t in timelines.items()}
    videos, pseudo, truth = _pooled(labels_by_video, ground_truth)
    pseudo = pseudo.astype(np.int8)
    assigned = pseudo != UNASSIGNED
    predicted_pos = pseudo == POS

    states = []
    for k, name in enumerate(vocab.state_names):
        tp = int((predicted_pos[:, k] & truth[:, k]).sum())
        fp = int((predicted_pos[:, k] & ~truth[:, k]).sum())
        fn = int((truth[:, k] & ~predicted_pos[:, k]).sum())
        correct = int((assigned[:, k] & (predicted_pos[:, k] == truth[:, k])).sum())
        n_assigned = int(assigned[:, k].sum())
        precision = _ratio(tp, tp + fp)
        recall = _ratio(tp, tp + fn)
        states.append(
            PseudoLabelStateQuality(
                name=name,
                precision=precision,
                recall=recall,
                f1=_ratio(2 * tp, 2 * tp + fp + fn),
                accuracy=_ratio(correct, n_assigned),
                assignment_rate=_ratio(n_assigned, assigned.shape[0]),
            ),
        )
    return PseudoLabelReport(
        object_name=vocab.object_primary_name,
        states=tuple(states),
        mean_f1=float(np.mean([s.f1 for s in states])),
        mean_accuracy=float(np.mean([s.accuracy for s in states])),
        assignment_rate=_ratio(int(assigned.sum()), assigned.size),
        num_videos=len(videos),
    )


def evaluate_changeit(
    scores: Sequence[PhaseScores],
    annotations: Mapping[str, PhaseAnnotation],
) -> ChangeItReport:
    """
    Per-category precision@1 of causally ordered selections.

    State precision averages the initial and end hits; action precision is
    the action hit rate.

    Raises:
        EvaluationError: No annotated video, or a video without annotation

    """
    per_category: dict[str, list[tuple[float, float]]] = defaultdict(list)
    for video_scores in scores:
        annotation = annotations.get(video_scores.video_id)
        if annotation is None:
            msg = f"{video_scores.video_id}: no phase annotation"
            raise EvaluationError(msg)
        triple = causal_precision_at_1(video_scores, annotation)
        state_hit = (int(triple.initial_hit) + int(triple.end_hit)) / 2
        per_category[annotation.category].append((state_hit, float(triple.action_hit)))
    if not per_category:
        msg = "no videos to evaluate"
        raise EvaluationError(msg)

    categories = tuple(
        ChangeItCategoryScores(
            category=category,
            state_precision=float(np.mean([s for s, _ in hits])),
            action_precision=float(np.mean([a for _, a in hits])),
            num_videos=len(hits),
        )
        for category, hits in sorted(per_category.items())
    )
    return ChangeItReport(
        categories=categories,
        mean_state_precision=float(np.mean([c.state_precision for c in categories])),
        mean_action_precision=float(np.mean([c.action_precision for c in categories])),
    )


def evaluate_directories(
    pred_dir: Path,
    gt_dir: Path,
    vocab: StateVocabulary,
    video_ids: Sequence[str] | None = None,
    *,
    per_video: bool = False,
) -> EvalReport:
    """Evaluate ``<video_id>.fsq`` predictions against ``<video_id>.labels.json`` ground truth."""
    wanted = list(video_ids) if video_ids else list_video_ids(gt_dir, LABEL_SUFFIX)
    truth: dict[str, GroundTruthTimeline] = {}
    for video_id in wanted:
        timeline = read_label_file(label_path(gt_dir, video_id), vocab, ground_truth=True)
        if isinstance(timeline, GroundTruthTimeline):
            truth[video_id] = timeline
    available = set(list_video_ids(pred_dir, FEATURE_SUFFIX))
    predictions = {v: read_matrix_file(feature_path(pred_dir, v)) for v in truth if v in available}
    return evaluate_predictions(predictions, truth, vocab, per_video=per_video)


def evaluate_changeit_directories(pred_dir: Path, gt_dir: Path) -> ChangeItReport:
    """Evaluate ``<video_id>.fsq`` T×3 phase predictions against ``<video_id>.phases.json``."""
    annotations = {
        video_id: PhaseAnnotation.from_file(gt_dir / f"{video_id}{PHASE_SUFFIX}")
        for video_id in list_video_ids(gt_dir, PHASE_SUFFIX)
    }
    scores = [
        PhaseScores.from_matrix(video_id, read_matrix_file(feature_path(pred_dir, video_id)))
        for video_id in sorted(annotations)
    ]
    return evaluate_changeit(scores, annotations)
