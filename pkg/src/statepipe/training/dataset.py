"""Pairing feature sequences with label timelines."""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from statepipe.core.exceptions import ShapeError, TrainingError
from statepipe.core.formats import (
    FEATURE_SUFFIX,
    feature_path,
    label_path,
    list_video_ids,
    read_feature_file,
    read_label_file,
)
from statepipe.models import FeatureSequence, PseudoLabelTimeline, StateVocabulary

logger = logging.getLogger(__name__)

Example = tuple[FeatureSequence, PseudoLabelTimeline]


@dataclass(frozen=True)
class TrainingItem:
    """One sequence as arrays in the training dtype."""

    video_id: str
    features: np.ndarray
    targets: np.ndarray
    mask: np.ndarray


def prepare(
    dataset: list[Example],
    dtype: type = np.float32,
    *,
    require_assigned: bool = True,
) -> list[TrainingItem]:
    """
    Check a dataset and convert it to training arrays.

    Raises:
        TrainingError: Dataset empty, or without a single assigned cell when
            ``require_assigned`` is set
        ShapeError: Frame counts, feature widths or state counts disagree

    """
    if not dataset:
        msg = "dataset is empty"
        raise TrainingError(msg)
    dims = {features.dim for features, _ in dataset}
    states = {timeline.num_states for _, timeline in dataset}
    if len(dims) != 1 or len(states) != 1:
        msg = f"inconsistent dataset: feature dims {sorted(dims)}, state counts {sorted(states)}"
        raise ShapeError(msg)

    items = []
    for features, timeline in dataset:
        if features.video_id != timeline.video_id or features.num_frames != timeline.num_frames:
            msg = (
                f"features {features.video_id} ({features.num_frames} frames) do not pair with "
                f"labels {timeline.video_id} ({timeline.num_frames} frames)"
            )
            raise ShapeError(msg)
        targets, mask = timeline.targets_and_mask(dtype)
        items.append(
            TrainingItem(
                video_id=features.video_id,
                features=np.asarray(features.data, dtype=dtype),
                targets=targets,
                mask=mask,
            ),
        )
    if require_assigned and not any(item.mask.any() for item in items):
        msg = "zero assigned cells in the training set"
        raise TrainingError(msg)
    return items


def load_dataset(
    features_dir: Path,
    labels_dir: Path,
    vocab: StateVocabulary | None = None,
    video_ids: list[str] | None = None,
) -> list[Example]:
    """
    Load every video that has both a feature file and a label file.

    Videos with only one of the two are skipped with a warning.
    """
    wanted = video_ids if video_ids is not None else list_video_ids(features_dir, FEATURE_SUFFIX)
    dataset: list[Example] = []
    for video_id in wanted:
        labels = label_path(labels_dir, video_id)
        if not labels.is_file():
            logger.warning("%s: no label file in %s, skipped", video_id, labels_dir)
            continue
        features = read_feature_file(feature_path(features_dir, video_id), video_id=video_id)
        dataset.append((features, read_label_file(labels, vocab)))
    logger.info("Loaded %d training videos", len(dataset))
    return dataset


def unlabeled_dataset(features_dir: Path, num_states: int) -> list[Example]:
    """Every feature file paired with an all-Unassigned timeline of K states."""
    dataset: list[Example] = []
    for video_id in list_video_ids(features_dir, FEATURE_SUFFIX):
        features = read_feature_file(feature_path(features_dir, video_id), video_id=video_id)
        dataset.append((features, PseudoLabelTimeline.unassigned(video_id, features.num_frames, num_states)))
    logger.info("Loaded %d unlabeled videos", len(dataset))
    return dataset
