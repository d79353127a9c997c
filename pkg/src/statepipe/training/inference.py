"""Saving trained models and writing their predictions."""

import logging
from pathlib import Path

import numpy as np

from statepipe.core.exceptions import TrainingError
from statepipe.core.formats import (
    FEATURE_SUFFIX,
    feature_path,
    list_video_ids,
    read_feature_file,
    write_matrix_file,
)
from statepipe.nn import MlpModel, SequenceModel, TcnModel, load_model, save_model
from statepipe.training.trainer import TeacherPair

logger = logging.getLogger(__name__)

TEACHER_MLP = "teacher_mlp"
TEACHER_TCN = "teacher_tcn"
STUDENT_TCN = "student_tcn"


def predict(model: SequenceModel, features: np.ndarray) -> np.ndarray:
    """Final-stage T×K probabilities for one sequence."""
    return model.predict(np.asarray(features, dtype=model.parameters()[0].value.dtype))


def save_teachers(teachers: TeacherPair, directory: Path) -> None:
    """Write both teachers with their spec sidecars."""
    save_model(teachers.mlp, directory / TEACHER_MLP)
    save_model(teachers.tcn, directory / TEACHER_TCN)


def load_teachers(directory: Path, dtype: type = np.float32) -> TeacherPair:
    """
    Read the teacher pair written by ``save_teachers``.

    Raises:
        TrainingError: The files hold the wrong architectures

    """
    mlp = load_model(directory / TEACHER_MLP, dtype)
    tcn = load_model(directory / TEACHER_TCN, dtype)
    if not isinstance(mlp, MlpModel) or not isinstance(tcn, TcnModel):
        msg = f"{directory} does not hold an MLP and a TCN teacher"
        raise TrainingError(msg)
    return TeacherPair(mlp=mlp, tcn=tcn)


def predict_directory(
    model: SequenceModel,
    features_dir: Path,
    out_dir: Path,
    video_ids: list[str] | None = None,
) -> list[Path]:
    """
    Write ``<video_id>.fsq`` probability matrices for every feature file.

    Returns:
        The written paths, in video-id order

    """
    written = []
    for video_id in video_ids if video_ids is not None else list_video_ids(features_dir, FEATURE_SUFFIX):
        sequence = read_feature_file(feature_path(features_dir, video_id), video_id=video_id)
        probabilities = predict(model, sequence.data)
        target = feature_path(out_dir, video_id)
        write_matrix_file(probabilities.astype(np.float32), target)
        written.append(target)
    logger.info("Wrote predictions for %d videos to %s", len(written), out_dir)
    return written
