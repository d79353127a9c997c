"""Teacher training, self-training and inference."""

from statepipe.training.dataset import Example, TrainingItem, load_dataset, prepare, unlabeled_dataset
from statepipe.training.inference import (
    STUDENT_TCN,
    load_teachers,
    predict,
    predict_directory,
    save_teachers,
)
from statepipe.training.trainer import (
    TeacherPair,
    Trainer,
    TrainingRun,
    ema_update,
    ensemble_target,
    model_specs,
    self_train,
    train_teachers,
)

__all__ = [
    "STUDENT_TCN",
    "Example",
    "TeacherPair",
    "Trainer",
    "TrainingItem",
    "TrainingRun",
    "ema_update",
    "ensemble_target",
    "load_dataset",
    "load_teachers",
    "model_specs",
    "predict",
    "predict_directory",
    "prepare",
    "save_teachers",
    "self_train",
    "train_teachers",
    "unlabeled_dataset",
]
