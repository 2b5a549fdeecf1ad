"""Gradient-boosted relation classifier with a swappable split kernel."""

from .crossval import assign_folds, cross_validate
from .ensemble import (
    ENSEMBLE_FORMAT_VERSION,
    GbdtEnsemble,
    GbdtTrainingError,
    LabelModel,
    RelationPrediction,
    TrainConfig,
    ensemble_from_dict,
    ensemble_to_dict,
    load_ensemble,
    predict,
    predict_batch,
    save_ensemble,
    train,
)
from .kernel import BACKEND, available_backends, best_split
from .tree import fit_tree, predict_tree

__all__ = [
    "ENSEMBLE_FORMAT_VERSION",
    "GbdtEnsemble",
    "GbdtTrainingError",
    "LabelModel",
    "RelationPrediction",
    "TrainConfig",
    "ensemble_from_dict",
    "ensemble_to_dict",
    "load_ensemble",
    "predict",
    "predict_batch",
    "save_ensemble",
    "train",
    "BACKEND",
    "available_backends",
    "best_split",
    "assign_folds",
    "cross_validate",
    "fit_tree",
    "predict_tree",
]
