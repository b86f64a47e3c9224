"""Native classifiers over embedding features, plus PCA projection."""

from ._common import TrainingError, make_rng, sigmoid
from .ffnn import FFNNModel, loss_and_gradients, train_ffnn
from .gbt import DEFAULT_GRID, GBTModel, Tree, fit_gbt, leaf_weight, split_gain, train_gbt
from .logreg import LogRegModel, logreg_gradient, logreg_loss, train_logreg
from .model_io import ModelFileError, load_model, save_model
from .pca import PCAResult, pca_project
from .predict import (
    Prediction,
    predict,
    read_predictions,
    score_label,
    write_predictions,
)

__all__ = [
    "DEFAULT_GRID",
    "FFNNModel",
    "GBTModel",
    "LogRegModel",
    "ModelFileError",
    "PCAResult",
    "Prediction",
    "Tree",
    "TrainingError",
    "fit_gbt",
    "leaf_weight",
    "load_model",
    "logreg_gradient",
    "logreg_loss",
    "loss_and_gradients",
    "make_rng",
    "pca_project",
    "predict",
    "read_predictions",
    "save_model",
    "score_label",
    "sigmoid",
    "split_gain",
    "train_ffnn",
    "train_gbt",
    "train_logreg",
    "write_predictions",
]
