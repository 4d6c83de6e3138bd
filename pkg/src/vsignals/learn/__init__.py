"""In-repo model zoo: logistic, CART, random forest, and histogram GBDT."""

from __future__ import annotations

import numpy as np

from ..errors import AlignmentError
from .forest import ForestConfig, ForestModel, fit_forest, predict_forest
from .gbdt import BoostedModel, GbdtConfig, fit_gbdt, predict_gbdt, predict_margin
from .io import load_model, model_bytes, save_model
from .logistic import LogisticConfig, LogisticModel, fit_logistic, predict_logistic
from .tree import TreeNode, fit_tree, predict_tree, to_arrays

MODEL_KINDS = ("logistic", "tree", "forest", "gbdt")

__all__ = [
    "MODEL_KINDS",
    "TreeNode", "fit_tree", "predict_tree", "to_arrays",
    "ForestConfig", "ForestModel", "fit_forest", "predict_forest",
    "GbdtConfig", "BoostedModel", "fit_gbdt", "predict_gbdt", "predict_margin",
    "LogisticConfig", "LogisticModel", "fit_logistic", "predict_logistic",
    "save_model", "load_model", "model_bytes",
    "predict_proba", "model_n_features", "model_kind",
]


def model_kind(model) -> str:
    if isinstance(model, LogisticModel):
        return "logistic"
    if isinstance(model, TreeNode):
        return "tree"
    if isinstance(model, ForestModel):
        return "forest"
    if isinstance(model, BoostedModel):
        return "gbdt"
    raise TypeError(f"unsupported model type {type(model).__name__}")


def model_n_features(model) -> int | None:
    """Expected feature count, or None when the model does not pin one
    (a bare tree only records the features it actually split on)."""
    if isinstance(model, (LogisticModel, ForestModel, BoostedModel)):
        return model.n_features
    return None


def predict_proba(model, matrix) -> np.ndarray:
    """Per-row positive-class probability for any model kind.

    The matrix column order must match the persisted feature list the
    model was trained with; a width mismatch is an alignment error.
    """
    X = np.asarray(matrix, dtype=float)
    expected = model_n_features(model)
    if expected is not None and X.shape[1] != expected:
        raise AlignmentError(f"matrix has {X.shape[1]} columns, model expects {expected}")
    if isinstance(model, LogisticModel):
        return predict_logistic(model, X)
    if isinstance(model, TreeNode):
        return predict_tree(model, X)
    if isinstance(model, ForestModel):
        return predict_forest(model, X)
    if isinstance(model, BoostedModel):
        return predict_gbdt(model, X)
    raise TypeError(f"unsupported model type {type(model).__name__}")
