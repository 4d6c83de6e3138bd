"""Versioned, deterministic model serialization (round-trip exact).

Floats are emitted with shortest round-trip repr via JSON, so loading
reproduces the fitted model bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import VersionError
from .forest import ForestModel
from .gbdt import BoostedModel
from .logistic import LogisticModel
from .tree import TreeNode, flatten, unflatten

MODEL_FORMAT_VERSION = 1


def _payload(model) -> dict:
    if isinstance(model, LogisticModel):
        return {"kind": "logistic",
                "coefficients": model.coefficients.tolist(),
                "intercept": model.intercept,
                "l2_lambda": model.l2_lambda,
                "fitted_means": model.fitted_means.tolist(),
                "fitted_sds": model.fitted_sds.tolist(),
                "converged": model.converged,
                "n_iter": model.n_iter}
    if isinstance(model, TreeNode):
        return {"kind": "tree", "tree": flatten(model)}
    if isinstance(model, ForestModel):
        return {"kind": "forest",
                "trees": [flatten(t) for t in model.trees],
                "n_trees": model.n_trees, "max_depth": model.max_depth,
                "min_leaf": model.min_leaf, "features_per_split": model.features_per_split,
                "bootstrap": model.bootstrap, "seed": model.seed,
                "n_features": model.n_features}
    if isinstance(model, BoostedModel):
        return {"kind": "gbdt",
                "base_margin": model.base_margin,
                "trees": [flatten(t) for t in model.trees],
                "learning_rate": model.learning_rate, "n_rounds": model.n_rounds,
                "max_leaves": model.max_leaves, "histogram_bins": model.histogram_bins,
                "l2_leaf": model.l2_leaf, "seed": model.seed,
                "n_features": model.n_features,
                "train_loss": model.train_loss}
    raise TypeError(f"unsupported model type {type(model).__name__}")


def model_bytes(model) -> bytes:
    payload = {"version": MODEL_FORMAT_VERSION, **_payload(model)}
    return (json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n").encode()


def save_model(model, path: str | Path) -> None:
    Path(path).write_bytes(model_bytes(model))


def load_model(path: str | Path):
    payload = json.loads(Path(path).read_bytes())
    version = payload.get("version")
    if version != MODEL_FORMAT_VERSION:
        raise VersionError(f"model format version {version!r} != supported {MODEL_FORMAT_VERSION}")
    kind = payload["kind"]
    if kind == "logistic":
        return LogisticModel(coefficients=np.array(payload["coefficients"]),
                             intercept=payload["intercept"],
                             l2_lambda=payload["l2_lambda"],
                             fitted_means=np.array(payload["fitted_means"]),
                             fitted_sds=np.array(payload["fitted_sds"]),
                             converged=payload["converged"],
                             n_iter=payload["n_iter"])
    if kind == "tree":
        return unflatten(payload["tree"])
    if kind == "forest":
        return ForestModel(trees=[unflatten(t) for t in payload["trees"]],
                           n_trees=payload["n_trees"], max_depth=payload["max_depth"],
                           min_leaf=payload["min_leaf"],
                           features_per_split=payload["features_per_split"],
                           bootstrap=payload["bootstrap"], seed=payload["seed"],
                           n_features=payload["n_features"])
    if kind == "gbdt":
        return BoostedModel(base_margin=payload["base_margin"],
                            trees=[unflatten(t) for t in payload["trees"]],
                            learning_rate=payload["learning_rate"], n_rounds=payload["n_rounds"],
                            max_leaves=payload["max_leaves"],
                            histogram_bins=payload["histogram_bins"],
                            l2_leaf=payload["l2_leaf"], seed=payload["seed"],
                            n_features=payload["n_features"],
                            train_loss=payload["train_loss"])
    raise VersionError(f"unknown model kind {kind!r}")
