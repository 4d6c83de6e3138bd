"""Random forest: bagged CART trees with per-node feature subsampling.

With bootstrap on, each tree trains on a resample drawn with probability
proportional to row weight; with bootstrap off, weights flow straight into
the tree fit. Per-tree RNG streams are derived from (seed, tree index) so
fits are reproducible and order-independent across trees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractViolation
from .tree import TreeArrays, TreeNode, fit_tree, predict_arrays, to_arrays


@dataclass
class ForestConfig:
    n_trees: int = 300
    max_depth: int = 12
    min_leaf: float = 20.0
    features_per_split: int | str = "sqrt"   # int, "sqrt", or "all"
    bootstrap: bool = True
    seed: int = 0


@dataclass
class ForestModel:
    trees: list[TreeNode]
    n_trees: int
    max_depth: int
    min_leaf: float
    features_per_split: int | str
    bootstrap: bool
    seed: int
    n_features: int
    _arrays: list[TreeArrays] | None = field(default=None, repr=False, compare=False)

    def arrays(self) -> list[TreeArrays]:
        if self._arrays is None:
            self._arrays = [to_arrays(t) for t in self.trees]
        return self._arrays


def _resolve_candidates(spec: int | str, p: int) -> int | None:
    if spec == "all":
        return None
    if spec == "sqrt":
        return max(1, int(math.sqrt(p)))
    n = int(spec)
    if n < 1:
        raise ContractViolation("features_per_split must be >= 1")
    return None if n >= p else n


def fit_forest(matrix, labels, weights=None, config: ForestConfig | None = None) -> ForestModel:
    cfg = config or ForestConfig()
    X = np.asarray(matrix, dtype=float)
    y = np.asarray(labels, dtype=float)
    w = np.ones(len(y)) if weights is None else np.asarray(weights, dtype=float)
    if not np.isfinite(X).all():
        raise ContractViolation("fit_forest requires a fully imputed, finite matrix")
    n, p = X.shape
    n_candidates = _resolve_candidates(cfg.features_per_split, p)
    trees = []
    for t in range(cfg.n_trees):
        rng = np.random.default_rng([cfg.seed, t])
        if cfg.bootstrap:
            idx = rng.choice(n, size=n, replace=True, p=w / w.sum())
            trees.append(fit_tree(X[idx], y[idx], None, cfg.max_depth, cfg.min_leaf,
                                  n_candidates, rng))
        else:
            trees.append(fit_tree(X, y, w, cfg.max_depth, cfg.min_leaf, n_candidates, rng))
    return ForestModel(trees=trees, n_trees=cfg.n_trees, max_depth=cfg.max_depth,
                       min_leaf=cfg.min_leaf, features_per_split=cfg.features_per_split,
                       bootstrap=cfg.bootstrap, seed=cfg.seed, n_features=p)


def predict_forest(model: ForestModel, matrix) -> np.ndarray:
    """Arithmetic mean of per-tree leaf probabilities."""
    X = np.asarray(matrix, dtype=float)
    out = np.zeros(len(X))
    for arr in model.arrays():
        out += predict_arrays(arr, X)
    return out / len(model.trees)
