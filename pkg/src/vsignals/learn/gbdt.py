"""Histogram gradient-boosted trees with logistic loss.

Second-order leaf values -G/(H+lambda), weighted-quantile histogram bins
fixed once before boosting, and leaf-wise growth up to ``max_leaves``.
Rows are canonicalized (sorted, duplicates collapsed into weights) before
fitting, so results depend only on the weighted multiset of rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractViolation
from .tree import TreeArrays, TreeNode, predict_arrays, to_arrays


@dataclass
class GbdtConfig:
    n_rounds: int = 400
    learning_rate: float = 0.1
    max_leaves: int = 31
    histogram_bins: int = 64
    l2_leaf: float = 1.0
    seed: int = 0


@dataclass
class BoostedModel:
    base_margin: float
    trees: list[TreeNode]
    learning_rate: float
    n_rounds: int
    max_leaves: int
    histogram_bins: int
    l2_leaf: float
    seed: int
    n_features: int
    train_loss: list[float] = field(default_factory=list)
    _arrays: list[TreeArrays] | None = field(default=None, repr=False, compare=False)

    def arrays(self) -> list[TreeArrays]:
        if self._arrays is None:
            self._arrays = [to_arrays(t) for t in self.trees]
        return self._arrays


def canonicalize_rows(X: np.ndarray, y: np.ndarray, w: np.ndarray):
    """Sort rows lexicographically and collapse duplicates into weights."""
    keys = np.column_stack([X, y])
    order = np.lexsort(keys.T[::-1])
    Xs, ys, ws = X[order], y[order], w[order]
    ks = keys[order]
    new_group = np.ones(len(ys), dtype=bool)
    if len(ys) > 1:
        new_group[1:] = (ks[1:] != ks[:-1]).any(axis=1)
    starts = np.flatnonzero(new_group)
    w_agg = np.add.reduceat(ws, starts)
    return Xs[starts], ys[starts], w_agg


def _weighted_quantile_cuts(x: np.ndarray, w: np.ndarray, n_bins: int) -> np.ndarray:
    """Distinct inverse-CDF cut points splitting x into at most n_bins bins."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    cw = np.cumsum(w[order])
    total = cw[-1]
    qs = np.arange(1, n_bins) / n_bins
    pos = np.searchsorted(cw, qs * total, side="left")
    cuts = xs[np.minimum(pos, len(xs) - 1)]
    cuts = np.unique(cuts)
    return cuts[cuts < xs[-1]]


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class _Leaf:
    __slots__ = ("rows", "depth", "grad", "hess", "best")

    def __init__(self, rows, depth, grad, hess):
        self.rows = rows
        self.depth = depth
        self.grad = grad
        self.hess = hess
        self.best = None  # (gain, feature, bin, threshold)


def _leaf_best_split(leaf: _Leaf, binned, g, h, cuts, l2):
    best = None
    parent_score = leaf.grad ** 2 / (leaf.hess + l2)
    for f in range(binned.shape[1]):
        n_cuts = len(cuts[f])
        if n_cuts == 0:
            continue
        bins_f = binned[leaf.rows, f]
        gh = np.bincount(bins_f, weights=g[leaf.rows], minlength=n_cuts + 1)
        hh = np.bincount(bins_f, weights=h[leaf.rows], minlength=n_cuts + 1)
        gl = np.cumsum(gh)[:-1]
        hl = np.cumsum(hh)[:-1]
        gr = leaf.grad - gl
        hr = leaf.hess - hl
        ok = (hl > 0.0) & (hr > 0.0)
        if not ok.any():
            continue
        gains = np.where(ok, 0.5 * (gl ** 2 / (hl + l2) + gr ** 2 / (hr + l2) - parent_score),
                         -np.inf)
        b = int(np.argmax(gains))
        if gains[b] <= 0.0:
            continue
        cand = (float(gains[b]), f, b, float(cuts[f][b]))
        if best is None or cand[0] > best[0]:
            best = cand
    leaf.best = best


def _grow_boosted_tree(binned, w, g, h, cuts, max_leaves, l2):
    """Leaf-wise growth: repeatedly split the leaf with the largest gain."""
    all_rows = np.arange(len(g))
    root = _Leaf(all_rows, 0, float(g.sum()), float(h.sum()))
    node_of = {id(root): TreeNode(cover=float(w.sum()))}
    tree_root = node_of[id(root)]
    if max_leaves > 1:
        _leaf_best_split(root, binned, g, h, cuts, l2)
    leaves = [root]
    while len(leaves) < max_leaves:
        best_i = -1
        best_gain = 0.0
        for i, leaf in enumerate(leaves):
            if leaf.best is not None and leaf.best[0] > best_gain:
                best_gain = leaf.best[0]
                best_i = i
        if best_i < 0:
            break
        leaf = leaves.pop(best_i)
        _, f, b, threshold = leaf.best
        go_left = binned[leaf.rows, f] <= b
        rows_l, rows_r = leaf.rows[go_left], leaf.rows[~go_left]
        left = _Leaf(rows_l, leaf.depth + 1, float(g[rows_l].sum()), float(h[rows_l].sum()))
        right = _Leaf(rows_r, leaf.depth + 1, float(g[rows_r].sum()), float(h[rows_r].sum()))
        node = node_of.pop(id(leaf))
        node.feature = f
        node.threshold = threshold
        node.left = TreeNode(cover=float(w[rows_l].sum()))
        node.right = TreeNode(cover=float(w[rows_r].sum()))
        node_of[id(left)] = node.left
        node_of[id(right)] = node.right
        _leaf_best_split(left, binned, g, h, cuts, l2)
        _leaf_best_split(right, binned, g, h, cuts, l2)
        leaves.extend([left, right])
    # assign second-order leaf values and propagate to row margins
    update = np.empty(len(g))
    for leaf in leaves:
        value = -leaf.grad / (leaf.hess + l2)
        node_of[id(leaf)].value = value
        update[leaf.rows] = value
    return tree_root, update


def fit_gbdt(matrix, labels, weights=None, config: GbdtConfig | None = None) -> BoostedModel:
    cfg = config or GbdtConfig()
    X_in = np.asarray(matrix, dtype=float)
    y_in = np.asarray(labels, dtype=float)
    w_in = np.ones(len(y_in)) if weights is None else np.asarray(weights, dtype=float)
    if not np.isfinite(X_in).all():
        raise ContractViolation("fit_gbdt requires a fully imputed, finite matrix")
    X, y, w = canonicalize_rows(X_in, y_in, w_in)
    n, p = X.shape

    cuts = [_weighted_quantile_cuts(X[:, f], w, cfg.histogram_bins) for f in range(p)]
    binned = np.empty((n, p), dtype=np.int64)
    for f in range(p):
        binned[:, f] = np.searchsorted(cuts[f], X[:, f], side="left")

    w_total = w.sum()
    prevalence = min(max((w * y).sum() / w_total, 1e-12), 1.0 - 1e-12)
    base_margin = float(np.log(prevalence / (1.0 - prevalence)))
    margin = np.full(n, base_margin)

    def weighted_loss() -> float:
        prob = np.clip(_sigmoid(margin), 1e-12, 1.0 - 1e-12)
        return float((w * -(y * np.log(prob) + (1.0 - y) * np.log(1.0 - prob))).sum() / w_total)

    losses = [weighted_loss()]
    trees: list[TreeNode] = []
    for _ in range(cfg.n_rounds):
        prob = _sigmoid(margin)
        g = w * (prob - y)
        h = w * prob * (1.0 - prob)
        tree_root, update = _grow_boosted_tree(binned, w, g, h, cuts, cfg.max_leaves, cfg.l2_leaf)
        margin = margin + cfg.learning_rate * update
        trees.append(tree_root)
        losses.append(weighted_loss())
    return BoostedModel(base_margin=base_margin, trees=trees, learning_rate=cfg.learning_rate,
                        n_rounds=cfg.n_rounds, max_leaves=cfg.max_leaves,
                        histogram_bins=cfg.histogram_bins, l2_leaf=cfg.l2_leaf, seed=cfg.seed,
                        n_features=p, train_loss=losses)


def predict_margin(model: BoostedModel, matrix) -> np.ndarray:
    X = np.asarray(matrix, dtype=float)
    margin = np.full(len(X), model.base_margin)
    for arr in model.arrays():
        margin += model.learning_rate * predict_arrays(arr, X)
    return margin


def predict_gbdt(model: BoostedModel, matrix) -> np.ndarray:
    return _sigmoid(predict_margin(model, matrix))
