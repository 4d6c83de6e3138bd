"""Weighted CART decision tree with Gini splits.

Split thresholds are midpoints between consecutive distinct sorted feature
values; candidate statistics are aggregated per distinct value, so fits
depend only on the weighted multiset of rows. ``min_leaf`` is a minimum
weight mass per child, which keeps integer-weighted and duplicated-row
fits exactly equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractViolation


@dataclass
class TreeNode:
    """Split node (feature >= 0) or leaf (feature == -1).

    ``value`` is the weighted positive fraction for CART/forest leaves and
    a margin for boosted leaves; ``cover`` is the training weight mass that
    reached the node; ``impurity`` is the node Gini (NaN for boosted trees).
    """
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    missing_goes_left: bool = True
    value: float = 0.0
    cover: float = 0.0
    impurity: float = float("nan")

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


@dataclass
class TreeArrays:
    """Flat preorder representation used by fast prediction and attribution."""
    children_left: np.ndarray
    children_right: np.ndarray
    feature: np.ndarray
    threshold: np.ndarray
    value: np.ndarray
    cover: np.ndarray
    max_depth: int


def gini(pos_weight: float, total_weight: float) -> float:
    """Weighted Gini impurity of a binary node."""
    if total_weight <= 0.0:
        return 0.0
    p = pos_weight / total_weight
    return 2.0 * p * (1.0 - p)


def _best_split(X, y, w, rows, feature_ids, min_leaf):
    """Best (decrease, feature, threshold) over candidate features, or None.

    Ties break toward the lower feature index, then the lower threshold.
    """
    w_node = w[rows]
    y_node = y[rows]
    total_w = w_node.sum()
    total_p = (w_node * y_node).sum()
    parent = gini(total_p, total_w)
    best = None
    for f in feature_ids:
        x = X[rows, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        ws = w_node[order]
        ps = w_node[order] * y_node[order]
        # group by distinct value
        boundary = np.flatnonzero(xs[1:] != xs[:-1])
        if boundary.size == 0:
            continue
        cum_w = np.cumsum(ws)[boundary]
        cum_p = np.cumsum(ps)[boundary]
        wl, pl = cum_w, cum_p
        wr, pr = total_w - wl, total_p - pl
        ok = (wl >= min_leaf) & (wr >= min_leaf)
        if not ok.any():
            continue
        child = 2.0 * (pl * (wl - pl) / wl + pr * (wr - pr) / wr) / total_w
        decrease = np.where(ok, parent - child, -np.inf)
        j = int(np.argmax(decrease))
        if decrease[j] <= 0.0:
            continue
        threshold = 0.5 * (xs[boundary[j]] + xs[boundary[j] + 1])
        cand = (float(decrease[j]), f, threshold)
        if best is None or cand[0] > best[0]:
            best = cand
    return best


def _grow(X, y, w, rows, depth, max_depth, min_leaf, n_candidates, rng) -> TreeNode:
    w_node = w[rows]
    total_w = float(w_node.sum())
    total_p = float((w_node * y[rows]).sum())
    node = TreeNode(value=total_p / total_w, cover=total_w, impurity=gini(total_p, total_w))
    if depth >= max_depth or total_w < 2.0 * min_leaf or total_p <= 0.0 or total_p >= total_w:
        return node
    p = X.shape[1]
    if n_candidates is None or n_candidates >= p:
        feature_ids = range(p)
    else:
        feature_ids = np.sort(rng.choice(p, size=n_candidates, replace=False))
    best = _best_split(X, y, w, rows, feature_ids, min_leaf)
    if best is None:
        return node
    _, f, threshold = best
    go_left = X[rows, f] <= threshold
    node.feature = int(f)
    node.threshold = float(threshold)
    node.left = _grow(X, y, w, rows[go_left], depth + 1, max_depth, min_leaf, n_candidates, rng)
    node.right = _grow(X, y, w, rows[~go_left], depth + 1, max_depth, min_leaf, n_candidates, rng)
    return node


def fit_tree(matrix, labels, weights=None, max_depth: int = 12, min_leaf: float = 20.0,
             n_candidate_features: int | None = None, rng: np.random.Generator | None = None,
             ) -> TreeNode:
    """Greedy CART fit; degenerate data yields a single leaf."""
    X = np.asarray(matrix, dtype=float)
    y = np.asarray(labels, dtype=float)
    w = np.ones(len(y)) if weights is None else np.asarray(weights, dtype=float)
    if not np.isfinite(X).all():
        raise ContractViolation("fit_tree requires a fully imputed, finite matrix")
    if rng is None:
        rng = np.random.default_rng(0)
    return _grow(X, y, w, np.arange(len(y)), 0, max_depth, min_leaf, n_candidate_features, rng)


def to_arrays(root: TreeNode) -> TreeArrays:
    """Flatten a tree in preorder (left child first)."""
    nodes: list[TreeNode] = []

    def visit(node: TreeNode, depth: int) -> int:
        nodes.append(node)
        return depth if node.is_leaf else max(visit(node.left, depth + 1),
                                              visit(node.right, depth + 1))

    max_depth = visit(root, 0)
    index = {id(n): i for i, n in enumerate(nodes)}
    n = len(nodes)
    arr = TreeArrays(
        children_left=np.full(n, -1, dtype=np.int64),
        children_right=np.full(n, -1, dtype=np.int64),
        feature=np.array([nd.feature for nd in nodes], dtype=np.int64),
        threshold=np.array([nd.threshold for nd in nodes]),
        value=np.array([nd.value for nd in nodes]),
        cover=np.array([nd.cover for nd in nodes]),
        max_depth=max_depth,
    )
    for i, nd in enumerate(nodes):
        if not nd.is_leaf:
            arr.children_left[i] = index[id(nd.left)]
            arr.children_right[i] = index[id(nd.right)]
    return arr


def predict_arrays(arr: TreeArrays, X: np.ndarray) -> np.ndarray:
    """Vectorized leaf lookup: route all rows one level at a time."""
    idx = np.zeros(len(X), dtype=np.int64)
    for _ in range(arr.max_depth):
        at_split = arr.feature[idx] >= 0
        if not at_split.any():
            break
        cur = idx[at_split]
        go_left = X[at_split, arr.feature[cur]] <= arr.threshold[cur]
        idx[at_split] = np.where(go_left, arr.children_left[cur], arr.children_right[cur])
    return arr.value[idx]


def predict_tree(root: TreeNode, matrix) -> np.ndarray:
    X = np.asarray(matrix, dtype=float)
    return predict_arrays(to_arrays(root), X)


def tree_from_arrays(children_left, children_right, feature, threshold, value, cover,
                     impurity=None) -> TreeNode:
    """Rebuild a TreeNode structure from flat arrays (deserialization)."""
    def build(i: int) -> TreeNode:
        node = TreeNode(feature=int(feature[i]), threshold=float(threshold[i]),
                        value=float(value[i]), cover=float(cover[i]),
                        impurity=float("nan") if impurity is None else float(impurity[i]))
        if node.feature >= 0:
            node.left = build(int(children_left[i]))
            node.right = build(int(children_right[i]))
        return node
    return build(0)


def flatten(root: TreeNode) -> dict:
    """Serializable flat-array form (preorder), including impurity."""
    nodes: list[TreeNode] = []

    def visit(node: TreeNode):
        nodes.append(node)
        if not node.is_leaf:
            visit(node.left)
            visit(node.right)

    visit(root)
    index = {id(n): i for i, n in enumerate(nodes)}
    return {
        "children_left": [-1 if n.is_leaf else index[id(n.left)] for n in nodes],
        "children_right": [-1 if n.is_leaf else index[id(n.right)] for n in nodes],
        "feature": [n.feature for n in nodes],
        "threshold": [n.threshold for n in nodes],
        "value": [n.value for n in nodes],
        "cover": [n.cover for n in nodes],
        "impurity": [None if np.isnan(n.impurity) else n.impurity for n in nodes],
    }


def unflatten(payload: dict) -> TreeNode:
    impurity = [float("nan") if v is None else v for v in payload["impurity"]]
    return tree_from_arrays(payload["children_left"], payload["children_right"],
                            payload["feature"], payload["threshold"], payload["value"],
                            payload["cover"], impurity)
