"""Discrimination, calibration, and capacity metrics.

Ranking ties are always broken by ascending row index so precision@K and
ranked lists are deterministic; AUROC counts score ties as one half.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation

PRECISION_KS = (30, 100, 500)


def _as_arrays(scores, labels):
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=float)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1-D arrays of equal length")
    return s, y


def _rank_order(scores: np.ndarray) -> np.ndarray:
    """Indices sorting scores descending, ties by ascending index."""
    return np.argsort(-scores, kind="stable")


def auroc(scores, labels) -> float:
    """Probability a random positive outranks a random negative, ties half."""
    s, y = _as_arrays(scores, labels)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ContractViolation("auroc requires both classes")
    order = np.argsort(s, kind="stable")
    ranks = np.empty(len(s))
    sorted_s = s[order]
    # average ranks over tied score groups
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and sorted_s[j + 1] == sorted_s[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def pr_auc(scores, labels) -> float:
    """Average precision: mean precision at each positive, in ranked order."""
    s, y = _as_arrays(scores, labels)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise ContractViolation("pr_auc requires at least one positive")
    order = _rank_order(s)
    hits = y[order]
    cum_pos = np.cumsum(hits)
    ranks = np.arange(1, len(s) + 1)
    return float((cum_pos[hits == 1] / ranks[hits == 1]).sum() / n_pos)


def brier(probs, labels) -> float:
    """Mean squared error of predicted probabilities against binary outcomes."""
    p, y = _as_arrays(probs, labels)
    return float(np.mean((p - y) ** 2))


def precision_at_k(scores, labels, k: int) -> float:
    """Positive fraction among the top-k scores."""
    s, y = _as_arrays(scores, labels)
    if len(s) < k:
        raise ContractViolation(f"precision_at_k: n={len(s)} < K={k}")
    top = _rank_order(s)[:k]
    return float(y[top].mean())


@dataclass
class MetricReport:
    auroc: float
    pr_auc: float
    brier: float
    precision_at: dict[int, float]
    n: int
    base_rate: float


def metric_report(probs, labels, ks: tuple[int, ...] = PRECISION_KS) -> MetricReport:
    p, y = _as_arrays(probs, labels)
    return MetricReport(
        auroc=auroc(p, y),
        pr_auc=pr_auc(p, y),
        brier=brier(p, y),
        precision_at={k: precision_at_k(p, y, k) for k in ks if len(p) >= k},
        n=len(p),
        base_rate=float(y.mean()),
    )


def reliability_curve(probs, labels, n_bins: int = 10) -> list[tuple[float, float, int]]:
    """Quantile-binned (mean predicted, empirical rate, count) rows.

    Duplicate-score mass can make bins unequal; every row lands in exactly
    one bin and empty bins are omitted.
    """
    p, y = _as_arrays(probs, labels)
    if len(p) < n_bins:
        raise ContractViolation(f"reliability_curve: n={len(p)} < n_bins={n_bins}")
    edges = np.quantile(p, np.linspace(0, 1, n_bins + 1)[1:-1])
    bin_idx = np.searchsorted(edges, p, side="right")
    out = []
    for b in range(n_bins):
        mask = bin_idx == b
        count = int(mask.sum())
        if count == 0:
            continue
        out.append((float(p[mask].mean()), float(y[mask].mean()), count))
    return out


@dataclass
class IsotonicMap:
    breakpoints: np.ndarray   # increasing distinct score values
    fitted: np.ndarray        # non-decreasing calibrated values in [0, 1]

    def __eq__(self, other):
        if not isinstance(other, IsotonicMap):
            return NotImplemented
        return (np.array_equal(self.breakpoints, other.breakpoints)
                and np.array_equal(self.fitted, other.fitted))


def pav(values, weights=None) -> np.ndarray:
    """Pool-adjacent-violators: weighted least-squares non-decreasing fit."""
    v_in = np.asarray(values, dtype=float)
    w_in = np.ones_like(v_in) if weights is None else np.asarray(weights, dtype=float)
    vals: list[float] = []
    wts: list[float] = []
    sizes: list[int] = []
    for v, w in zip(v_in, w_in):
        vals.append(float(v))
        wts.append(float(w))
        sizes.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            merged_w = wts[-2] + wts[-1]
            merged_v = (vals[-2] * wts[-2] + vals[-1] * wts[-1]) / merged_w
            merged_n = sizes[-2] + sizes[-1]
            del vals[-2:], wts[-2:], sizes[-2:]
            vals.append(merged_v)
            wts.append(merged_w)
            sizes.append(merged_n)
    out = np.empty(len(v_in))
    pos = 0
    for v, sz in zip(vals, sizes):
        out[pos:pos + sz] = v
        pos += sz
    return out


def fit_isotonic(probs, labels) -> IsotonicMap:
    """Non-decreasing least-squares remapping of scores to probabilities."""
    p, y = _as_arrays(probs, labels)
    if y.min() == y.max():
        raise ContractViolation("fit_isotonic requires both classes")
    order = np.argsort(p, kind="stable")
    ps, ys = p[order], y[order]
    uniq, start = np.unique(ps, return_index=True)
    bounds = np.append(start, len(ps))
    means = np.array([ys[bounds[i]:bounds[i + 1]].mean() for i in range(len(uniq))])
    counts = (bounds[1:] - bounds[:-1]).astype(float)
    fitted = np.clip(pav(means, counts), 0.0, 1.0)
    return IsotonicMap(breakpoints=uniq, fitted=fitted)


def apply_isotonic(mapping: IsotonicMap, probs) -> np.ndarray:
    """Stepwise application with flat extension beyond the breakpoints."""
    p = np.asarray(probs, dtype=float)
    idx = np.searchsorted(mapping.breakpoints, p, side="right") - 1
    idx = np.clip(idx, 0, len(mapping.breakpoints) - 1)
    return mapping.fitted[idx]
