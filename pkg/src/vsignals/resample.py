"""Development-only class-imbalance treatments.

Inverse-prevalence weights leave the matrix untouched; the oversamplers
synthesize minority rows until classes balance. Borderline-SMOTE and
ADASYN refuse matrices containing missing values and fall back to random
oversampling with a warning, mirroring the documented behavior of the
reference pipeline.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .panel import Panel
from .preprocess import Preprocessor, categorical_mask, transform

logger = logging.getLogger(__name__)

WEIGHT_CAP = 50.0

DEFAULT_K = 5

VARIANT_KINDS = ("weights", "ros", "smotenc", "borderline", "adasyn")

# variants feeding the main zoo; the rest are robustness-only
MAIN_VARIANTS = ("weights", "smotenc")


@dataclass
class ResampleResult:
    matrix: np.ndarray
    labels: np.ndarray
    fell_back: bool = False
    note: str | None = None


@dataclass
class ImbalanceVariant:
    kind: str
    matrix: np.ndarray
    labels: np.ndarray
    weights: np.ndarray | None
    categorical_mask: np.ndarray
    seed: int
    fell_back: bool = False


def inverse_prevalence_weights(labels) -> tuple[float, float]:
    """(w_pos, w_neg): w_neg = 1, w_pos = min(N_neg / N_pos, 50)."""
    y = np.asarray(labels)
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ContractViolation("inverse_prevalence_weights requires both classes")
    return min(n_neg / n_pos, WEIGHT_CAP), 1.0


def _class_split(y: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """(minority_idx, majority_idx, minority_label); equal counts -> label 1 minority."""
    idx1 = np.flatnonzero(y == 1)
    idx0 = np.flatnonzero(y == 0)
    if len(idx1) == 0 or len(idx0) == 0:
        raise ContractViolation("resampling requires both classes")
    if len(idx1) <= len(idx0):
        return idx1, idx0, 1
    return idx0, idx1, 0


def random_oversample(matrix, labels, seed: int) -> ResampleResult:
    """Duplicate minority rows with replacement until classes balance,
    then shuffle row order deterministically by seed."""
    X = np.asarray(matrix, dtype=float)
    y = np.asarray(labels)
    min_idx, maj_idx, min_label = _class_split(y)
    rng = np.random.default_rng([seed, 0])
    n_extra = len(maj_idx) - len(min_idx)
    dup = min_idx[rng.integers(0, len(min_idx), n_extra)] if n_extra else np.empty(0, dtype=int)
    X_out = np.vstack([X, X[dup]]) if n_extra else X.copy()
    y_out = np.concatenate([y, np.full(n_extra, min_label, dtype=y.dtype)])
    order = rng.permutation(len(y_out))
    return ResampleResult(X_out[order], y_out[order])


def _pairwise_sq_dists(A: np.ndarray, B: np.ndarray, cat_penalty_sq: float = 0.0,
                       cat_cols: np.ndarray | None = None, block: int = 2048) -> np.ndarray:
    """Squared distances: Euclidean over continuous columns plus a fixed
    squared penalty per categorical mismatch. Blocked to bound memory."""
    if cat_cols is None:
        cat_cols = np.zeros(A.shape[1], dtype=bool)
    cont = ~cat_cols
    Ac, Bc = A[:, cont], B[:, cont]
    out = np.empty((len(A), len(B)))
    b_sq = (Bc ** 2).sum(axis=1)
    for start in range(0, len(A), block):
        stop = min(start + block, len(A))
        chunk = Ac[start:stop]
        d = (chunk ** 2).sum(axis=1)[:, None] + b_sq[None, :] - 2.0 * chunk @ Bc.T
        np.maximum(d, 0.0, out=d)
        if cat_penalty_sq > 0.0 and cat_cols.any():
            for c in np.flatnonzero(cat_cols):
                d += cat_penalty_sq * (A[start:stop, c][:, None] != B[None, :, c])
        out[start:stop] = d
    return out


def _knn(A: np.ndarray, B: np.ndarray, k: int, exclude_self: bool,
         cat_penalty_sq: float = 0.0, cat_cols: np.ndarray | None = None) -> np.ndarray:
    """Indices (into B) of the k nearest neighbors of each row of A.
    Distance ties break by ascending row index."""
    d = _pairwise_sq_dists(A, B, cat_penalty_sq, cat_cols)
    if exclude_self:
        np.fill_diagonal(d, np.inf)
    order = np.argsort(d, axis=1, kind="stable")
    return order[:, :k]


def _majority_vote(values: np.ndarray) -> np.ndarray:
    """Row-wise most frequent value; ties go to the smaller value."""
    out = np.empty(len(values))
    for i, row in enumerate(values):
        uniq, counts = np.unique(row, return_counts=True)
        out[i] = uniq[np.argmax(counts)]
    return out


def smote_nc(matrix, labels, cat_mask, k: int = DEFAULT_K, seed: int = 0) -> ResampleResult:
    """SMOTE for mixed numeric/categorical columns.

    Continuous coordinates interpolate between a minority row and one of
    its k nearest minority neighbors; categorical coordinates take the
    neighbor majority. A categorical mismatch contributes the squared
    median of the continuous columns' standard deviations to the squared
    distance.
    """
    X = np.asarray(matrix, dtype=float)
    y = np.asarray(labels)
    cat = np.asarray(cat_mask, dtype=bool)
    if np.isnan(X).any():
        raise ContractViolation("smote_nc requires a fully imputed matrix")
    if k < 1:
        raise ContractViolation("smote_nc requires k >= 1")
    min_idx, maj_idx, min_label = _class_split(y)
    if len(min_idx) < 2:
        raise ContractViolation("smote_nc requires at least two minority rows")
    n_extra = len(maj_idx) - len(min_idx)
    if n_extra == 0:
        return ResampleResult(X.copy(), y.copy())

    X_min = X[min_idx]
    cont = ~cat
    penalty_sq = 0.0
    if cat.any() and cont.any():
        penalty_sq = float(np.median(X_min[:, cont].std(axis=0)) ** 2)
    k_eff = min(k, len(min_idx) - 1)
    nn = _knn(X_min, X_min, k_eff, exclude_self=True, cat_penalty_sq=penalty_sq, cat_cols=cat)

    rng = np.random.default_rng([seed, 1])
    base = rng.integers(0, len(min_idx), n_extra)
    pick = rng.integers(0, k_eff, n_extra)
    u = rng.random(n_extra)

    synth = np.empty((n_extra, X.shape[1]))
    xb = X_min[base]
    xn = X_min[nn[base, pick]]
    synth[:, cont] = xb[:, cont] + u[:, None] * (xn[:, cont] - xb[:, cont])
    for c in np.flatnonzero(cat):
        majority_per_row = _majority_vote(X_min[nn, c])
        synth[:, c] = majority_per_row[base]

    X_out = np.vstack([X, synth])
    y_out = np.concatenate([y, np.full(n_extra, min_label, dtype=y.dtype)])
    return ResampleResult(X_out, y_out)


def _interp_synthesize(X_base_pool: np.ndarray, nn_pool: np.ndarray, X_neighbors: np.ndarray,
                       base: np.ndarray, rng) -> np.ndarray:
    pick = rng.integers(0, nn_pool.shape[1], len(base))
    u = rng.random(len(base))
    xb = X_base_pool[base]
    xn = X_neighbors[nn_pool[base, pick]]
    return xb + u[:, None] * (xn - xb)


def borderline_smote(matrix, labels, k: int = DEFAULT_K, seed: int = 0) -> ResampleResult:
    """Borderline-SMOTE-1: oversample only danger minority points (at least
    k/2 majority neighbors but not all). Falls back to random oversampling
    when the matrix contains missing values."""
    X = np.asarray(matrix, dtype=float)
    y = np.asarray(labels)
    if np.isnan(X).any():
        logger.warning("borderline_smote: matrix contains missing values, falling back to ROS")
        ros = random_oversample(np.nan_to_num(X), y, seed)
        return ResampleResult(ros.matrix, ros.labels, fell_back=True, note="missing values")
    min_idx, maj_idx, min_label = _class_split(y)
    if len(min_idx) < 2:
        raise ContractViolation("borderline_smote requires at least two minority rows")
    n_extra = len(maj_idx) - len(min_idx)
    if n_extra == 0:
        return ResampleResult(X.copy(), y.copy())

    X_min = X[min_idx]
    k_all = min(k, len(X) - 1)
    nn_all = _knn(X_min, X, min(k_all + 1, len(X)), exclude_self=False)
    # the query row itself shows up at distance zero; drop it by index
    maj_counts = np.empty(len(min_idx), dtype=int)
    for i in range(len(min_idx)):
        neigh = [j for j in nn_all[i] if j != min_idx[i]][:k_all]
        maj_counts[i] = sum(1 for j in neigh if y[j] != min_label)
    danger = np.flatnonzero((maj_counts >= k_all / 2.0) & (maj_counts < k_all))
    if len(danger) == 0:
        logger.warning("borderline_smote: no danger points, returning input unchanged")
        return ResampleResult(X.copy(), y.copy(), note="empty danger set")

    k_eff = min(k, len(min_idx) - 1)
    nn_min = _knn(X_min[danger], X_min, min(k_eff + 1, len(min_idx)), exclude_self=False)
    # drop each danger point itself from its neighbor list
    nn_clean = np.empty((len(danger), k_eff), dtype=int)
    for i, d_i in enumerate(danger):
        neigh = [j for j in nn_min[i] if j != d_i][:k_eff]
        nn_clean[i] = neigh
    rng = np.random.default_rng([seed, 2])
    base = rng.integers(0, len(danger), n_extra)
    synth = _interp_synthesize(X_min[danger], nn_clean, X_min, base, rng)
    X_out = np.vstack([X, synth])
    y_out = np.concatenate([y, np.full(n_extra, min_label, dtype=y.dtype)])
    return ResampleResult(X_out, y_out)


def _largest_remainder(shares: np.ndarray, total: int) -> np.ndarray:
    """Integer apportionment of ``total`` by fractional shares; deterministic."""
    raw = shares * total
    counts = np.floor(raw).astype(int)
    deficit = total - counts.sum()
    if deficit > 0:
        order = np.argsort(-(raw - counts), kind="stable")
        counts[order[:deficit]] += 1
    return counts


def adasyn(matrix, labels, k: int = DEFAULT_K, seed: int = 0) -> ResampleResult:
    """ADASYN: per-minority-point synthetic budget proportional to the
    majority fraction among its k neighbors. Falls back to random
    oversampling when the matrix contains missing values."""
    X = np.asarray(matrix, dtype=float)
    y = np.asarray(labels)
    if np.isnan(X).any():
        logger.warning("adasyn: matrix contains missing values, falling back to ROS")
        ros = random_oversample(np.nan_to_num(X), y, seed)
        return ResampleResult(ros.matrix, ros.labels, fell_back=True, note="missing values")
    min_idx, maj_idx, min_label = _class_split(y)
    if len(min_idx) < 2:
        raise ContractViolation("adasyn requires at least two minority rows")
    n_extra = len(maj_idx) - len(min_idx)
    if n_extra == 0:
        return ResampleResult(X.copy(), y.copy())

    X_min = X[min_idx]
    k_all = min(k, len(X) - 1)
    nn_all = _knn(X_min, X, min(k_all + 1, len(X)), exclude_self=False)
    ratios = np.empty(len(min_idx))
    for i in range(len(min_idx)):
        neigh = [j for j in nn_all[i] if j != min_idx[i]][:k_all]
        ratios[i] = sum(1 for j in neigh if y[j] != min_label) / k_all
    if ratios.sum() == 0.0:
        logger.warning("adasyn: no minority point has majority neighbors, returning input unchanged")
        return ResampleResult(X.copy(), y.copy(), note="no boundary points")
    budget = _largest_remainder(ratios / ratios.sum(), n_extra)

    k_eff = min(k, len(min_idx) - 1)
    nn_min = _knn(X_min, X_min, k_eff, exclude_self=True)
    rng = np.random.default_rng([seed, 3])
    base = np.repeat(np.arange(len(min_idx)), budget)
    synth = _interp_synthesize(X_min, nn_min, X_min, base, rng)
    X_out = np.vstack([X, synth])
    y_out = np.concatenate([y, np.full(n_extra, min_label, dtype=y.dtype)])
    return ResampleResult(X_out, y_out)


def build_variant(dev: Panel, pre: Preprocessor, outcome: str, kind: str,
                  seed: int, k: int = DEFAULT_K) -> ImbalanceVariant:
    """Materialize one imbalance treatment from Dev rows evaluable for
    ``outcome``. Passing any non-Dev row is a contract violation."""
    if kind not in VARIANT_KINDS:
        raise ContractViolation(f"unknown imbalance variant {kind!r}")
    if not all(s == "Dev" for s in dev.split):
        raise ContractViolation("imbalance variants accept only Dev-tagged rows")
    rows = dev.subset(dev.is_evaluable(outcome))
    if len(rows) == 0:
        raise ContractViolation(f"no evaluable development rows for {outcome}")
    X = transform(pre, rows)
    y = rows.label(outcome).astype(np.int8)
    mask = categorical_mask(pre)

    if kind == "weights":
        w_pos, w_neg = inverse_prevalence_weights(y)
        weights = np.where(y == 1, w_pos, w_neg)
        return ImbalanceVariant(kind, X, y, weights, mask, seed)
    if kind == "ros":
        res = random_oversample(X, y, seed)
    elif kind == "smotenc":
        res = smote_nc(X, y, mask, k=k, seed=seed)
    elif kind == "borderline":
        res = borderline_smote(X, y, k=k, seed=seed)
    else:
        res = adasyn(X, y, k=k, seed=seed)
    return ImbalanceVariant(kind, res.matrix, res.labels, None, mask, seed, fell_back=res.fell_back)
