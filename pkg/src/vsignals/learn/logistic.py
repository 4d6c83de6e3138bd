"""L2-regularized logistic regression fit by Newton's method.

Features are standardized internally (weighted means/sds, stored on the
model); the exposed coefficients are on the raw feature scale, so
prediction is sigmoid(intercept + x . coefficients). The intercept is not
penalized. Rows are canonicalized before fitting, so integer-weighted and
duplicated-row fits coincide.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractViolation
from .gbdt import _sigmoid, canonicalize_rows


@dataclass
class LogisticConfig:
    l2_lambda: float = 1.0
    max_iter: int = 100
    tol: float = 1e-8


@dataclass
class LogisticModel:
    coefficients: np.ndarray
    intercept: float
    l2_lambda: float
    fitted_means: np.ndarray = field(default_factory=lambda: np.empty(0))
    fitted_sds: np.ndarray = field(default_factory=lambda: np.empty(0))
    converged: bool = True
    n_iter: int = 0

    @property
    def n_features(self) -> int:
        return len(self.coefficients)


def nll_and_grad(beta: np.ndarray, X: np.ndarray, y: np.ndarray, w: np.ndarray,
                 l2_lambda: float) -> tuple[float, np.ndarray]:
    """Weighted negative log-likelihood plus (lambda/2)||beta[1:]||^2, with
    gradient; beta[0] is the unpenalized intercept."""
    z = beta[0] + X @ beta[1:]
    p = _sigmoid(z)
    eps = 1e-12
    nll = float(-(w * (y * np.log(np.clip(p, eps, None))
                       + (1.0 - y) * np.log(np.clip(1.0 - p, eps, None)))).sum())
    nll += 0.5 * l2_lambda * float(beta[1:] @ beta[1:])
    resid = w * (p - y)
    grad = np.empty_like(beta)
    grad[0] = resid.sum()
    grad[1:] = X.T @ resid + l2_lambda * beta[1:]
    return nll, grad


def fit_logistic(matrix, labels, weights=None, config: LogisticConfig | None = None) -> LogisticModel:
    cfg = config or LogisticConfig()
    X_in = np.asarray(matrix, dtype=float)
    y_in = np.asarray(labels, dtype=float)
    w_in = np.ones(len(y_in)) if weights is None else np.asarray(weights, dtype=float)
    if not np.isfinite(X_in).all():
        raise ContractViolation("fit_logistic requires finite inputs")
    X, y, w = canonicalize_rows(X_in, y_in, w_in)

    w_total = w.sum()
    mu = (w[:, None] * X).sum(axis=0) / w_total
    var = (w[:, None] * (X - mu) ** 2).sum(axis=0) / w_total
    sd = np.sqrt(var)
    sd[sd == 0.0] = 1.0
    Z = (X - mu) / sd

    beta = np.zeros(X.shape[1] + 1)
    converged = False
    n_iter = 0
    penalty = np.full(len(beta), cfg.l2_lambda)
    penalty[0] = 0.0
    for n_iter in range(1, cfg.max_iter + 1):
        z = beta[0] + Z @ beta[1:]
        p = _sigmoid(z)
        resid = w * (p - y)
        grad = np.empty_like(beta)
        grad[0] = resid.sum()
        grad[1:] = Z.T @ resid + cfg.l2_lambda * beta[1:]
        if np.abs(grad).max() < cfg.tol:
            converged = True
            break
        d = w * p * (1.0 - p)
        Za = np.column_stack([np.ones(len(Z)), Z])
        hess = Za.T @ (d[:, None] * Za) + np.diag(penalty)
        beta = beta - np.linalg.solve(hess, grad)
    else:
        n_iter = cfg.max_iter

    coef_raw = beta[1:] / sd
    intercept_raw = float(beta[0] - (beta[1:] * mu / sd).sum())
    return LogisticModel(coefficients=coef_raw, intercept=intercept_raw,
                         l2_lambda=cfg.l2_lambda, fitted_means=mu, fitted_sds=sd,
                         converged=converged, n_iter=n_iter)


def predict_logistic(model: LogisticModel, matrix) -> np.ndarray:
    X = np.asarray(matrix, dtype=float)
    return _sigmoid(model.intercept + X @ model.coefficients)
