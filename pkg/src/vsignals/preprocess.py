"""Development-only preprocessing: infinities to missing, NA indicators,
median imputation, and the persisted feature list that aligns columns
across every later stage.

Fitting touches nothing outside the development split; transform applies
the frozen state unchanged to any split.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import AlignmentError, ConfigError, ContractViolation, VersionError
from .panel import FEATURES, Panel

FEATURE_LIST_VERSION = 1

NA_SUFFIX = "__isna"

# indicator always created for this feature, regardless of missing rate
FORCED_NA_FLAGS = ("days_since_last_round",)

NA_RATE_THRESHOLD = 0.10


@dataclass
class Preprocessor:
    feature_order: list[str]
    medians: dict[str, float]
    na_flagged: list[str]
    fitted_on: dict = field(default_factory=dict)
    version: int = FEATURE_LIST_VERSION

    def __eq__(self, other) -> bool:
        if not isinstance(other, Preprocessor):
            return NotImplemented
        return (self.feature_order == other.feature_order
                and self.medians == other.medians
                and self.na_flagged == other.na_flagged
                and self.fitted_on == other.fitted_on
                and self.version == other.version)


def fit_preprocessor(dev: Panel, threshold: float = NA_RATE_THRESHOLD,
                     forced: tuple[str, ...] = FORCED_NA_FLAGS) -> Preprocessor:
    """Fit medians and NA-indicator flags on the development split only.

    Missing rates use development rows that are evaluable for at least one
    task; medians use every development row, after infinities are treated
    as missing.
    """
    if len(dev) == 0:
        raise ContractViolation("fit_preprocessor: empty development panel")
    if not all(s == "Dev" for s in dev.split):
        raise ContractViolation("fit_preprocessor accepts only Dev-tagged rows")

    X = dev.X.copy()
    X[~np.isfinite(X)] = np.nan

    rate_rows = dev.evaluable.any(axis=1)
    if not rate_rows.any():
        rate_rows = np.ones(len(dev), dtype=bool)
    miss_rate = np.isnan(X[rate_rows]).mean(axis=0)

    medians: dict[str, float] = {}
    for j, name in enumerate(FEATURES):
        col = X[:, j]
        observed = col[~np.isnan(col)]
        if observed.size == 0:
            raise ConfigError(f"feature {name!r} is entirely missing in development")
        medians[name] = float(np.median(observed))

    na_flagged = [name for j, name in enumerate(FEATURES)
                  if miss_rate[j] >= threshold or name in forced]
    feature_order = list(FEATURES) + [f"{name}{NA_SUFFIX}" for name in na_flagged]
    return Preprocessor(feature_order=feature_order, medians=medians, na_flagged=na_flagged,
                        fitted_on={"split": "Dev", "rows": int(len(dev))})


def _validate_order(pre: Preprocessor) -> None:
    base = pre.feature_order[:len(FEATURES)]
    if base != list(FEATURES):
        raise AlignmentError(f"feature list base columns do not match the panel contract: {base}")
    expected_tail = [f"{name}{NA_SUFFIX}" for name in FEATURES if name in pre.na_flagged]
    if pre.feature_order[len(FEATURES):] != expected_tail:
        raise AlignmentError("feature list indicator columns do not match na_flagged")
    missing_medians = [name for name in FEATURES if name not in pre.medians]
    if missing_medians:
        raise AlignmentError(f"medians missing for features: {missing_medians}")


def transform(pre: Preprocessor, panel: Panel) -> np.ndarray:
    """Imputed feature matrix in the persisted column order.

    Indicators are 1 where the underlying value was missing or infinite
    before imputation; missing values take the development medians.
    """
    _validate_order(pre)
    X = panel.X.astype(float, copy=True)
    bad = ~np.isfinite(X)
    X[bad] = np.nan
    out = np.empty((len(panel), len(pre.feature_order)))
    for j, name in enumerate(FEATURES):
        col = X[:, j].copy()
        col[bad[:, j]] = pre.medians[name]
        out[:, j] = col
    for k, name in enumerate(pre.na_flagged):
        out[:, len(FEATURES) + k] = bad[:, FEATURES.index(name)].astype(float)
    return out


def categorical_mask(pre: Preprocessor) -> np.ndarray:
    """Per-column mask over the transformed matrix: True for NA indicators."""
    return np.array([name.endswith(NA_SUFFIX) for name in pre.feature_order])


def save_feature_list(pre: Preprocessor, path: str | Path) -> None:
    """Byte-stable serialization of the fitted state."""
    payload = {
        "version": pre.version,
        "feature_order": pre.feature_order,
        "medians": {k: pre.medians[k] for k in sorted(pre.medians)},
        "na_flagged": pre.na_flagged,
        "fitted_on": pre.fitted_on,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def load_feature_list(path: str | Path) -> Preprocessor:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    version = payload.get("version")
    if version != FEATURE_LIST_VERSION:
        raise VersionError(f"feature list version {version!r} != supported {FEATURE_LIST_VERSION}")
    return Preprocessor(feature_order=list(payload["feature_order"]),
                        medians={k: float(v) for k, v in payload["medians"].items()},
                        na_flagged=list(payload["na_flagged"]),
                        fitted_on=dict(payload["fitted_on"]),
                        version=version)
