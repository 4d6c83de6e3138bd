"""Univariate diagnostics on evaluable development rows.

Signed AUC reports magnitude max(raw, 1-raw) with the sign of the
direction; signed PR-AUC scores the feature (negated when the sign is
negative) with average precision and reports the magnitude.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import OUTCOMES
from .errors import ContractViolation
from .metrics import auroc, pr_auc
from .panel import FEATURES, Panel
from .preprocess import Preprocessor, transform


@dataclass(frozen=True)
class ScreenResult:
    feature: str
    outcome: str
    auc_magnitude: float
    auc_sign: str            # "+" or "-"
    prauc_magnitude: float
    pearson: float
    degenerate: bool = False


def pearson_correlation(values, labels) -> tuple[float, bool]:
    """Pearson coefficient against a {0,1} label; (0.0, True) when degenerate."""
    x = np.asarray(values, dtype=float)
    y = np.asarray(labels, dtype=float)
    sx = x.std()
    sy = y.std()
    if sx == 0.0 or sy == 0.0:
        return 0.0, True
    r = float(((x - x.mean()) * (y - y.mean())).mean() / (sx * sy))
    return r, False


def signed_auc(values, labels) -> tuple[float, str, float]:
    """(auc_magnitude, sign, signed PR-AUC magnitude) for one feature."""
    x = np.asarray(values, dtype=float)
    y = np.asarray(labels, dtype=float)
    if y.min() == y.max():
        raise ContractViolation("signed_auc requires both classes")
    raw = auroc(x, y)
    sign = "+" if raw >= 0.5 else "-"
    magnitude = max(raw, 1.0 - raw)
    score = x if sign == "+" else -x
    prauc = pr_auc(score, y)
    return magnitude, sign, prauc


def screen_outcome(panel: Panel, pre: Preprocessor, outcome: str) -> list[ScreenResult]:
    """Per-feature diagnostics on Dev rows evaluable for ``outcome``."""
    mask = (panel.split == "Dev") & panel.is_evaluable(outcome)
    dev = panel.subset(mask)
    if len(dev) == 0:
        raise ContractViolation(f"no evaluable development rows for {outcome}")
    X = transform(pre, dev)
    y = dev.label(outcome).astype(float)
    results = []
    for j, name in enumerate(FEATURES):
        r, degenerate = pearson_correlation(X[:, j], y)
        if degenerate:
            results.append(ScreenResult(name, outcome, 0.5, "+", 0.0, 0.0, True))
            continue
        magnitude, sign, prauc = signed_auc(X[:, j], y)
        results.append(ScreenResult(name, outcome, magnitude, sign, prauc, r))
    return results


def screen_all(panel: Panel, pre: Preprocessor) -> list[ScreenResult]:
    out = []
    for outcome in OUTCOMES:
        out.extend(screen_outcome(panel, pre, outcome))
    return out


# Per-outcome modeling sets. Screening feeds the ranking, but the shipped
# sets are pinned (all 16 engineered features, in a fixed per-outcome
# order) so downstream column behavior is reproducible.
PINNED_FEATURE_SETS: dict[str, tuple[str, ...]] = {
    "fund_12m": (
        "age_years", "days_since_last_round", "rounds_last_4q", "cum_investors",
        "funding_last_4q_usd", "cum_raised_usd", "cum_rounds", "total_cites",
        "total_patents", "cum_early", "rounds_this_q", "investors_this_q",
        "raised_this_q_usd", "cum_mid", "cum_other", "cum_late",
    ),
    "patent_24m": (
        "age_years", "total_patents", "total_cites", "cum_rounds",
        "days_since_last_round", "cum_raised_usd", "cum_other", "cum_investors",
        "cum_early", "rounds_last_4q", "investors_this_q", "cum_mid",
        "rounds_this_q", "cum_late", "raised_this_q_usd", "funding_last_4q_usd",
    ),
    "exit_36m": (
        "cum_raised_usd", "cum_investors", "cum_rounds", "funding_last_4q_usd",
        "cum_late", "days_since_last_round", "cum_mid", "cum_other",
        "cum_early", "rounds_last_4q", "total_cites", "total_patents",
        "raised_this_q_usd", "investors_this_q", "rounds_this_q", "age_years",
    ),
}


def select_features(results: list[ScreenResult], always_keep: list[str],
                    outcome: str) -> list[str]:
    """Curated feature set for one outcome: the pinned ordering of all
    screened features, with always-keep names guaranteed present."""
    if not results and not always_keep:
        raise ContractViolation(f"select_features: empty feature set for {outcome}")
    pinned = PINNED_FEATURE_SETS[outcome]
    unknown = [f for f in always_keep if f not in pinned]
    if unknown:
        raise ContractViolation(f"select_features: unknown always_keep features {unknown}")
    return list(pinned)


SCREEN_HEADER = ["feature", "outcome", "pearson", "auc_signed", "prauc_magnitude"]


def write_screen_report(results: list[ScreenResult], path: str | Path) -> None:
    """screen_report.csv: one row per (feature, outcome) cell."""
    from ._util import fmt_value
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SCREEN_HEADER)
        for r in results:
            signed = r.auc_magnitude if r.auc_sign == "+" else -r.auc_magnitude
            writer.writerow([r.feature, r.outcome, fmt_value(r.pearson),
                             fmt_value(signed), fmt_value(r.prauc_magnitude)])
