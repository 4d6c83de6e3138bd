"""Firm-quarter panel construction.

One row per firm per calendar quarter, from the quarter of first activity
(or founding) through the quarter strictly before the earliest exit, capped
at ``panel_end``. Features use only events dated on or before the row's
quarter end; labels look strictly forward; evaluability flags mark rows
whose full horizon fits inside the panel.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from . import HORIZON_MONTHS, OUTCOMES
from ._util import add_months, add_quarters, fmt_value, quarter_end_of, require_quarter_end
from .errors import ConfigError
from .ingest import ExitEvent, FirmRecord, FundingEvent, PatentGrant, earliest_exits

FEATURES = (
    "age_years", "days_since_last_round", "rounds_this_q", "investors_this_q",
    "raised_this_q_usd", "rounds_last_4q", "funding_last_4q_usd", "cum_rounds",
    "cum_investors", "cum_raised_usd", "cum_early", "cum_mid", "cum_late",
    "cum_other", "total_patents", "total_cites",
)

SPLITS = ("Dev", "Holdout", "Final")

LABEL_COLUMNS = tuple(f"label_{o}" for o in OUTCOMES)
EVALUABLE_COLUMNS = ("evaluable_12m", "evaluable_24m", "evaluable_36m")

DEFAULT_PANEL_END = date(2023, 12, 31)

_STAGE_FEATURE = {"Early": "cum_early", "Mid": "cum_mid", "Late": "cum_late", "Other": "cum_other"}


@dataclass(frozen=True)
class FirmQuarterRow:
    org_id: str
    quarter_end: date
    features: np.ndarray  # 16 values in FEATURES order, NaN = missing
    label_fund_12m: int
    label_patent_24m: int
    label_exit_36m: int
    evaluable_12m: bool
    evaluable_24m: bool
    evaluable_36m: bool
    split: str


@dataclass
class Panel:
    """Columnar firm-quarter panel; rows sorted by (org_id, quarter_end)."""

    org_id: np.ndarray          # object
    quarter_end: np.ndarray     # datetime64[D]
    X: np.ndarray               # (n, 16) float64, NaN = missing
    labels: np.ndarray          # (n, 3) int8, OUTCOMES order
    evaluable: np.ndarray       # (n, 3) bool, OUTCOMES order
    split: np.ndarray           # object, one of SPLITS

    def __len__(self) -> int:
        return len(self.org_id)

    def subset(self, mask: np.ndarray) -> "Panel":
        return Panel(self.org_id[mask], self.quarter_end[mask], self.X[mask],
                     self.labels[mask], self.evaluable[mask], self.split[mask])

    def copy(self) -> "Panel":
        return Panel(self.org_id.copy(), self.quarter_end.copy(), self.X.copy(),
                     self.labels.copy(), self.evaluable.copy(), self.split.copy())

    def years(self) -> np.ndarray:
        return self.quarter_end.astype("datetime64[Y]").astype(int) + 1970

    def label(self, outcome: str) -> np.ndarray:
        return self.labels[:, OUTCOMES.index(outcome)]

    def is_evaluable(self, outcome: str) -> np.ndarray:
        return self.evaluable[:, OUTCOMES.index(outcome)]

    def rows(self):
        for i in range(len(self)):
            yield FirmQuarterRow(
                self.org_id[i], self.quarter_end[i].astype(date), self.X[i],
                int(self.labels[i, 0]), int(self.labels[i, 1]), int(self.labels[i, 2]),
                bool(self.evaluable[i, 0]), bool(self.evaluable[i, 1]), bool(self.evaluable[i, 2]),
                self.split[i])


@dataclass
class PanelReport:
    n_firms: int = 0
    n_skipped_firms: int = 0
    n_rows: int = 0
    n_dropped_pre_window: int = 0


def build_calendar(firm: FirmRecord, rounds: list[FundingEvent], patents: list[PatentGrant],
                   exit_event: ExitEvent | None, panel_end: date = DEFAULT_PANEL_END) -> list[date]:
    """Quarter-end dates for one firm; empty when there is nothing to anchor on."""
    require_quarter_end(panel_end)
    anchors = [e.announced_on for e in rounds] + [p.grant_date for p in patents]
    if exit_event is not None:
        anchors.append(exit_event.exit_date)
    if firm.founded_on is not None:
        anchors.append(firm.founded_on)
    if not anchors:
        return []
    first = quarter_end_of(min(anchors))
    last = panel_end
    if exit_event is not None:
        before_exit = add_quarters(quarter_end_of(exit_event.exit_date), -1)
        last = min(last, before_exit)
    out = []
    q = first
    while q <= last:
        out.append(q)
        q = add_quarters(q, 1)
    return out


def _firm_arrays(rounds: list[FundingEvent], patents: list[PatentGrant]):
    rounds = sorted(rounds, key=lambda e: (e.announced_on, e.round_id))
    patents = sorted(patents, key=lambda p: p.grant_date)
    r_ord = np.array([e.announced_on.toordinal() for e in rounds], dtype=np.int64)
    raised = np.array([0.0 if e.raised_usd is None else e.raised_usd for e in rounds])
    investors = np.array([0 if e.investor_count is None else e.investor_count for e in rounds], dtype=np.int64)
    stage_cums = {}
    for stage, feat in _STAGE_FEATURE.items():
        flags = np.array([1 if e.stage == stage else 0 for e in rounds], dtype=np.int64)
        stage_cums[feat] = np.concatenate([[0], np.cumsum(flags)])
    p_ord = np.array([p.grant_date.toordinal() for p in patents], dtype=np.int64)
    cites = np.array([p.forward_citations for p in patents], dtype=np.int64)
    return {
        "r_ord": r_ord,
        "cum_raised": np.concatenate([[0.0], np.cumsum(raised)]),
        "cum_investors": np.concatenate([[0], np.cumsum(investors)]),
        "stage_cums": stage_cums,
        "p_ord": p_ord,
        "cum_cites": np.concatenate([[0], np.cumsum(cites)]),
    }


def _features_for_quarters(arrays, age_anchor: date, quarter_ends: list[date]) -> np.ndarray:
    n = len(quarter_ends)
    qe = np.array([q.toordinal() for q in quarter_ends], dtype=np.int64)
    qe_prev = np.array([add_quarters(q, -1).toordinal() for q in quarter_ends], dtype=np.int64)
    qe_back4 = np.array([add_quarters(q, -4).toordinal() for q in quarter_ends], dtype=np.int64)

    r_ord = arrays["r_ord"]
    hi = np.searchsorted(r_ord, qe, side="right")
    lo_q = np.searchsorted(r_ord, qe_prev, side="right")
    lo_4q = np.searchsorted(r_ord, qe_back4, side="right")
    p_hi = np.searchsorted(arrays["p_ord"], qe, side="right")

    X = np.empty((n, len(FEATURES)))
    col = {name: i for i, name in enumerate(FEATURES)}
    X[:, col["age_years"]] = (qe - age_anchor.toordinal()) / 365.25
    dslr = np.full(n, np.nan)
    has_round = hi > 0
    dslr[has_round] = qe[has_round] - r_ord[hi[has_round] - 1]
    X[:, col["days_since_last_round"]] = dslr
    X[:, col["rounds_this_q"]] = hi - lo_q
    X[:, col["investors_this_q"]] = arrays["cum_investors"][hi] - arrays["cum_investors"][lo_q]
    X[:, col["raised_this_q_usd"]] = arrays["cum_raised"][hi] - arrays["cum_raised"][lo_q]
    X[:, col["rounds_last_4q"]] = hi - lo_4q
    X[:, col["funding_last_4q_usd"]] = arrays["cum_raised"][hi] - arrays["cum_raised"][lo_4q]
    X[:, col["cum_rounds"]] = hi
    X[:, col["cum_investors"]] = arrays["cum_investors"][hi]
    X[:, col["cum_raised_usd"]] = arrays["cum_raised"][hi]
    for feat, cums in arrays["stage_cums"].items():
        X[:, col[feat]] = cums[hi]
    X[:, col["total_patents"]] = p_hi
    X[:, col["total_cites"]] = arrays["cum_cites"][p_hi]
    return X


def _age_anchor(firm: FirmRecord, rounds, patents) -> date | None:
    if firm.founded_on is not None:
        return firm.founded_on
    dates = [e.announced_on for e in rounds] + [p.grant_date for p in patents]
    return min(dates) if dates else None


def compute_features(firm: FirmRecord, rounds: list[FundingEvent], patents: list[PatentGrant],
                     quarter_end: date) -> np.ndarray:
    """Feature vector for one firm-quarter; uses only events dated <= quarter_end."""
    anchor = _age_anchor(firm, rounds, patents)
    if anchor is None:
        raise ConfigError(f"firm {firm.org_id}: no events and no founding date")
    arrays = _firm_arrays(rounds, patents)
    return _features_for_quarters(arrays, anchor, [quarter_end])[0]


def _labels_for_quarters(arrays, exit_event: ExitEvent | None, quarter_ends: list[date],
                         panel_end: date):
    n = len(quarter_ends)
    labels = np.zeros((n, 3), dtype=np.int8)
    evaluable = np.zeros((n, 3), dtype=bool)
    qe = np.array([q.toordinal() for q in quarter_ends], dtype=np.int64)
    hi_r = np.searchsorted(arrays["r_ord"], qe, side="right")
    hi_p = np.searchsorted(arrays["p_ord"], qe, side="right")
    exit_ord = exit_event.exit_date.toordinal() if exit_event is not None else None
    for j, outcome in enumerate(OUTCOMES):
        months = HORIZON_MONTHS[outcome]
        bound = np.array([add_months(q, months).toordinal() for q in quarter_ends], dtype=np.int64)
        if outcome == "fund_12m":
            labels[:, j] = np.searchsorted(arrays["r_ord"], bound, side="right") > hi_r
        elif outcome == "patent_24m":
            labels[:, j] = np.searchsorted(arrays["p_ord"], bound, side="right") > hi_p
        else:
            if exit_ord is not None:
                labels[:, j] = (exit_ord > qe) & (exit_ord <= bound)
        evaluable[:, j] = bound <= panel_end.toordinal()
    return labels, evaluable


def attach_labels(row: FirmQuarterRow, rounds: list[FundingEvent], patents: list[PatentGrant],
                  exit_event: ExitEvent | None, panel_end: date = DEFAULT_PANEL_END) -> FirmQuarterRow:
    """Strictly-forward labels plus evaluability flags for one row."""
    arrays = _firm_arrays(rounds, patents)
    labels, evaluable = _labels_for_quarters(arrays, exit_event, [row.quarter_end], panel_end)
    return FirmQuarterRow(row.org_id, row.quarter_end, row.features,
                          int(labels[0, 0]), int(labels[0, 1]), int(labels[0, 2]),
                          bool(evaluable[0, 0]), bool(evaluable[0, 1]), bool(evaluable[0, 2]),
                          row.split)


def assign_split(quarter_end: date) -> str | None:
    """Split tag by calendar year; None = before the panel window (drop)."""
    year = quarter_end.year
    if year < 2010:
        return None
    if year <= 2019:
        return "Dev"
    if year <= 2021:
        return "Holdout"
    return "Final"


def build_panel(firms: list[FirmRecord], rounds: list[FundingEvent], patents: list[PatentGrant],
                exits: list[ExitEvent], panel_end: date = DEFAULT_PANEL_END,
                ) -> tuple[Panel, PanelReport]:
    """Assemble the full panel; firms are processed independently and merged
    in (org_id, quarter_end) order so the result is deterministic."""
    require_quarter_end(panel_end)
    report = PanelReport(n_firms=len(firms))
    exit_by_firm = earliest_exits(exits)
    rounds_by_firm: dict[str, list[FundingEvent]] = {}
    for e in rounds:
        rounds_by_firm.setdefault(e.org_id, []).append(e)
    patents_by_firm: dict[str, list[PatentGrant]] = {}
    for p in patents:
        patents_by_firm.setdefault(p.org_id, []).append(p)

    org_col, qe_col, X_col, lab_col, ev_col, split_col = [], [], [], [], [], []
    for firm in sorted(firms, key=lambda f: f.org_id):
        f_rounds = rounds_by_firm.get(firm.org_id, [])
        f_patents = patents_by_firm.get(firm.org_id, [])
        f_exit = exit_by_firm.get(firm.org_id)
        calendar = build_calendar(firm, f_rounds, f_patents, f_exit, panel_end)
        splits = [assign_split(q) for q in calendar]
        report.n_dropped_pre_window += sum(1 for s in splits if s is None)
        keep = [i for i, s in enumerate(splits) if s is not None]
        calendar = [calendar[i] for i in keep]
        splits = [splits[i] for i in keep]
        if not calendar:
            report.n_skipped_firms += 1
            continue
        anchor = _age_anchor(firm, f_rounds, f_patents)
        arrays = _firm_arrays(f_rounds, f_patents)
        X = _features_for_quarters(arrays, anchor, calendar)
        labels, evaluable = _labels_for_quarters(arrays, f_exit, calendar, panel_end)
        org_col.extend([firm.org_id] * len(calendar))
        qe_col.extend(calendar)
        X_col.append(X)
        lab_col.append(labels)
        ev_col.append(evaluable)
        split_col.extend(splits)

    if not org_col:
        panel = Panel(np.empty(0, dtype=object), np.empty(0, dtype="datetime64[D]"),
                      np.empty((0, len(FEATURES))), np.empty((0, 3), dtype=np.int8),
                      np.empty((0, 3), dtype=bool), np.empty(0, dtype=object))
    else:
        panel = Panel(np.array(org_col, dtype=object),
                      np.array([q.isoformat() for q in qe_col], dtype="datetime64[D]"),
                      np.vstack(X_col), np.vstack(lab_col), np.vstack(ev_col),
                      np.array(split_col, dtype=object))
    report.n_rows = len(panel)
    return panel, report


PANEL_HEADER = ["org_id", "quarter_end", *FEATURES, *LABEL_COLUMNS, *EVALUABLE_COLUMNS, "split"]


def write_panel(panel: Panel, path: str | Path) -> None:
    """Write the contractual panel CSV (column order is fixed)."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(PANEL_HEADER)
        for i in range(len(panel)):
            row = [panel.org_id[i], str(panel.quarter_end[i])]
            row.extend(fmt_value(v) for v in panel.X[i])
            row.extend(int(v) for v in panel.labels[i])
            row.extend(int(v) for v in panel.evaluable[i])
            row.append(panel.split[i])
            writer.writerow(row)


def read_panel(path: str | Path) -> Panel:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != PANEL_HEADER:
            raise ConfigError(f"{path}: unexpected panel header")
        org, qe, X, labels, evaluable, split = [], [], [], [], [], []
        for row in reader:
            org.append(row[0])
            qe.append(row[1])
            X.append([float(v) if v != "" else np.nan for v in row[2:18]])
            labels.append([int(v) for v in row[18:21]])
            evaluable.append([bool(int(v)) for v in row[21:24]])
            split.append(row[24])
    n = len(org)
    return Panel(np.array(org, dtype=object), np.array(qe, dtype="datetime64[D]"),
                 np.array(X) if n else np.empty((0, len(FEATURES))),
                 np.array(labels, dtype=np.int8) if n else np.empty((0, 3), dtype=np.int8),
                 np.array(evaluable, dtype=bool) if n else np.empty((0, 3), dtype=bool),
                 np.array(split, dtype=object))
