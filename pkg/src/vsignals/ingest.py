"""Parse raw round / patent / exit / firm CSV files into validated event streams.

Rows with an empty organization id are dropped, duplicate round ids are
removed (first occurrence kept), and malformed rows are rejected with their
line number instead of aborting the parse. All drop and reject counts are
collected in a :class:`ParseReport`.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import date
from importlib import resources
from pathlib import Path

STAGES = ("Early", "Mid", "Late", "Other")

EXIT_KINDS = ("IPO", "Acquisition")

ROUNDS_HEADER = ["org_id", "round_id", "announced_on", "raised_usd", "investor_count", "investment_type"]
PATENTS_HEADER = ["org_id", "grant_date", "forward_citations"]
EXITS_HEADER = ["org_id", "exit_date", "kind"]
FIRMS_HEADER = ["org_id", "founded_on", "industry", "region"]


@dataclass(frozen=True)
class FundingEvent:
    org_id: str
    round_id: str
    announced_on: date
    raised_usd: float | None
    investor_count: int | None
    investment_type: str
    stage: str


@dataclass(frozen=True)
class PatentGrant:
    org_id: str
    grant_date: date
    forward_citations: int


@dataclass(frozen=True)
class ExitEvent:
    org_id: str
    exit_date: date
    kind: str


@dataclass(frozen=True)
class FirmRecord:
    org_id: str
    founded_on: date | None
    industry: str
    region: str


@dataclass
class ParseReport:
    dropped_missing_org: int = 0
    deduped_rounds: int = 0
    rejected: list[tuple[str, int, str]] = field(default_factory=list)

    def reject(self, filename: str, line: int, reason: str) -> None:
        self.rejected.append((filename, line, reason))


def load_stage_map(path: str | Path | None = None) -> dict[str, str]:
    """Investment-type -> stage lookup from the shipped (or a user) config file."""
    if path is None:
        raw = resources.files("vsignals.data").joinpath("stage_map.json").read_text("utf-8")
    else:
        raw = Path(path).read_text("utf-8")
    table = json.loads(raw)
    mapping: dict[str, str] = {}
    for stage, labels in table.items():
        if stage not in STAGES:
            raise ValueError(f"unknown stage bucket in mapping file: {stage}")
        for label in labels:
            mapping[_norm_type(label)] = stage
    return mapping


_DEFAULT_STAGE_MAP: dict[str, str] | None = None


def _norm_type(investment_type: str) -> str:
    return investment_type.strip().lower().replace("-", "_").replace(" ", "_")


def classify_stage(investment_type: str, mapping: dict[str, str] | None = None) -> str:
    """Total, deterministic mapping of free-text round labels to the four stage buckets."""
    global _DEFAULT_STAGE_MAP
    if mapping is None:
        if _DEFAULT_STAGE_MAP is None:
            _DEFAULT_STAGE_MAP = load_stage_map()
        mapping = _DEFAULT_STAGE_MAP
    return mapping.get(_norm_type(investment_type), "Other")


def _parse_date(text: str) -> date:
    return date.fromisoformat(text.strip())


def _read_rows(path: str | Path, expected_header: list[str]):
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != expected_header:
            raise ValueError(f"{path}: expected header {expected_header}, got {header}")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(cell.strip() == "" for cell in row):
                continue
            yield line_no, row


def parse_rounds(path: str | Path, report: ParseReport, stage_map: dict[str, str] | None = None) -> list[FundingEvent]:
    name = str(path)
    events: list[FundingEvent] = []
    seen_round_ids: set[str] = set()
    for line_no, row in _read_rows(path, ROUNDS_HEADER):
        if len(row) != len(ROUNDS_HEADER):
            report.reject(name, line_no, "wrong column count")
            continue
        org_id, round_id, announced_on, raised_usd, investor_count, investment_type = [c.strip() for c in row]
        if not org_id:
            report.dropped_missing_org += 1
            continue
        if round_id in seen_round_ids:
            report.deduped_rounds += 1
            continue
        try:
            announced = _parse_date(announced_on)
        except ValueError:
            report.reject(name, line_no, f"malformed date {announced_on!r}")
            continue
        raised: float | None = None
        if raised_usd:
            try:
                raised = float(raised_usd)
            except ValueError:
                report.reject(name, line_no, f"malformed amount {raised_usd!r}")
                continue
            if raised < 0:
                report.reject(name, line_no, "negative raised_usd")
                continue
        investors: int | None = None
        if investor_count:
            try:
                investors = int(investor_count)
            except ValueError:
                report.reject(name, line_no, f"malformed investor_count {investor_count!r}")
                continue
            if investors < 0:
                report.reject(name, line_no, "negative investor_count")
                continue
        seen_round_ids.add(round_id)
        events.append(FundingEvent(org_id, round_id, announced, raised, investors,
                                   investment_type, classify_stage(investment_type, stage_map)))
    return events


def parse_patents(path: str | Path, report: ParseReport) -> list[PatentGrant]:
    name = str(path)
    grants: list[PatentGrant] = []
    for line_no, row in _read_rows(path, PATENTS_HEADER):
        if len(row) != len(PATENTS_HEADER):
            report.reject(name, line_no, "wrong column count")
            continue
        org_id, grant_date, cites = [c.strip() for c in row]
        if not org_id:
            report.dropped_missing_org += 1
            continue
        try:
            granted = _parse_date(grant_date)
        except ValueError:
            report.reject(name, line_no, f"malformed date {grant_date!r}")
            continue
        try:
            n_cites = int(cites) if cites else 0
        except ValueError:
            report.reject(name, line_no, f"malformed forward_citations {cites!r}")
            continue
        if n_cites < 0:
            report.reject(name, line_no, "negative forward_citations")
            continue
        grants.append(PatentGrant(org_id, granted, n_cites))
    return grants


def parse_exits(path: str | Path, report: ParseReport) -> list[ExitEvent]:
    name = str(path)
    kind_lookup = {"ipo": "IPO", "acquisition": "Acquisition", "acquired": "Acquisition"}
    exits: list[ExitEvent] = []
    for line_no, row in _read_rows(path, EXITS_HEADER):
        if len(row) != len(EXITS_HEADER):
            report.reject(name, line_no, "wrong column count")
            continue
        org_id, exit_date, kind = [c.strip() for c in row]
        if not org_id:
            report.dropped_missing_org += 1
            continue
        try:
            exited = _parse_date(exit_date)
        except ValueError:
            report.reject(name, line_no, f"malformed date {exit_date!r}")
            continue
        normalized = kind_lookup.get(kind.lower())
        if normalized is None:
            report.reject(name, line_no, f"unknown exit kind {kind!r}")
            continue
        exits.append(ExitEvent(org_id, exited, normalized))
    return exits


def parse_firms(path: str | Path, report: ParseReport) -> list[FirmRecord]:
    name = str(path)
    firms: list[FirmRecord] = []
    seen: set[str] = set()
    for line_no, row in _read_rows(path, FIRMS_HEADER):
        if len(row) != len(FIRMS_HEADER):
            report.reject(name, line_no, "wrong column count")
            continue
        org_id, founded_on, industry, region = [c.strip() for c in row]
        if not org_id:
            report.dropped_missing_org += 1
            continue
        if org_id in seen:
            report.reject(name, line_no, f"duplicate org_id {org_id!r}")
            continue
        founded: date | None = None
        if founded_on:
            try:
                founded = _parse_date(founded_on)
            except ValueError:
                report.reject(name, line_no, f"malformed date {founded_on!r}")
                continue
        seen.add(org_id)
        firms.append(FirmRecord(org_id, founded, industry, region))
    return firms


def parse_events(rounds_path: str | Path, patents_path: str | Path, exits_path: str | Path,
                 firms_path: str | Path, stage_map: dict[str, str] | None = None,
                 ) -> tuple[list[FundingEvent], list[PatentGrant], list[ExitEvent], list[FirmRecord], ParseReport]:
    """Parse all four event files; returns events plus the drop/dedup/reject report."""
    report = ParseReport()
    rounds = parse_rounds(rounds_path, report, stage_map)
    patents = parse_patents(patents_path, report)
    exits = parse_exits(exits_path, report)
    firms = parse_firms(firms_path, report)
    return rounds, patents, exits, firms, report


def earliest_exits(exits: list[ExitEvent]) -> dict[str, ExitEvent]:
    """One exit per firm: the earliest by date (stable on ties)."""
    best: dict[str, ExitEvent] = {}
    for ev in exits:
        cur = best.get(ev.org_id)
        if cur is None or ev.exit_date < cur.exit_date:
            best[ev.org_id] = ev
    return best


def _write_csv(path: str | Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_rounds(path: str | Path, events: list[FundingEvent]) -> None:
    from ._util import fmt_value
    _write_csv(path, ROUNDS_HEADER,
               ((e.org_id, e.round_id, e.announced_on.isoformat(), fmt_value(e.raised_usd),
                 "" if e.investor_count is None else e.investor_count, e.investment_type)
                for e in events))


def write_patents(path: str | Path, grants: list[PatentGrant]) -> None:
    _write_csv(path, PATENTS_HEADER,
               ((g.org_id, g.grant_date.isoformat(), g.forward_citations) for g in grants))


def write_exits(path: str | Path, exits: list[ExitEvent]) -> None:
    _write_csv(path, EXITS_HEADER,
               ((e.org_id, e.exit_date.isoformat(), e.kind) for e in exits))


def write_firms(path: str | Path, firms: list[FirmRecord]) -> None:
    _write_csv(path, FIRMS_HEADER,
               ((f.org_id, "" if f.founded_on is None else f.founded_on.isoformat(), f.industry, f.region)
                for f in firms))
