"""Date arithmetic, hashing, and CSV helpers used across stages."""

from __future__ import annotations

import calendar
import hashlib
import json
import math
from datetime import date
from pathlib import Path

from .errors import ConfigError

QUARTER_END_MONTHS = (3, 6, 9, 12)


def is_quarter_end(d: date) -> bool:
    return d.month in QUARTER_END_MONTHS and d.day == calendar.monthrange(d.year, d.month)[1]


def quarter_end_of(d: date) -> date:
    """Last day of the calendar quarter containing ``d``."""
    month = ((d.month - 1) // 3) * 3 + 3
    return date(d.year, month, calendar.monthrange(d.year, month)[1])


def quarter_start_of(d: date) -> date:
    month = ((d.month - 1) // 3) * 3 + 1
    return date(d.year, month, 1)


def add_months(d: date, months: int) -> date:
    """Shift ``d`` by ``months``, clamping the day to the target month length."""
    m = d.year * 12 + (d.month - 1) + months
    year, month = divmod(m, 12)
    month += 1
    day = min(d.day, calendar.monthrange(year, month)[1])
    return date(year, month, day)


def add_quarters(quarter_end: date, quarters: int) -> date:
    return quarter_end_of(add_months(quarter_start_of(quarter_end), 3 * quarters))


def require_quarter_end(d: date, what: str = "panel_end") -> date:
    if not is_quarter_end(d):
        raise ConfigError(f"{what} must be a calendar quarter boundary, got {d.isoformat()}")
    return d


def quarter_range(first: date, last: date) -> list[date]:
    """Quarter-end dates from the quarter of ``first`` through ``last`` inclusive."""
    out = []
    q = quarter_end_of(first)
    while q <= last:
        out.append(q)
        q = add_quarters(q, 1)
    return out


def fmt_value(x) -> str:
    """CSV cell formatting: missing -> empty, floats via shortest round-trip repr."""
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        if x == int(x) and abs(x) < 1e15:
            return str(int(x))
        return repr(x)
    return str(x)


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, no whitespace variance."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
