"""Seeded synthetic event generator with planted, tunable signal.

A discrete monthly simulation emits funding rounds whose hazard decays with
time since the last round (recency) and rises with recent round count
(momentum), patent grants whose arrival rate mean-reverts in existing stock
and age, and exits whose hazard grows with cumulative capital and investor
breadth. Everything is a pure function of (config, seed): per-firm RNG
streams make output byte-stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from ._util import add_months
from .errors import ConfigError
from .ingest import (ExitEvent, FirmRecord, FundingEvent, PatentGrant,
                     classify_stage, write_exits, write_firms, write_patents, write_rounds)

INDUSTRIES = ("Software", "Biotech", "Consumer", "Hardware", "Fintech", "Energy")
REGIONS = ("CA", "MA", "NY", "WA", "TX", "CO")

_ROUND_LADDER = ("seed", "series_a", "series_b", "series_c", "series_d", "series_e")
_ODD_TYPES = ("grant", "debt", "angel", "corporate_round")


@dataclass(frozen=True)
class SynthConfig:
    n_firms: int = 5000
    start: date = date(2010, 1, 1)
    end: date = date(2023, 12, 31)
    seed: int = 7
    # monthly funding hazard: base + recency_boost*exp(-months_idle/recency_halflife)
    #                              + momentum_boost*min(rounds_last_12m,3)/3
    fund_base: float = 0.007
    fund_recency_boost: float = 0.075
    fund_recency_halflife: float = 9.0
    fund_momentum_boost: float = 0.012
    # monthly patent rate: patent_base * exp(-stock/patent_stock_scale) * exp(-age_years/patent_age_scale)
    patent_base: float = 0.022
    patent_stock_scale: float = 2.5
    patent_age_scale: float = 6.0
    # monthly exit hazard: exit_base + exit_capital_boost*log1p(cum_raised/1e6)/8
    #                               + exit_investor_boost*min(cum_investors,20)/20
    exit_base: float = 0.00025
    exit_capital_boost: float = 0.006
    exit_investor_boost: float = 0.005
    ipo_share: float = 0.3
    round_size_median_usd: float = 1.76e6
    round_size_sigma: float = 1.6
    missing_founded_rate: float = 0.15
    missing_amount_rate: float = 0.10
    missing_investors_rate: float = 0.05


def _month_index(d: date, start: date) -> int:
    return (d.year - start.year) * 12 + (d.month - start.month)


def _month_start(start: date, idx: int) -> date:
    return add_months(date(start.year, start.month, 1), idx)


def _days_in_month(d: date) -> int:
    nxt = add_months(date(d.year, d.month, 1), 1)
    return (nxt - date(d.year, d.month, 1)).days


def _simulate_firm(cfg: SynthConfig, firm_idx: int, n_months: int):
    rng = np.random.default_rng([cfg.seed, firm_idx])
    org_id = f"org{firm_idx:06d}"

    # founding spread over all but the last two years so late windows stay populated
    found_month = int(rng.integers(0, max(1, n_months - 24)))
    founded = _month_start(cfg.start, found_month)
    founded = founded + timedelta(days=int(rng.integers(0, _days_in_month(founded))))
    founded_on = None if rng.random() < cfg.missing_founded_rate else founded
    firm = FirmRecord(org_id, founded_on,
                      INDUSTRIES[int(rng.integers(0, len(INDUSTRIES)))],
                      REGIONS[int(rng.integers(0, len(REGIONS)))])

    horizon = n_months - found_month
    u_fund = rng.random(horizon)
    u_patent = rng.random(horizon)
    u_exit = rng.random(horizon)

    rounds: list[FundingEvent] = []
    patents: list[PatentGrant] = []
    exit_event: ExitEvent | None = None

    round_months: list[int] = []
    patent_stock = 0
    cum_raised = 0.0
    cum_investors = 0
    n_rounds = 0

    for step in range(horizon):
        month = found_month + step
        month_start = _month_start(cfg.start, month)
        days = _days_in_month(month_start)

        idle = month - round_months[-1] if round_months else step
        recent = sum(1 for m in round_months if month - m < 12)
        h_fund = (cfg.fund_base
                  + cfg.fund_recency_boost * math.exp(-idle / cfg.fund_recency_halflife)
                  + cfg.fund_momentum_boost * min(recent, 3) / 3.0)
        if u_fund[step] < min(h_fund, 0.9):
            day = month_start + timedelta(days=int(rng.integers(0, days)))
            if rng.random() < 0.06:
                itype = _ODD_TYPES[int(rng.integers(0, len(_ODD_TYPES)))]
            else:
                itype = _ROUND_LADDER[min(n_rounds, len(_ROUND_LADDER) - 1)]
            raised = float(rng.lognormal(math.log(cfg.round_size_median_usd), cfg.round_size_sigma))
            investors = 1 + int(rng.poisson(0.8))
            raised_out = None if rng.random() < cfg.missing_amount_rate else raised
            investors_out = None if rng.random() < cfg.missing_investors_rate else investors
            rounds.append(FundingEvent(org_id, f"{org_id}-r{n_rounds:03d}", day, raised_out,
                                       investors_out, itype, classify_stage(itype)))
            round_months.append(month)
            n_rounds += 1
            cum_raised += raised
            cum_investors += investors

        age_years = month / 12.0 - found_month / 12.0
        h_patent = (cfg.patent_base
                    * math.exp(-patent_stock / cfg.patent_stock_scale)
                    * math.exp(-age_years / cfg.patent_age_scale))
        if u_patent[step] < h_patent:
            day = month_start + timedelta(days=int(rng.integers(0, days)))
            patents.append(PatentGrant(org_id, day, int(rng.poisson(2.0))))
            patent_stock += 1

        h_exit = (cfg.exit_base
                  + cfg.exit_capital_boost * math.log1p(cum_raised / 1e6) / 8.0
                  + cfg.exit_investor_boost * min(cum_investors, 20) / 20.0)
        if u_exit[step] < min(h_exit, 0.5):
            day = month_start + timedelta(days=int(rng.integers(0, days)))
            kind = "IPO" if rng.random() < cfg.ipo_share else "Acquisition"
            exit_event = ExitEvent(org_id, day, kind)
            break

    return firm, rounds, patents, exit_event


def generate_events(cfg: SynthConfig) -> tuple[list[FundingEvent], list[PatentGrant], list[ExitEvent], list[FirmRecord]]:
    """Simulate the full firm population; deterministic in (config, seed)."""
    if cfg.end < cfg.start:
        raise ConfigError(f"degenerate date range: end {cfg.end} < start {cfg.start}")
    if cfg.n_firms <= 0:
        raise ConfigError("n_firms must be positive")
    n_months = _month_index(cfg.end, cfg.start) + 1

    rounds: list[FundingEvent] = []
    patents: list[PatentGrant] = []
    exits: list[ExitEvent] = []
    firms: list[FirmRecord] = []
    for i in range(cfg.n_firms):
        firm, f_rounds, f_patents, f_exit = _simulate_firm(cfg, i, n_months)
        firms.append(firm)
        rounds.extend(f_rounds)
        patents.extend(f_patents)
        if f_exit is not None:
            exits.append(f_exit)
    return rounds, patents, exits, firms


def write_dataset(cfg: SynthConfig, out_dir: str | Path) -> dict[str, Path]:
    """Generate and write the four ingest-schema CSVs under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rounds, patents, exits, firms = generate_events(cfg)
    paths = {
        "rounds": out / "rounds.csv",
        "patents": out / "patents.csv",
        "exits": out / "exits.csv",
        "firms": out / "firms.csv",
    }
    write_rounds(paths["rounds"], rounds)
    write_patents(paths["patents"], patents)
    write_exits(paths["exits"], exits)
    write_firms(paths["firms"], firms)
    return paths


def without_planted_funding_signal(cfg: SynthConfig) -> SynthConfig:
    """Copy of ``cfg`` with a state-independent funding hazard (null model)."""
    return replace(cfg, fund_recency_boost=0.0, fund_momentum_boost=0.0)
