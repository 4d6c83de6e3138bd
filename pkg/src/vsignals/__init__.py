"""Leakage-safe firm-quarter outcome prediction pipeline.

Builds a quarterly panel from raw financing / patent / exit event streams,
fits development-only preprocessing, trains an in-repo model zoo under
class-imbalance treatments, and emits ranked out-of-time target lists with
interpretability and calibration diagnostics.
"""

__version__ = "0.1.0"

OUTCOMES = ("fund_12m", "patent_24m", "exit_36m")

# Prediction horizon in months, per outcome.
HORIZON_MONTHS = {"fund_12m": 12, "patent_24m": 24, "exit_36m": 36}

# Out-of-time evaluation split per outcome: only the 12-month label is
# observable in the final window; longer horizons are evaluated on holdout.
EVAL_SPLIT = {"fund_12m": "Final", "patent_24m": "Holdout", "exit_36m": "Holdout"}
