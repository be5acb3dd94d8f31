"""Python bindings for the lswn white-noise test.

Panels are numpy arrays of shape (n, N, p): time, grid point, coordinate.
"""

import json

from ._lswn import (
    LswnError,
    estimate_mean,
    g_sum_oracle,
    gcv_bandwidth,
    load_panel,
    q_statistic,
    rule_gap,
    rule_lags,
    save_panel,
    simulate,
)
from ._lswn import run_test as _run_test

__all__ = [
    "LswnError",
    "estimate_mean",
    "g_sum_oracle",
    "gcv_bandwidth",
    "load_panel",
    "q_statistic",
    "rule_gap",
    "rule_lags",
    "run_test",
    "save_panel",
    "simulate",
]
__version__ = "0.1.0"


def run_test(values, **options):
    """Run the test on a panel and return the result as a dict.

    Keyword options mirror the CLI: b, tau, s_n, M_n, L (None = automatic),
    B, alpha, kernel, seed, jobs, keep_draws.
    """
    return json.loads(_run_test(values, **options))
