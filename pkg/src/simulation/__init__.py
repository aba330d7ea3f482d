"""
Data generation and Monte Carlo verification of the oracle properties
"""
from .models import (
    AssumptionReport,
    DesignKind,
    ErrorDistribution,
    ErrorKind,
    OracleMetrics,
    RateLadder,
    ReplicationRecord,
    SimScenario,
)
from .dgp import assumption_report, generate, make_error_dist
from .harness import ks_distance, rate_ladder, run_replications

__all__ = [
    "AssumptionReport",
    "DesignKind",
    "ErrorDistribution",
    "ErrorKind",
    "OracleMetrics",
    "RateLadder",
    "ReplicationRecord",
    "SimScenario",
    "assumption_report",
    "generate",
    "make_error_dist",
    "ks_distance",
    "rate_ladder",
    "run_replications",
]
