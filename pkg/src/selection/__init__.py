"""
BIC tuning-parameter and model selection
"""
from .models import BicConfig, BicOrdering, BicScore, SelectionResult, SnPolicy
from .bic import bic_ordering_check, bic_score, default_grids, fit_restricted, select, sn_cap, sn_value

__all__ = [
    "BicConfig",
    "BicOrdering",
    "BicScore",
    "SelectionResult",
    "SnPolicy",
    "bic_ordering_check",
    "bic_score",
    "default_grids",
    "fit_restricted",
    "select",
    "sn_cap",
    "sn_value",
]
