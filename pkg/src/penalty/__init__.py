"""
Seamless-L0 penalty package
"""
from .selo import (
    LOG2,
    SeloTuning,
    shape_difference_bound,
    penalty_derivative,
    penalty_shape,
    penalty_total,
    penalty_value,
)

__all__ = [
    "LOG2",
    "SeloTuning",
    "shape_difference_bound",
    "penalty_derivative",
    "penalty_shape",
    "penalty_total",
    "penalty_value",
]
