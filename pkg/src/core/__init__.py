"""
Core data types and the quantile check loss
"""
from .models import CoefficientVector, Dataset, IndexSet, QuantileLevel, TauLike, as_coefficients, tau_value
from .loss import (
    check_loss,
    knight_decompose,
    loss_value,
    mean_check_loss,
    objective,
    partial_residuals,
    residuals,
    rho,
)

__all__ = [
    "CoefficientVector",
    "Dataset",
    "IndexSet",
    "QuantileLevel",
    "TauLike",
    "as_coefficients",
    "tau_value",
    "check_loss",
    "knight_decompose",
    "loss_value",
    "mean_check_loss",
    "objective",
    "partial_residuals",
    "residuals",
    "rho",
]
