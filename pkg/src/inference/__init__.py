"""
Asymptotic inference for the selected coefficients
"""
from .asymptotics import (
    AsymptoticContext,
    ConfidenceInterval,
    SigmaEstimate,
    asymptotic_variance,
    confidence_interval,
    estimate_f0,
    oracle_linearization,
    sigma_hat,
    standardized_stat,
)

__all__ = [
    "AsymptoticContext",
    "ConfidenceInterval",
    "SigmaEstimate",
    "asymptotic_variance",
    "confidence_interval",
    "estimate_f0",
    "oracle_linearization",
    "sigma_hat",
    "standardized_stat",
]
