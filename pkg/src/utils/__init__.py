"""
Utilities package
"""
from .errors import (
    SeloError, ContractViolation, DataError, UsageError,
    NumericalFailure, SingularMatrixError, NoFeasibleModelError, SimulationError
)

__all__ = [
    "SeloError",
    "ContractViolation",
    "DataError",
    "UsageError",
    "NumericalFailure",
    "SingularMatrixError",
    "NoFeasibleModelError",
    "SimulationError"
]
