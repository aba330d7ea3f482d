"""
Exception hierarchy shared by the estimator, selection and CLI layers
"""
from typing import Optional


class SeloError(Exception):
    """Base class for all library errors"""


class ContractViolation(SeloError, ValueError):
    """A precondition of an operation does not hold"""


class DataError(SeloError, ValueError):
    """Input data cannot be used (parse failures, non-finite cells, bad shapes)"""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[int] = None):
        self.row = row
        self.column = column
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column {column}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class UsageError(SeloError, ValueError):
    """Command-line or configuration misuse"""


class NumericalFailure(SeloError, ArithmeticError):
    """A computation produced a non-finite or otherwise unusable value"""

    def __init__(
        self,
        message: str,
        iteration: Optional[int] = None,
        lambda_: Optional[float] = None,
        gamma: Optional[float] = None
    ):
        self.iteration = iteration
        self.lambda_ = lambda_
        self.gamma = gamma
        details = []
        if iteration is not None:
            details.append(f"iteration {iteration}")
        if lambda_ is not None:
            details.append(f"lambda={lambda_!r}")
        if gamma is not None:
            details.append(f"gamma={gamma!r}")
        if details:
            message = f"{message} [{', '.join(details)}]"
        super().__init__(message)

    def at_grid_cell(self, lambda_: float, gamma: float) -> "NumericalFailure":
        """Return a copy of this error with grid coordinates attached"""
        base = self.args[0].split(" [")[0] if self.args else str(self)
        return type(self)(base, iteration=self.iteration, lambda_=lambda_, gamma=gamma)


class SingularMatrixError(NumericalFailure):
    """An inverse was requested for a Gram matrix flagged as singular"""


class NoFeasibleModelError(NumericalFailure):
    """Every grid cell exceeds the model-size cap"""


class SimulationError(SeloError):
    """Too many replications of a scenario failed"""
