"""
Seamless-L0 penalty: value, total, derivative and shape helpers
"""
import math
from typing import Union

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

from src.utils.errors import ContractViolation

LOG2 = math.log(2.0)

ArrayLike = Union[float, npt.ArrayLike]


class SeloTuning(BaseModel):
    """Penalty pair (lambda, gamma), both strictly positive and finite"""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lambda_: float = Field(alias="lambda", gt=0, allow_inf_nan=False)
    gamma: float = Field(gt=0, allow_inf_nan=False)

    @property
    def scale(self) -> float:
        """The lambda / log 2 factor in front of the penalty"""
        return self.lambda_ / LOG2

    def as_dict(self) -> dict:
        return {"lambda": self.lambda_, "gamma": self.gamma}


def _maybe_scalar(values: np.ndarray, like) -> Union[float, np.ndarray]:
    return float(values) if np.ndim(like) == 0 else values


def penalty_shape(b: ArrayLike, gamma: float) -> Union[float, np.ndarray]:
    """
    Penalty shape g(b) = log(1 + |b| / (|b| + gamma)), without the lambda/log 2 factor

    Uses log1p so tiny gamma does not lose precision.
    """
    a = np.abs(np.asarray(b, dtype=np.float64))
    return _maybe_scalar(np.log1p(a / (a + gamma)), b)


def penalty_value(b: ArrayLike, t: SeloTuning) -> Union[float, np.ndarray]:
    """
    Seamless-L0 penalty (lambda / log 2) * log(1 + |b| / (|b| + gamma))

    Args:
        b: Coefficient value (scalar or array, evaluated elementwise)
        t: Tuning pair

    Returns:
        Penalty in [0, lambda)
    """
    return _maybe_scalar(t.scale * np.asarray(penalty_shape(b, t.gamma)), b)


def penalty_total(beta: npt.ArrayLike, t: SeloTuning) -> float:
    """Sum of the penalty over every entry of beta"""
    beta = np.asarray(beta, dtype=np.float64)
    return float(np.sum(penalty_value(beta.ravel(), t)))


def penalty_derivative(b: ArrayLike, t: SeloTuning) -> Union[float, np.ndarray]:
    """
    Derivative of the penalty with respect to |b|

    (lambda / log 2) * gamma / ((|b| + gamma) * (2|b| + gamma)). At b = 0 this
    is the right limit (lambda / log 2) / gamma, which lets the reweighting
    loop bring exact zeros back in.
    """
    a = np.abs(np.asarray(b, dtype=np.float64))
    g = t.gamma
    return _maybe_scalar(t.scale * g / ((a + g) * (2.0 * a + g)), b)


def shape_difference_bound(c: float, gamma: float) -> float:
    """
    Lipschitz constant of the penalty shape away from the origin

    For |x1|, |x2| >= c the shape satisfies
    |g(x2) - g(x1)| <= K * gamma * ||x2| - |x1|| with K = 4 / c^2.
    """
    if c <= 0 or gamma <= 0:
        raise ContractViolation(f"c and gamma must be positive, got c={c}, gamma={gamma}")
    return 4.0 / (c * c) * gamma
