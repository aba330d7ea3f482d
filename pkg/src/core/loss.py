"""
Quantile check loss, objective evaluation and Knight's decomposition
"""
from typing import Tuple, Union

import numpy as np
import numpy.typing as npt

from src.core.models import CoefficientVector, Dataset, TauLike, as_coefficients, tau_value
from src.penalty.selo import SeloTuning, penalty_total
from src.utils.errors import ContractViolation

ArrayLike = Union[float, npt.ArrayLike]


def rho(u: np.ndarray, tau: float) -> np.ndarray:
    """Unchecked elementwise check loss on float arrays"""
    return u * (tau - (u < 0))


def check_loss(u: ArrayLike, tau: TauLike) -> Union[float, np.ndarray]:
    """
    Quantile check loss rho_tau(u) = u * (tau - 1{u < 0})

    Args:
        u: Residual value or array of residuals
        tau: Quantile level in (0, 1)

    Returns:
        Nonnegative loss, same shape as u
    """
    tau = tau_value(tau)
    values = rho(np.asarray(u, dtype=np.float64), tau)
    return float(values) if np.ndim(u) == 0 else values


def residuals(ds: Dataset, beta: CoefficientVector) -> np.ndarray:
    """y - X beta"""
    beta = as_coefficients(beta, ds.d)
    return ds.y - ds.X @ beta


def mean_check_loss(resid: npt.ArrayLike, tau: TauLike) -> float:
    """(1/n) * sum of rho_tau over the residuals"""
    resid = np.asarray(resid, dtype=np.float64)
    if resid.size == 0:
        raise ContractViolation("mean_check_loss needs at least one residual")
    return float(np.sum(rho(resid, tau_value(tau))) / resid.size)


def loss_value(ds: Dataset, beta: CoefficientVector, tau: TauLike) -> float:
    """Check-loss part of the objective, (1/(2n)) * sum_i rho_tau(y_i - X_i' beta)"""
    r = residuals(ds, beta)
    return float(np.sum(rho(r, tau_value(tau))) / (2.0 * ds.n))


def objective(ds: Dataset, beta: CoefficientVector, tau: TauLike, tuning: SeloTuning) -> float:
    """
    Penalized objective Q_n(beta) = loss_value + penalty_total

    Raises:
        ContractViolation: If beta does not have length d
    """
    return loss_value(ds, beta, tau) + penalty_total(beta, tuning)


def knight_decompose(x: ArrayLike, y: ArrayLike, tau: TauLike) -> Tuple:
    """
    Split rho(x - y) - rho(x) into y * (1{x <= 0} - tau) plus an integral term

    The integral of (1{x <= t} - 1{x <= 0}) over [0, y] is (y - x)_+ when
    x > 0, (x - y)_+ when x <= 0 and y < 0, and zero otherwise.

    Returns:
        (linear_term, integral_term), scalars or arrays following x and y
    """
    tau = tau_value(tau)
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)

    linear = ya * ((xa <= 0) - tau)
    integral = np.where(
        xa > 0,
        np.maximum(ya - xa, 0.0),
        np.where(ya < 0, np.maximum(xa - ya, 0.0), 0.0),
    )

    if np.ndim(x) == 0 and np.ndim(y) == 0:
        return float(linear), float(integral)
    return linear, integral


def partial_residuals(ds: Dataset, beta: CoefficientVector, j: int) -> np.ndarray:
    """
    Residuals with coordinate j left out, r_i = y_i - sum_{k != j} X_ik beta_k

    Raises:
        ContractViolation: If j is not a column index
    """
    if not (0 <= int(j) < ds.d):
        raise ContractViolation(f"Column index {j} out of range for d={ds.d}")
    beta = as_coefficients(beta, ds.d)
    return ds.y - ds.X @ beta + ds.X[:, j] * beta[j]
