"""
Exact one-dimensional minimizers for the weighted-L1 quantile surrogate

Both the coordinate update and the line search reduce to minimizing a convex
piecewise-linear function of one variable, solved exactly by sorting its
breakpoints and scanning the slope. The same breakpoints also give the global
coordinate minimum of the penalized objective itself.
"""
import math
from typing import Optional, Tuple

import numpy as np

from src.core.loss import rho
from src.core.models import TauLike, tau_value
from src.penalty.selo import SeloTuning, penalty_value
from src.utils.errors import ContractViolation

# Relative slack when deciding whether a cumulative slope is zero
SLOPE_RTOL = 1e-12


def _first(mask: np.ndarray) -> Optional[int]:
    if not mask.any():
        return None
    return int(np.argmax(mask))


def piecewise_linear_argmin(breaks: np.ndarray, jumps: np.ndarray, left_slope: float) -> float:
    """
    Minimizer of smallest magnitude of a convex piecewise-linear function

    Args:
        breaks: Breakpoint locations (any order)
        jumps: Nonnegative slope increase at each breakpoint
        left_slope: Slope to the left of every breakpoint (must be <= 0)

    Returns:
        The point of the minimizer interval [L, U] closest to zero
    """
    if breaks.size == 0:
        return 0.0

    order = np.argsort(breaks, kind="stable")
    b = breaks[order]
    slopes = left_slope + np.cumsum(jumps[order])
    tol = SLOPE_RTOL * (abs(left_slope) + float(np.sum(jumps)))

    if left_slope >= -tol:
        lower = -math.inf
    else:
        idx = _first(slopes >= -tol)
        lower = b[idx] if idx is not None else math.inf

    idx = _first(slopes > tol)
    upper = b[idx] if idx is not None else math.inf

    return float(min(max(0.0, lower), upper))


def _loss_left_slope(z: np.ndarray, tau: float, n: int) -> float:
    # Slope of (1/(2n)) sum rho(r_i - z_i t) as t -> -inf
    return -(tau * float(np.sum(z[z > 0])) - (1.0 - tau) * float(np.sum(z[z < 0]))) / (2.0 * n)


def solve_coordinate(r: np.ndarray, xj: np.ndarray, tau: float, n: int, w: float, col_l1: float) -> float:
    """Unchecked coordinate update; col_l1 is sum |xj|"""
    if w >= col_l1 / (2.0 * n):
        return 0.0

    nz = xj != 0
    x = xj[nz]
    breaks = np.append(r[nz] / x, 0.0)
    jumps = np.append(np.abs(x) / (2.0 * n), 2.0 * w)
    left_slope = _loss_left_slope(x, tau, n) - w
    return piecewise_linear_argmin(breaks, jumps, left_slope)


def coordinate_min(r, xj, tau: TauLike, n: int, w: float) -> float:
    """
    Exact minimizer of phi(t) = (1/(2n)) sum_i rho_tau(r_i - x_ij t) + w |t|

    Among several minimizers the one of smallest |t| is returned. When
    w >= (1/(2n)) sum |x_ij| the penalty dominates and the answer is 0,
    which also covers an all-zero column.

    Args:
        r: Partial residuals for the coordinate
        xj: Column of the design
        tau: Quantile level
        n: Sample size used in the 1/(2n) scaling
        w: Nonnegative penalty weight

    Returns:
        The minimizing coordinate value
    """
    tau = tau_value(tau)
    r = np.asarray(r, dtype=np.float64)
    xj = np.asarray(xj, dtype=np.float64)
    if r.shape != xj.shape or r.ndim != 1 or r.shape[0] != n:
        raise ContractViolation(f"r and xj must both have length n={n}, got {r.shape} and {xj.shape}")
    if not (w >= 0 and math.isfinite(w)):
        raise ContractViolation(f"Weight must be finite and nonnegative, got {w}")

    return solve_coordinate(r, xj, tau, n, float(w), float(np.sum(np.abs(xj))))


def selo_coordinate_min(r: np.ndarray, xj: np.ndarray, tau: float, n: int, t: SeloTuning) -> Tuple[float, float]:
    """
    Global minimizer of psi(s) = (1/(2n)) sum rho_tau(r_i - x_ij s) + p(s) along one coordinate

    The loss is linear between its breakpoints and the penalty is concave on
    each side of zero, so psi is concave on every piece and its minimum sits
    at a breakpoint or at zero. Loss values are accumulated outward from zero
    along the sorted breakpoints.

    Returns:
        (s, psi(s)), ties going to the smallest |s|
    """
    nz = xj != 0
    x = xj[nz]
    points = np.append(r[nz] / x, 0.0)
    jumps = np.append(np.abs(x) / (2.0 * n), 0.0)

    order = np.argsort(points, kind="stable")
    s = points[order]
    slopes = _loss_left_slope(x, tau, n) + np.cumsum(jumps[order])
    steps = slopes[:-1] * np.diff(s)

    z0 = int(np.flatnonzero(order == points.size - 1)[0])
    at_zero = float(np.sum(rho(r, tau))) / (2.0 * n)
    loss = np.empty(s.size)
    loss[z0] = at_zero
    loss[z0 + 1:] = at_zero + np.cumsum(steps[z0:])
    loss[:z0] = at_zero - np.cumsum(steps[:z0][::-1])[::-1]

    psi = loss + np.asarray(penalty_value(s, t))
    best = int(np.lexsort((np.abs(s), psi))[0])
    return float(s[best]), float(psi[best])


def line_min(
    r: np.ndarray,
    z: np.ndarray,
    beta: np.ndarray,
    v: np.ndarray,
    weights: np.ndarray,
    tau: float,
    n: int
) -> float:
    """
    Exact step s minimizing (1/(2n)) sum rho(r_i - s z_i) + sum_j w_j |beta_j + s v_j|

    z is the image X v of the direction; the smallest |s| minimizer is returned.
    """
    lz = z != 0
    lv = v != 0
    zl = z[lz]
    vl = v[lv]
    wl = weights[lv]

    breaks = np.concatenate([r[lz] / zl, -beta[lv] / vl])
    jumps = np.concatenate([np.abs(zl) / (2.0 * n), 2.0 * wl * np.abs(vl)])
    left_slope = _loss_left_slope(zl, tau, n) - float(np.sum(wl * np.abs(vl)))
    return piecewise_linear_argmin(breaks, jumps, left_slope)
