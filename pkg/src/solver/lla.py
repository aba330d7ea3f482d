"""
Seamless-L0 quantile estimator via local linear approximation

Each outer step replaces the concave penalty by its tangent at the current
iterate and minimizes the resulting weighted-L1 quantile surrogate by exact
cyclic coordinate descent. The tangent majorizes the penalty, so the true
objective never increases from one outer step to the next.

The loop stops at a local minimizer whose support rarely grows past the
warm-up's, since a zero coefficient carries the steepest tangent. A local
search of global coordinate moves, single-coefficient switches and extra
starts follows and keeps the lowest objective found.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Tuple

import numpy as np
from scipy import linalg

from src.core.loss import objective, rho
from src.core.models import CoefficientVector, Dataset, IndexSet, TauLike, as_coefficients, tau_value
from src.penalty.selo import SeloTuning, penalty_derivative, penalty_value
from src.solver.coordinate import line_min, selo_coordinate_min, solve_coordinate
from src.solver.models import FitConfig, FitResult, InitKind
from src.utils.errors import NumericalFailure

logger = logging.getLogger(__name__)

# Residuals within this fraction of max|y| count as exactly zero for edge moves
ZERO_RESIDUAL_RTOL = 1e-10
STRICT_DECREASE_RTOL = 1e-14
ROUNDING_RTOL = 1e-12
EDGE_NORM_TOL = 1e-8


def lla_weights(beta: CoefficientVector, t: SeloTuning) -> np.ndarray:
    """Tangent slopes of the penalty at beta, one weight per coordinate"""
    return np.asarray(penalty_derivative(np.asarray(beta, dtype=np.float64), t), dtype=np.float64).reshape(-1)


def _surrogate(r: np.ndarray, beta: np.ndarray, weights: np.ndarray, tau: float, n: int) -> float:
    return float(np.sum(rho(r, tau)) / (2.0 * n) + np.sum(weights * np.abs(beta)))


def surrogate_objective(ds: Dataset, beta: CoefficientVector, tau: TauLike, weights) -> float:
    """Weighted-L1 surrogate (1/(2n)) sum rho_tau(y_i - X_i' beta) + sum_j w_j |beta_j|"""
    beta = as_coefficients(beta, ds.d)
    weights = np.asarray(weights, dtype=np.float64)
    return _surrogate(ds.y - ds.X @ beta, beta, weights, tau_value(tau), ds.n)


def _edge_directions(K: np.ndarray, f: int) -> List[np.ndarray]:
    """
    Edge directions of the kink arrangement through a point

    K stacks the active kinks (zero-residual rows and zero coordinates) as
    rows. The result spans the directions that keep every kink active plus,
    for each kink, the edge that releases only that one.
    """
    if K.shape[0] == 0:
        return list(np.eye(f))

    lineality = linalg.null_space(K)
    directions = list(lineality.T)
    for k in range(K.shape[0]):
        rest = np.delete(K, k, axis=0)
        edges = np.eye(f) if rest.shape[0] == 0 else linalg.null_space(rest)
        edges = edges - lineality @ (lineality.T @ edges)
        norms = np.linalg.norm(edges, axis=0)
        best = int(np.argmax(norms)) if norms.size else 0
        if norms.size and norms[best] > EDGE_NORM_TOL:
            directions.append(edges[:, best] / norms[best])
    return directions


def _edge_escape(
    X: np.ndarray,
    y: np.ndarray,
    r: np.ndarray,
    beta: np.ndarray,
    weights: np.ndarray,
    free: np.ndarray,
    tau: float,
    n: int
) -> bool:
    """
    Try to leave a point where every coordinate move is blocked

    Searches exactly along each edge of the kink arrangement through beta.
    The surrogate is convex and piecewise linear, so at a point in general
    position a descent direction exists iff one of these edges descends.
    The first strict decrease is applied to beta in place.
    """
    f = free.size
    scale = max(1.0, float(np.max(np.abs(y))))
    zero_rows = np.flatnonzero(np.abs(r) <= ZERO_RESIDUAL_RTOL * scale)
    zero_coords = np.flatnonzero(beta[free] == 0.0)
    K = np.vstack([X[np.ix_(zero_rows, free)], np.eye(f)[zero_coords]])
    if K.shape[0] > f:
        logger.debug(f"Degenerate kink set ({K.shape[0]} kinks in {f} free dimensions); no edge moves")
        return False

    current = _surrogate(r, beta, weights, tau, n)
    Xf = X[:, free]
    v = np.zeros_like(beta)
    for direction in _edge_directions(K, f):
        v[:] = 0.0
        v[free] = direction
        s = line_min(r, Xf @ direction, beta, v, weights, tau, n)
        if s == 0.0:
            continue

        candidate = beta + s * v
        value = _surrogate(y - X @ candidate, candidate, weights, tau, n)
        if value < current - STRICT_DECREASE_RTOL * max(1.0, abs(current)):
            beta[:] = candidate
            return True
    return False


def _solve_surrogate(
    X: np.ndarray,
    y: np.ndarray,
    tau: float,
    weights: np.ndarray,
    beta: np.ndarray,
    cfg: FitConfig,
    col_l1: np.ndarray
) -> Tuple[np.ndarray, int]:
    """
    Minimize the weighted-L1 surrogate by exact coordinate descent from beta

    Coordinates whose weight exceeds their column's loss slope are optimal
    at zero whatever the others do, so they are fixed at zero up front.

    Returns:
        (new beta, number of sweeps)
    """
    n, _ = X.shape
    beta = beta.copy()
    pinned = weights >= col_l1 / (2.0 * n)
    beta[pinned] = 0.0
    free = np.flatnonzero(~pinned)
    r = y - X @ beta

    sweeps = 0
    while sweeps < cfg.max_sweeps:
        sweeps += 1
        max_change = 0.0
        for j in free:
            xj = X[:, j]
            old = beta[j]
            rj = r + xj * old if old != 0.0 else r
            new = solve_coordinate(rj, xj, tau, n, weights[j], col_l1[j])
            if new != old:
                r = rj - xj * new
                beta[j] = new
                max_change = max(max_change, abs(new - old))
        r = y - X @ beta

        if max_change < cfg.inner_tol:
            if 2 <= free.size <= cfg.escape_max_dim and _edge_escape(X, y, r, beta, weights, free, tau, n):
                r = y - X @ beta
                continue
            break

    return beta, sweeps


@dataclass
class _Run:
    """One reweighting run and the work it took"""
    beta: np.ndarray
    objective: float
    history: List[float]
    outer: int
    sweeps: int
    converged: bool


def _improved(value: float, current: float, cfg: FitConfig) -> bool:
    return current - value > cfg.obj_tol * max(abs(current), 1e-300)


def _reweight(
    ds: Dataset,
    tau: float,
    t: SeloTuning,
    cfg: FitConfig,
    col_l1: np.ndarray,
    beta: np.ndarray,
    warm_weights: Optional[np.ndarray] = None
) -> _Run:
    """
    Outer majorize-minimize loop from beta

    With warm_weights the loop starts from the weighted-L1 solve under those
    weights instead of beta itself.
    """
    X, y = ds.X, ds.y
    sweeps_total = 0
    if warm_weights is not None:
        beta, sweeps_total = _solve_surrogate(X, y, tau, warm_weights, beta, cfg, col_l1)

    current = objective(ds, beta, tau, t)
    if not math.isfinite(current):
        raise NumericalFailure("Non-finite objective at the starting point", iteration=0)

    history = [current]
    converged = False
    outer = 0
    for k in range(1, cfg.max_outer + 1):
        outer = k
        weights = lla_weights(beta, t)
        candidate, sweeps = _solve_surrogate(X, y, tau, weights, beta, cfg, col_l1)
        sweeps_total += sweeps

        value = objective(ds, candidate, tau, t)
        if not math.isfinite(value):
            raise NumericalFailure("Non-finite objective", iteration=k)

        if value > current:
            # rounding-level increases mean the surrogate solve returned the same point
            converged = value - current <= ROUNDING_RTOL * max(1.0, abs(current))
            if not converged:
                logger.warning(
                    f"Outer step {k} increased the objective ({value!r} > {current!r}); "
                    f"keeping previous iterate"
                )
            history.append(current)
            break

        decrease = (current - value) / max(abs(current), 1e-300)
        beta, current = candidate, value
        history.append(current)
        if decrease < cfg.obj_tol:
            converged = True
            break

    return _Run(beta, current, history, outer, sweeps_total, converged)


def _coordinate_moves(ds: Dataset, tau: float, t: SeloTuning, beta: np.ndarray) -> Optional[np.ndarray]:
    """
    One pass of global coordinate moves on the penalized objective

    Each coordinate jumps to its exact one-dimensional minimizer, which can
    switch a coefficient on or off where the reweighting loop cannot.

    Returns:
        The moved vector, or None when no coordinate moved
    """
    X, y, n = ds.X, ds.y, ds.n
    beta = beta.copy()
    r = y - X @ beta
    moved = False
    for j in range(ds.d):
        xj = X[:, j]
        old = beta[j]
        rj = r + xj * old if old != 0.0 else r
        s, value = selo_coordinate_min(rj, xj, tau, n, t)
        if s == old:
            continue
        here = float(np.sum(rho(r, tau))) / (2.0 * n) + penalty_value(old, t)
        if value < here - STRICT_DECREASE_RTOL * max(1.0, abs(here)):
            beta[j] = s
            r = rj - xj * s
            moved = True
    return beta if moved else None


def _toggles(ds: Dataset, tau: float, beta: np.ndarray, col_l1: np.ndarray) -> Iterator[np.ndarray]:
    """Starts that switch one coefficient off, or on at its unpenalized coordinate value"""
    X, n = ds.X, ds.n
    r = ds.y - X @ beta
    for j in range(ds.d):
        start = beta.copy()
        if beta[j] != 0.0:
            start[j] = 0.0
        else:
            start[j] = solve_coordinate(r, X[:, j], tau, n, 0.0, col_l1[j])
            if start[j] == 0.0:
                continue
        yield start


def _support_warm_weights(col_l1: np.ndarray, n: int, cfg: FitConfig) -> Iterator[np.ndarray]:
    """
    Warm-up weights for unpenalized fits restricted to a support

    Every support is tried when d <= support_starts_max_dim, otherwise only
    the full one. A weight of col_l1 / (2n) pins its coordinate at zero.
    """
    d = col_l1.size
    if d > cfg.support_starts_max_dim:
        yield np.zeros(d)
        return

    pin = col_l1 / (2.0 * n)
    for mask in itertools.product((False, True), repeat=d):
        yield np.where(np.array(mask), 0.0, pin)


def _local_search(
    ds: Dataset,
    tau: float,
    t: SeloTuning,
    cfg: FitConfig,
    col_l1: np.ndarray,
    run: _Run,
    effort: List[int]
) -> _Run:
    """
    Leave a local minimizer of the reweighting loop for a lower one

    Every accepted move restarts the loop from the moved point, so each round
    lowers the objective by more than obj_tol.
    """
    best = run
    for _ in range(cfg.max_search_rounds):
        moved = _coordinate_moves(ds, tau, t, best.beta)
        starts: Iterable[np.ndarray] = [] if moved is None else [moved]
        if ds.d <= cfg.search_max_dim:
            starts = itertools.chain(starts, _toggles(ds, tau, best.beta, col_l1))

        found = None
        for start in starts:
            candidate = _reweight(ds, tau, t, cfg, col_l1, start)
            effort[0] += candidate.outer
            effort[1] += candidate.sweeps
            if _improved(candidate.objective, best.objective, cfg):
                found = candidate
                break
        if found is None:
            break
        logger.debug(f"Local search moved the objective {best.objective!r} -> {found.objective!r}")
        best = found
    return best


def fit(
    ds: Dataset,
    tau: TauLike,
    t: SeloTuning,
    cfg: Optional[FitConfig] = None,
    init: Optional[CoefficientVector] = None
) -> FitResult:
    """
    Compute the seamless-L0 penalized quantile regression estimate

    The reweighting loop runs from the configured start. With local search on,
    its result is then improved by global coordinate moves and, for
    d <= search_max_dim, by switching single coefficients on or off and by
    extra runs from the cold and the unpenalized starts. The lowest objective
    wins.

    Args:
        ds: Dataset
        tau: Quantile level
        t: Penalty tuning pair
        cfg: Solver settings (defaults to FitConfig())
        init: Optional starting vector. With the l1_warm start it seeds the
            weighted-L1 warm-up solve; with the zeros start the reweighting
            loop begins at it directly.

    Returns:
        FitResult with the estimate and its convergence record. The history
        is the one of the main run, followed by the final objective when the
        search lowered it.

    Raises:
        NumericalFailure: If the objective becomes non-finite
    """
    cfg = cfg or FitConfig()
    tau = tau_value(tau)
    X, y, d = ds.X, ds.y, ds.d
    col_l1 = np.sum(np.abs(X), axis=0)

    warm = np.full(d, min(t.scale / t.gamma, t.lambda_)) if cfg.init == InitKind.L1_WARM else None
    start = np.zeros(d) if init is None else as_coefficients(init, d).copy()

    main = _reweight(ds, tau, t, cfg, col_l1, start, warm)
    runs = [main]
    if cfg.local_search and d <= cfg.search_max_dim:
        if init is not None:
            runs.append(_reweight(ds, tau, t, cfg, col_l1, np.zeros(d), warm))
        for weights in _support_warm_weights(col_l1, ds.n, cfg):
            runs.append(_reweight(ds, tau, t, cfg, col_l1, np.zeros(d), weights))

    effort = [sum(run.outer for run in runs), sum(run.sweeps for run in runs)]
    best = main
    seen = set()
    for run in runs:
        key = run.beta.tobytes()
        if key in seen:
            continue
        seen.add(key)
        if cfg.local_search:
            run = _local_search(ds, tau, t, cfg, col_l1, run, effort)
        if run.objective < best.objective:
            best = run

    history = list(main.history)
    if best.objective < history[-1]:
        history.append(best.objective)

    beta = best.beta
    logger.debug(
        f"Fit done: lambda={t.lambda_:g}, gamma={t.gamma:g}, tau={tau}, "
        f"outer={effort[0]}, sweeps={effort[1]}, converged={best.converged}, objective={best.objective:.6g}"
    )

    beta.setflags(write=False)
    resid = y - X @ beta
    resid.setflags(write=False)

    return FitResult(
        beta_hat=beta,
        active_set=IndexSet.from_beta(beta, cfg.zero_tol),
        objective=best.objective,
        outer_iters=effort[0],
        converged=best.converged,
        residuals=resid,
        objective_history=tuple(history),
        inner_sweeps=effort[1],
        tuning=t,
        tau=tau,
    )
