"""
Warm-started fits over a (lambda, gamma) grid
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

from src.config.settings import Config
from src.core.models import Dataset, TauLike, tau_value
from src.penalty.selo import SeloTuning
from src.solver.lla import fit
from src.solver.models import FitConfig, FitPath, FitResult
from src.utils.errors import ContractViolation, NumericalFailure

logger = logging.getLogger(__name__)


def _check_grid(values: Sequence[float], name: str) -> List[float]:
    values = [float(v) for v in values]
    if not values:
        raise ContractViolation(f"{name} grid is empty")
    if any(not (v > 0 and math.isfinite(v)) for v in values):
        raise ContractViolation(f"{name} grid must be positive and finite: {values}")
    return values


def _fit_column(
    ds: Dataset,
    tau: float,
    lambdas: Tuple[float, ...],
    gamma: float,
    cfg: FitConfig
) -> Dict[Tuple[float, float], FitResult]:
    """Fit one gamma column in decreasing-lambda order, each fit seeded by the previous one"""
    cells = {}
    previous: Optional[FitResult] = None
    for lambda_ in lambdas:
        t = SeloTuning(lambda_=lambda_, gamma=gamma)
        try:
            result = fit(ds, tau, t, cfg, init=None if previous is None else previous.beta_hat)
        except NumericalFailure as e:
            raise e.at_grid_cell(lambda_, gamma) from e
        cells[(lambda_, gamma)] = result
        previous = result
    return cells


def fit_path(
    ds: Dataset,
    tau: TauLike,
    lambdas: Sequence[float],
    gammas: Sequence[float],
    cfg: Optional[FitConfig] = None
) -> FitPath:
    """
    Fit every (lambda, gamma) cell with warm starts along lambda

    Gamma columns are independent and may run concurrently (up to
    cfg.threads workers); the result does not depend on scheduling.

    Args:
        ds: Dataset
        tau: Quantile level
        lambdas: Positive lambda grid (fitted in decreasing order)
        gammas: Positive gamma grid
        cfg: Solver settings

    Returns:
        FitPath keyed by (lambda, gamma)

    Raises:
        ContractViolation: On empty or non-positive grids
        NumericalFailure: From any cell, with its grid coordinates attached
    """
    cfg = cfg or FitConfig()
    tau = tau_value(tau)
    lambdas = tuple(sorted(set(_check_grid(lambdas, "lambda")), reverse=True))
    gammas = tuple(dict.fromkeys(_check_grid(gammas, "gamma")))

    path = FitPath(lambdas=lambdas, gammas=gammas)
    workers = min(Config.resolve_threads(cfg.threads), len(gammas))
    logger.debug(f"Fitting {len(lambdas)}x{len(gammas)} grid with {workers} worker(s)")

    if workers <= 1:
        columns = [_fit_column(ds, tau, lambdas, gamma, cfg) for gamma in gammas]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            columns = list(executor.map(lambda g: _fit_column(ds, tau, lambdas, g, cfg), gammas))

    for cells in columns:
        path.cells.update(cells)
    return path
