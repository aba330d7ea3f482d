"""
BIC criterion for joint selection of (lambda, gamma) and the model

BIC = log(max(mean check loss, floor)) + (log n / n) * S_n * ||beta||_0,
searched over a tuning grid, restricted to models of at most
s_n = floor(c_cap * n^a) nonzeros.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np

from src.core.loss import mean_check_loss, objective
from src.core.models import Dataset, IndexSet, TauLike, tau_value
from src.penalty.selo import SeloTuning
from src.selection.models import BicConfig, BicOrdering, BicScore, SelectionResult, SnPolicy
from src.solver.lla import fit
from src.solver.models import FitConfig, FitResult
from src.solver.path import fit_path
from src.utils.errors import ContractViolation, NoFeasibleModelError

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA_POINTS = 10


def sn_value(n: int, d: int, cfg: Optional[BicConfig] = None) -> float:
    """
    Inflation factor S_n of the BIC penalty

    The auto policy uses 1 while d <= log n and (d / log n) * log(log(max(n, 8)))
    beyond that, so d / (S_n log n) still goes to zero.
    """
    cfg = cfg or BicConfig()
    if n < 2:
        raise ContractViolation(f"S_n needs n >= 2, got n={n}")

    if cfg.sn_policy == SnPolicy.FIXED:
        return float(cfg.sn_fixed)
    if cfg.sn_policy == SnPolicy.FORMULA:
        return max(1.0, math.log(math.log(n)))

    log_n = math.log(n)
    if d <= log_n:
        return 1.0
    return d / log_n * math.log(math.log(max(n, 8)))


def sn_cap(n: int, cfg: Optional[BicConfig] = None) -> int:
    """Largest admissible model size s_n = floor(c_cap * n^a)"""
    cfg = cfg or BicConfig()
    return int(math.floor(cfg.c_cap * n ** cfg.a_exponent))


def bic_score(
    ds: Dataset,
    fit_result: FitResult,
    tau: TauLike,
    sn: float,
    cfg: Optional[BicConfig] = None
) -> BicScore:
    """
    Score a fit with the BIC criterion

    Args:
        ds: Dataset the fit was computed on
        fit_result: The fit to score
        tau: Quantile level
        sn: Inflation factor S_n
        cfg: Supplies the loss floor

    Returns:
        BicScore (feasibility is decided by the caller)
    """
    cfg = cfg or BicConfig()
    if fit_result.residuals.shape[0] != ds.n:
        raise ContractViolation(f"Fit has {fit_result.residuals.shape[0]} residuals, dataset has n={ds.n}")

    mean_loss = mean_check_loss(fit_result.residuals, tau)
    k = fit_result.k_nonzero
    value = math.log(max(mean_loss, cfg.loss_floor)) + math.log(ds.n) / ds.n * sn * k
    return BicScore(
        value=value,
        mean_loss=mean_loss,
        k_nonzero=k,
        sn=sn,
        n=ds.n,
        lambda_=fit_result.tuning.lambda_,
        gamma=fit_result.tuning.gamma,
    )


def default_grids(ds: Dataset, tau: TauLike) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """
    Scale-aware default grids

    Returns:
        (lambdas, gammas): ten decreasing log-spaced lambdas over
        [0.01, 1] * mean rho_tau(y), and gammas g0, 10 g0, 100 g0 with
        g0 = sqrt(d) * n^(-3/2)
    """
    q_hat = max(mean_check_loss(ds.y, tau), 1e-12)
    lambdas = tuple(float(v) for v in q_hat * np.logspace(0.0, -2.0, DEFAULT_LAMBDA_POINTS))
    g0 = math.sqrt(ds.d) * ds.n ** -1.5
    return lambdas, (g0, 10.0 * g0, 100.0 * g0)


def select(
    ds: Dataset,
    tau: TauLike,
    cfg: Optional[BicConfig] = None,
    fit_cfg: Optional[FitConfig] = None
) -> SelectionResult:
    """
    Pick (lambda, gamma) and the model by minimizing BIC over the grid

    Cells whose fit has more than s_n nonzeros are kept on the scoreboard
    but marked infeasible. Ties are broken by fewer nonzeros, then larger
    lambda, then larger gamma.

    Raises:
        NoFeasibleModelError: If every cell exceeds the s_n cap
    """
    cfg = cfg or BicConfig()
    fit_cfg = fit_cfg or FitConfig()
    tau = tau_value(tau)

    lambdas, gammas = default_grids(ds, tau)
    lambdas = cfg.lambda_grid or lambdas
    gammas = cfg.gamma_grid or gammas
    if cfg.threads is not None:
        fit_cfg = fit_cfg.model_copy(update={"threads": cfg.threads})

    path = fit_path(ds, tau, lambdas, gammas, fit_cfg)
    sn = sn_value(ds.n, ds.d, cfg)
    cap = sn_cap(ds.n, cfg)

    scoreboard = []
    for _, _, cell in path:
        score = bic_score(ds, cell, tau, sn, cfg)
        if score.k_nonzero > cap:
            logger.debug(f"Cell lambda={score.lambda_:g}, gamma={score.gamma:g} has {score.k_nonzero} > {cap} nonzeros")
            score = score.model_copy(update={"feasible": False})
        scoreboard.append(score)

    feasible = [s for s in scoreboard if s.feasible]
    if not feasible:
        raise NoFeasibleModelError(f"No feasible model under s_n cap {cap} ({len(scoreboard)} cells)")

    best = min(feasible, key=BicScore.sort_key)
    winner = path.get(best.lambda_, best.gamma)
    logger.info(
        f"BIC selected lambda={best.lambda_:g}, gamma={best.gamma:g} with {best.k_nonzero} nonzeros "
        f"(S_n={sn:.4g}, cap={cap}, excluded={len(scoreboard) - len(feasible)})"
    )

    return SelectionResult(
        best=best,
        beta_hat=winner.beta_hat,
        active_set=winner.active_set,
        scoreboard=scoreboard,
        excluded_count=len(scoreboard) - len(feasible),
        sn=sn,
        cap=cap,
        fit=winner,
        grid_shape=path.shape,
    )


def fit_restricted(
    ds: Dataset,
    A: IndexSet,
    tau: TauLike,
    t: SeloTuning,
    cfg: Optional[FitConfig] = None
) -> FitResult:
    """
    Fit on the columns in A only and embed the estimate back into length d

    An empty A gives the zero model (residuals equal y).
    """
    tau = tau_value(tau)
    if A.d != ds.d:
        raise ContractViolation(f"Index set is over {A.d} columns, dataset has {ds.d}")

    if len(A) == 0:
        beta = np.zeros(ds.d)
        beta.setflags(write=False)
        value = objective(ds, beta, tau, t)
        return FitResult(
            beta_hat=beta,
            active_set=IndexSet.empty(ds.d),
            objective=value,
            outer_iters=0,
            converged=True,
            residuals=ds.y,
            objective_history=(value,),
            inner_sweeps=0,
            tuning=t,
            tau=tau,
        )

    cfg = cfg or FitConfig()
    sub = fit(ds.subset_columns(A), tau, t, cfg)
    beta = np.zeros(ds.d)
    beta[list(A.members)] = sub.beta_hat
    beta.setflags(write=False)
    return FitResult(
        beta_hat=beta,
        active_set=IndexSet.from_beta(beta, cfg.zero_tol),
        objective=sub.objective,
        outer_iters=sub.outer_iters,
        converged=sub.converged,
        residuals=sub.residuals,
        objective_history=sub.objective_history,
        inner_sweeps=sub.inner_sweeps,
        tuning=t,
        tau=tau,
    )


def bic_ordering_check(
    ds: Dataset,
    truth_A0: IndexSet,
    tau: TauLike,
    t: SeloTuning,
    sn: float,
    overfit_A: IndexSet,
    underfit_A: IndexSet,
    cfg: Optional[FitConfig] = None,
    bic_cfg: Optional[BicConfig] = None
) -> BicOrdering:
    """
    BIC of restricted fits on the true, an over-fitted and an under-fitted set

    The caller compares the three values; nothing is asserted here.

    Raises:
        ContractViolation: Unless truth_A0 is a strict subset of overfit_A,
            truth_A0 is not contained in underfit_A and every set fits
            under the s_n cap
    """
    bic_cfg = bic_cfg or BicConfig()
    if not truth_A0.is_strict_subset(overfit_A):
        raise ContractViolation("Over-fitted set must strictly contain the true set")
    if truth_A0.issubset(underfit_A):
        raise ContractViolation("Under-fitted set must miss at least one true index")

    cap = sn_cap(ds.n, bic_cfg)
    for name, A in (("true", truth_A0), ("over-fitted", overfit_A), ("under-fitted", underfit_A)):
        if len(A) > cap:
            raise ContractViolation(f"The {name} set has {len(A)} > s_n = {cap} members")

    scores = [
        bic_score(ds, fit_restricted(ds, A, tau, t, cfg), tau, sn, bic_cfg).value
        for A in (truth_A0, overfit_A, underfit_A)
    ]
    return BicOrdering(*scores)
