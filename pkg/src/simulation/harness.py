"""
Monte Carlo replication harness for support recovery, error rates and normality
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

import numpy as np
from scipy.stats import norm
from tqdm import tqdm

from src.config.settings import Config
from src.inference.asymptotics import (
    AsymptoticContext,
    confidence_interval,
    oracle_linearization,
    sigma_hat,
    standardized_stat,
)
from src.selection.bic import select
from src.selection.models import BicConfig
from src.simulation.dgp import generate
from src.simulation.models import OracleMetrics, RateLadder, ReplicationRecord, SimScenario
from src.solver.lla import fit
from src.solver.models import FitConfig
from src.utils.errors import ContractViolation, SeloError, SimulationError, SingularMatrixError

logger = logging.getLogger(__name__)

MAX_FAILURE_FRACTION = 0.10
CI_LEVEL = 0.95


def ks_distance(samples: Sequence[float]) -> float:
    """
    Kolmogorov-Smirnov distance between the empirical CDF of samples and N(0, 1)

    Both one-sided gaps are checked at every sorted sample point.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64).reshape(-1))
    m = x.size
    if m == 0:
        raise ContractViolation("ks_distance needs at least one sample")
    cdf = norm.cdf(x)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - cdf), np.max(cdf - (i - 1) / m)))


def _replicate(sc: SimScenario, rep: int, fit_cfg: FitConfig, bic_cfg: BicConfig) -> ReplicationRecord:
    ds, eps = generate(sc, rep)
    truth = sc.support
    res = fit(ds, sc.tau, sc.effective_tuning(), fit_cfg)
    found = res.active_set

    record = {
        "rep": rep,
        "k_nonzero": len(found),
        "exact_recovery": found == truth,
        "true_positives": len(found.intersection(truth)),
        "false_positives": len(found.difference(truth)),
        "l2_error": float(np.linalg.norm(res.beta_hat - sc.beta0)),
    }

    # the normal limit is a statement on the event that the true support is selected
    if len(truth) and truth.issubset(found):
        members = list(truth.members)
        u = np.zeros(len(truth))
        u[0] = 1.0
        try:
            ctx = AsymptoticContext(sigma=sigma_hat(ds, truth), f0=sc.error.f0, tau=sc.tau, n=ds.n, u=u)
            record["z"] = standardized_stat(ctx, res.beta_hat[members], sc.beta0[members])
            ci = confidence_interval(ctx, res.beta_hat[members], CI_LEVEL)
            record["ci_covered"] = ci.contains(float(sc.beta0[members[0]]))
            lin = oracle_linearization(ds, truth, eps, sc.tau, sc.error.f0)
            record["linearization_gap"] = abs(float(res.beta_hat[members[0]] - sc.beta0[members[0]] - lin[0]))
        except SingularMatrixError as e:
            logger.warning(f"Replication {rep}: {e}; standardized statistic skipped")

    if sc.with_bic:
        chosen = select(ds, sc.tau, bic_cfg, fit_cfg).active_set
        record["bic_exact"] = chosen == truth
        record["bic_false_positives"] = len(chosen.difference(truth))

    return ReplicationRecord(**record)


def _safe_replicate(sc: SimScenario, rep: int, fit_cfg: FitConfig, bic_cfg: BicConfig) -> ReplicationRecord:
    try:
        return _replicate(sc, rep, fit_cfg, bic_cfg)
    except SeloError as e:
        logger.warning(f"Replication {rep} failed: {e}")
        return ReplicationRecord(rep=rep, failed=True, message=str(e))


def _mean(values: List) -> Optional[float]:
    return float(np.mean(values)) if values else None


def _aggregate(sc: SimScenario, records: List[ReplicationRecord]) -> OracleMetrics:
    ok = [r for r in records if not r.failed]
    m = len(ok)
    k_true = len(sc.support)
    k_null = sc.d - k_true

    z = sorted(r.z for r in ok if r.z is not None)
    l2 = tuple(r.l2_error for r in ok)

    return OracleMetrics(
        reps=len(records),
        failures=len(records) - m,
        exact_recovery_rate=_mean([float(r.exact_recovery) for r in ok]),
        tpr=sum(r.true_positives for r in ok) / (k_true * m) if k_true else 1.0,
        fpr=sum(r.false_positives for r in ok) / (k_null * m) if k_null else 0.0,
        l2_errors=l2,
        median_l2=float(np.median(l2)),
        z_samples=tuple(z),
        z_skipped=m - len(z),
        ks_to_normal=ks_distance(z) if z else None,
        ci_coverage=_mean([float(r.ci_covered) for r in ok if r.ci_covered is not None]),
        bic_recovery_rate=_mean([float(r.bic_exact) for r in ok]) if sc.with_bic else None,
        bic_fpr=(
            sum(r.bic_false_positives for r in ok) / (k_null * m) if k_null else 0.0
        ) if sc.with_bic else None,
        linearization_gap=_mean([r.linearization_gap for r in ok if r.linearization_gap is not None]),
        records=tuple(records),
    )


def run_replications(
    sc: SimScenario,
    fit_cfg: Optional[FitConfig] = None,
    bic_cfg: Optional[BicConfig] = None,
    threads: int = 1,
    progress: Optional[bool] = None
) -> OracleMetrics:
    """
    Run every replication of a scenario and aggregate the results

    Replications draw from their own (seed, rep) streams, so results do not
    depend on the number of worker threads. Solver failures are recorded per
    replication.

    Args:
        sc: Scenario
        fit_cfg: Solver settings
        bic_cfg: BIC settings, used when sc.with_bic is set
        threads: Worker threads (0 = auto)
        progress: Show a tqdm progress bar (defaults to SELO_SHOW_PROGRESS)

    Returns:
        OracleMetrics

    Raises:
        SimulationError: If more than 10% of the replications failed
    """
    fit_cfg = fit_cfg or FitConfig()
    bic_cfg = bic_cfg or BicConfig()
    progress = Config.SHOW_PROGRESS if progress is None else progress
    workers = min(Config.resolve_threads(threads), sc.reps)

    logger.info(f"Running {sc.reps} replications (n={sc.n}, d={sc.d}, error={sc.error.kind.value}) on {workers} worker(s)")

    def task(rep: int) -> ReplicationRecord:
        return _safe_replicate(sc, rep, fit_cfg, bic_cfg)

    if workers <= 1:
        records = [task(rep) for rep in tqdm(range(sc.reps), desc="replications", disable=not progress)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            records = list(tqdm(executor.map(task, range(sc.reps)), total=sc.reps, desc="replications", disable=not progress))
    records.sort(key=lambda r: r.rep)

    failures = sum(r.failed for r in records)
    if failures > MAX_FAILURE_FRACTION * sc.reps or failures == sc.reps:
        logger.error(f"{failures} of {sc.reps} replications failed")
        raise SimulationError(f"{failures} of {sc.reps} replications failed (limit {MAX_FAILURE_FRACTION:.0%})")

    return _aggregate(sc, records)


def rate_ladder(
    ns: Sequence[int],
    base: SimScenario,
    fit_cfg: Optional[FitConfig] = None,
    bic_cfg: Optional[BicConfig] = None,
    threads: int = 1,
    progress: Optional[bool] = None
) -> RateLadder:
    """
    Error-rate experiment over a sample-size ladder

    Each rung uses d_n = floor(2 n^0.4) with the nonzero entries of
    base.beta0 as the leading coefficients; the error law, seed, replication
    count, design and lambda scale come from base. The slope of
    log(median l2 error) against log(alpha_n) is fitted by least squares.
    """
    ns = [int(n) for n in ns]
    if len(ns) < 2:
        raise ContractViolation("rate_ladder needs at least two sample sizes")

    signal = [float(b) for b in base.beta0[base.support.mask]]
    metrics, scenarios = [], []
    for n in ns:
        sc = SimScenario.ladder(
            n, signal, base.error, base.seed, base.reps,
            design=base.design, rho=base.rho, lambda_scale=base.lambda_scale, with_bic=base.with_bic,
        )
        scenarios.append(sc)
        metrics.append(run_replications(sc, fit_cfg, bic_cfg, threads=threads, progress=progress))
        logger.info(f"Ladder n={n}, d={sc.d}: median l2 {metrics[-1].median_l2:.4g}")

    alphas = [sc.alpha_n for sc in scenarios]
    medians = [mt.median_l2 for mt in metrics]
    if min(medians) <= 0:
        raise SimulationError("Median error vanished on the ladder; the log-log slope is undefined")
    slope, intercept = np.polyfit(np.log(alphas), np.log(medians), 1)

    return RateLadder(
        ns=tuple(ns),
        ds=tuple(sc.d for sc in scenarios),
        alphas=tuple(alphas),
        median_l2=tuple(medians),
        recovery_rates=tuple(mt.exact_recovery_rate for mt in metrics),
        slope=float(slope),
        intercept=float(intercept),
        metrics=tuple(metrics),
    )
