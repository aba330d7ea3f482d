"""
Data generation and design diagnostics for Monte Carlo experiments
"""
import logging
import math
from typing import Optional, Tuple, Union

import numpy as np
from scipy import linalg, optimize, stats

from src.core.models import Dataset, TauLike, tau_value
from src.penalty.selo import SeloTuning
from src.simulation.models import AssumptionReport, DesignKind, ErrorDistribution, ErrorKind, SimScenario
from src.utils.errors import ContractViolation

logger = logging.getLogger(__name__)

QUANTILE_XTOL = 1e-12


def _student_t_quantile(nu: float, tau: float) -> float:
    """tau-quantile of Student t(nu) by bracketing root search on the CDF"""
    if tau == 0.5:
        return 0.0
    bound = 1.0
    while stats.t.cdf(-bound, nu) > tau or stats.t.cdf(bound, nu) < tau:
        bound *= 2.0
    return float(optimize.brentq(lambda x: stats.t.cdf(x, nu) - tau, -bound, bound, xtol=QUANTILE_XTOL))


def make_error_dist(kind: Union[ErrorKind, str], param: float = 1.0, tau: TauLike = 0.5) -> ErrorDistribution:
    """
    Build an error law whose tau-quantile is zero

    Args:
        kind: normal, student_t, laplace or cauchy
        param: sigma, nu, b or s respectively (must be positive)
        tau: Quantile level

    Returns:
        ErrorDistribution with the base tau-quantile as shift and the base
        density at that quantile as f0
    """
    try:
        kind = ErrorKind(kind)
    except ValueError as e:
        raise ContractViolation(f"Unknown error law {kind!r}") from e
    tau = tau_value(tau)
    param = float(param)
    if not (param > 0 and math.isfinite(param)):
        raise ContractViolation(f"Error law parameter must be positive and finite, got {param}")

    if kind == ErrorKind.NORMAL:
        z = float(stats.norm.ppf(tau))
        shift = param * z
        f0 = float(stats.norm.pdf(z)) / param
    elif kind == ErrorKind.LAPLACE:
        if tau <= 0.5:
            shift = param * math.log(2.0 * tau)
            f0 = tau / param
        else:
            shift = -param * math.log(2.0 - 2.0 * tau)
            f0 = (1.0 - tau) / param
    elif kind == ErrorKind.CAUCHY:
        shift = param * math.tan(math.pi * (tau - 0.5))
        f0 = 1.0 / (math.pi * param * (1.0 + (shift / param) ** 2))
    else:
        shift = _student_t_quantile(param, tau)
        f0 = float(stats.t.pdf(shift, param))

    return ErrorDistribution(kind=kind, param=param, tau=tau, shift=shift, f0=f0)


def _design_factor(d: int, rho: float) -> np.ndarray:
    """Lower Cholesky factor of the Toeplitz correlation rho^|j-k|"""
    return linalg.cholesky(linalg.toeplitz(rho ** np.arange(d)), lower=True)


def generate(sc: SimScenario, rep: int) -> Tuple[Dataset, np.ndarray]:
    """
    Draw replication rep of a scenario

    The stream is derived from (seed, rep) alone, so every replication is
    reproducible on its own. The design is drawn before the errors.

    Returns:
        (dataset, errors) with y = X beta0 + errors
    """
    if not (0 <= rep < sc.reps):
        raise ContractViolation(f"Replication index {rep} out of range for {sc.reps} replications")

    rng = np.random.default_rng(np.random.SeedSequence([sc.seed, rep]))
    X = rng.standard_normal((sc.n, sc.d))
    if sc.design == DesignKind.GAUSSIAN_CORRELATED and sc.rho != 0.0:
        X = X @ _design_factor(sc.d, sc.rho).T
    eps = sc.error.sample(rng, sc.n)
    return Dataset(y=X @ sc.beta0 + eps, X=X), eps


def assumption_report(ds: Dataset, tuning: Optional[SeloTuning] = None) -> AssumptionReport:
    """
    Design eigenvalue bounds, row-norm growth and, given a tuning pair, rate diagnostics

    Args:
        ds: Dataset to inspect
        tuning: Optional (lambda, gamma) to compare against the sqrt(d) n^(-3/2)
            gamma bound and the lambda sqrt(n / d) growth condition
    """
    gram = ds.X.T @ ds.X / ds.n
    eigs = linalg.eigh((gram + gram.T) / 2.0, eigvals_only=True)
    max_row_norm = float(np.max(np.linalg.norm(ds.X, axis=1)))
    alpha_n = math.sqrt(ds.d / ds.n)

    extra = {}
    if tuning is not None:
        gamma_bound = math.sqrt(ds.d) * ds.n ** -1.5
        extra = {
            "gamma_bound": gamma_bound,
            "gamma_ratio": tuning.gamma / gamma_bound,
            "lambda_rate": tuning.lambda_ * math.sqrt(ds.n / ds.d),
            "d_over_n": ds.d / ds.n,
        }

    return AssumptionReport(
        lambda_min=max(0.0, float(eigs[0])),
        lambda_max=float(eigs[-1]),
        max_row_norm=max_row_norm,
        alpha_n=alpha_n,
        a3_ratio=max_row_norm * alpha_n,
        **extra,
    )
