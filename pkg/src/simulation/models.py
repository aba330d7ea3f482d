"""
Scenario, error-law and result models for Monte Carlo experiments
"""
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from src.core.models import CoefficientVector, IndexSet
from src.penalty.selo import SeloTuning
from src.utils.errors import ContractViolation

# Penalty level scale in lambda_n = lambda_scale * sqrt(d log n / n)
DEFAULT_LAMBDA_SCALE = 0.12


class ErrorKind(str, Enum):
    """Base law of the regression errors"""
    NORMAL = "normal"
    STUDENT_T = "student_t"
    LAPLACE = "laplace"
    CAUCHY = "cauchy"


class DesignKind(str, Enum):
    """Distribution of the design rows"""
    GAUSSIAN_IID = "gaussian_iid"
    GAUSSIAN_CORRELATED = "gaussian_correlated"


@dataclass(frozen=True)
class ErrorDistribution:
    """
    Error law shifted so that its tau-quantile sits at zero

    param is the scale (normal sigma, laplace b, cauchy s) or the degrees of
    freedom (student_t nu). f0 is the density of the shifted law at zero.
    """
    kind: ErrorKind
    param: float
    tau: float
    shift: float
    f0: float

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw shifted errors (tau-quantile zero) from rng"""
        if self.kind == ErrorKind.NORMAL:
            draws = rng.normal(0.0, self.param, size=size)
        elif self.kind == ErrorKind.LAPLACE:
            draws = rng.laplace(0.0, self.param, size=size)
        elif self.kind == ErrorKind.CAUCHY:
            draws = self.param * rng.standard_cauchy(size=size)
        else:
            draws = rng.standard_t(self.param, size=size)
        return draws - self.shift

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "param": self.param, "tau": self.tau, "shift": self.shift, "f0": self.f0}


@dataclass(frozen=True)
class SimScenario:
    """Data-generating truth and replication plan for one Monte Carlo experiment"""
    n: int
    beta0: CoefficientVector
    error: ErrorDistribution
    seed: int
    reps: int
    design: DesignKind = DesignKind.GAUSSIAN_IID
    rho: float = 0.0
    lambda_scale: float = DEFAULT_LAMBDA_SCALE
    tuning: Optional[SeloTuning] = None
    with_bic: bool = False
    support: IndexSet = field(init=False)
    min_signal: float = field(init=False)

    def __post_init__(self):
        beta0 = np.asarray(self.beta0, dtype=np.float64).reshape(-1)
        if beta0.size < 1 or not np.all(np.isfinite(beta0)):
            raise ContractViolation("beta0 must be a nonempty finite vector")
        if self.n < 2:
            raise ContractViolation(f"n must be at least 2, got {self.n}")
        if beta0.size >= self.n:
            raise ContractViolation(f"Scenario needs d < n, got d={beta0.size}, n={self.n}")
        if self.reps < 1:
            raise ContractViolation(f"reps must be at least 1, got {self.reps}")
        if not (0 <= self.seed < 2 ** 64):
            raise ContractViolation(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.design == DesignKind.GAUSSIAN_CORRELATED and not (-1.0 < self.rho < 1.0):
            raise ContractViolation(f"rho must lie in (-1, 1), got {self.rho}")
        if not (self.lambda_scale > 0):
            raise ContractViolation(f"lambda_scale must be positive, got {self.lambda_scale}")

        beta0.setflags(write=False)
        support = IndexSet.from_beta(beta0)
        object.__setattr__(self, "beta0", beta0)
        object.__setattr__(self, "design", DesignKind(self.design))
        object.__setattr__(self, "support", support)
        object.__setattr__(
            self, "min_signal", float(np.min(np.abs(beta0[support.mask]))) if len(support) else 0.0
        )

    @property
    def d(self) -> int:
        return self.beta0.shape[0]

    @property
    def tau(self) -> float:
        return self.error.tau

    @property
    def alpha_n(self) -> float:
        return math.sqrt(self.d / self.n)

    def default_tuning(self) -> SeloTuning:
        """lambda_n = lambda_scale * sqrt(d log n / n), gamma_n = sqrt(d) * n^(-3/2)"""
        return SeloTuning(
            lambda_=self.lambda_scale * math.sqrt(self.d * math.log(self.n) / self.n),
            gamma=math.sqrt(self.d) * self.n ** -1.5,
        )

    def effective_tuning(self) -> SeloTuning:
        return self.tuning or self.default_tuning()

    @classmethod
    def ladder(
        cls,
        n: int,
        signal: Sequence[float],
        error: ErrorDistribution,
        seed: int,
        reps: int,
        **kwargs
    ) -> "SimScenario":
        """Scenario with d_n = floor(2 n^0.4) and the signal in the leading coordinates"""
        d = max(len(signal), int(math.floor(2.0 * n ** 0.4)))
        beta0 = np.zeros(d)
        beta0[:len(signal)] = signal
        return cls(n=n, beta0=beta0, error=error, seed=seed, reps=reps, **kwargs)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "beta0": [float(b) for b in self.beta0],
            "support": self.support.to_list(),
            "min_signal": self.min_signal,
            "error": self.error.to_dict(),
            "design": self.design.value,
            "rho": self.rho,
            "seed": self.seed,
            "reps": self.reps,
            "lambda_scale": self.lambda_scale,
            "tuning": self.effective_tuning().as_dict(),
            "with_bic": self.with_bic,
        }


@dataclass(frozen=True)
class AssumptionReport:
    """Empirical design diagnostics, with optional tuning-rate diagnostics"""
    lambda_min: float
    lambda_max: float
    max_row_norm: float
    alpha_n: float
    a3_ratio: float
    gamma_bound: Optional[float] = None
    gamma_ratio: Optional[float] = None
    lambda_rate: Optional[float] = None
    d_over_n: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ReplicationRecord:
    """Outcome of one replication; failed records carry only the message"""
    rep: int
    failed: bool = False
    message: str = ""
    k_nonzero: Optional[int] = None
    exact_recovery: Optional[bool] = None
    true_positives: Optional[int] = None
    false_positives: Optional[int] = None
    l2_error: Optional[float] = None
    z: Optional[float] = None
    ci_covered: Optional[bool] = None
    linearization_gap: Optional[float] = None
    bic_exact: Optional[bool] = None
    bic_false_positives: Optional[int] = None


@dataclass(frozen=True)
class OracleMetrics:
    """Aggregated support-recovery, error and normality statistics"""
    reps: int
    failures: int
    exact_recovery_rate: float
    tpr: float
    fpr: float
    l2_errors: Tuple[float, ...]
    median_l2: float
    z_samples: Tuple[float, ...]
    z_skipped: int
    ks_to_normal: Optional[float]
    ci_coverage: Optional[float]
    bic_recovery_rate: Optional[float]
    bic_fpr: Optional[float]
    linearization_gap: Optional[float]
    records: Tuple[ReplicationRecord, ...] = field(repr=False)

    def to_dict(self) -> dict:
        """Aggregates only; per-replication rows go to records_frame()"""
        data = asdict(self)
        data.pop("records")
        data["l2_errors"] = list(self.l2_errors)
        data["z_samples"] = list(self.z_samples)
        return data

    def records_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(r) for r in self.records])

    def qq_frame(self) -> pd.DataFrame:
        """Sorted standardized statistics against standard normal quantiles"""
        m = len(self.z_samples)
        probs = (np.arange(1, m + 1) - 0.5) / m if m else np.array([])
        return pd.DataFrame({
            "normal_quantile": stats.norm.ppf(probs),
            "z_sorted": np.asarray(self.z_samples, dtype=float),
        })


@dataclass(frozen=True)
class RateLadder:
    """Per-n results of the rate experiment and the fitted log-log slope"""
    ns: Tuple[int, ...]
    ds: Tuple[int, ...]
    alphas: Tuple[float, ...]
    median_l2: Tuple[float, ...]
    recovery_rates: Tuple[float, ...]
    slope: float
    intercept: float
    metrics: Tuple[OracleMetrics, ...] = field(repr=False)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "n": self.ns,
            "d": self.ds,
            "alpha_n": self.alphas,
            "log_alpha_n": np.log(self.alphas),
            "median_l2": self.median_l2,
            "log_median_l2": np.log(self.median_l2),
            "exact_recovery_rate": self.recovery_rates,
        })

    def to_dict(self) -> dict:
        return {
            "ns": list(self.ns),
            "ds": list(self.ds),
            "alphas": list(self.alphas),
            "median_l2": list(self.median_l2),
            "recovery_rates": list(self.recovery_rates),
            "slope": self.slope,
            "intercept": self.intercept,
        }
