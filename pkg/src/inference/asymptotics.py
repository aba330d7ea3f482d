"""
Asymptotic-normality tools for the selected coefficients

On the event that the true support is selected, sqrt(n) f(0) u'(beta_hat - beta0)
divided by sqrt(tau (1 - tau) u' Sigma^{-1} u) is asymptotically standard normal.
Everything involving Sigma^{-1} goes through a Cholesky solve.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import numpy.typing as npt
from scipy import linalg
from scipy.stats import norm

from src.core.models import Dataset, IndexSet, TauLike, tau_value
from src.utils.errors import ContractViolation, SingularMatrixError

logger = logging.getLogger(__name__)

# Smallest/largest eigenvalue ratio below which Sigma is treated as singular
SINGULAR_RTOL = 1e-10
MIN_KDE_RESIDUALS = 20


@dataclass(frozen=True)
class SigmaEstimate:
    """Restricted Gram matrix n^{-1} sum X_{i,A} X_{i,A}' with its eigenvalue extremes"""
    matrix: np.ndarray
    min_eig: float
    max_eig: float
    singular: bool

    @classmethod
    def from_matrix(cls, matrix: npt.ArrayLike) -> "SigmaEstimate":
        matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
        if matrix.shape[0] != matrix.shape[1]:
            raise ContractViolation(f"Sigma must be square, got shape {matrix.shape}")
        if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-10):
            raise ContractViolation("Sigma must be symmetric")

        eigs = linalg.eigh(matrix, eigvals_only=True)
        min_eig, max_eig = float(eigs[0]), float(eigs[-1])
        singular = not (max_eig > 0 and min_eig >= SINGULAR_RTOL * max_eig)
        if singular:
            logger.warning(f"Gram matrix is singular (eigenvalues {min_eig:.3g} .. {max_eig:.3g})")

        matrix = matrix.copy()
        matrix.setflags(write=False)
        return cls(matrix=matrix, min_eig=min_eig, max_eig=max_eig, singular=singular)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def solve(self, rhs: npt.ArrayLike) -> np.ndarray:
        """Sigma^{-1} rhs by Cholesky; refused when Sigma is flagged singular"""
        if self.singular:
            raise SingularMatrixError(
                f"Refusing to invert a singular Gram matrix (min eigenvalue {self.min_eig:.3g})"
            )
        return linalg.cho_solve(linalg.cho_factor(self.matrix), np.asarray(rhs, dtype=np.float64))


@dataclass(frozen=True)
class AsymptoticContext:
    """Everything the limiting distribution of u'(beta_hat_A - beta0_A) depends on"""
    sigma: SigmaEstimate
    f0: float
    tau: float
    n: int
    u: np.ndarray
    _quad: Optional[float] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.sigma, np.ndarray):
            object.__setattr__(self, "sigma", SigmaEstimate.from_matrix(self.sigma))
        object.__setattr__(self, "tau", tau_value(self.tau))

        u = np.asarray(self.u, dtype=np.float64).reshape(-1)
        if u.shape[0] != self.sigma.dim:
            raise ContractViolation(f"Direction has length {u.shape[0]}, Sigma is {self.sigma.dim}x{self.sigma.dim}")
        if abs(np.linalg.norm(u) - 1.0) > 1e-10:
            raise ContractViolation(f"Direction must have unit length, got norm {np.linalg.norm(u)}")
        if not (self.f0 > 0 and math.isfinite(self.f0)):
            raise ContractViolation(f"f0 must be positive, got {self.f0}")
        if self.n < 1:
            raise ContractViolation(f"n must be positive, got {self.n}")
        object.__setattr__(self, "u", u)

    def quad_form(self) -> float:
        """u' Sigma^{-1} u"""
        if self._quad is None:
            object.__setattr__(self, "_quad", float(self.u @ self.sigma.solve(self.u)))
        return self._quad

    def std_error(self) -> float:
        """Standard deviation of u' beta_hat_A under the normal limit"""
        return math.sqrt(self.tau * (1.0 - self.tau) * self.quad_form()) / (math.sqrt(self.n) * self.f0)

    def _check(self, values: npt.ArrayLike, name: str) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        if values.shape[0] != self.sigma.dim:
            raise ContractViolation(f"{name} has length {values.shape[0]}, expected {self.sigma.dim}")
        return values


@dataclass(frozen=True)
class ConfidenceInterval:
    """Symmetric interval for u' beta0_A"""
    lower: float
    upper: float
    center: float
    half_width: float
    level: float

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "center": self.center,
            "half_width": self.half_width,
            "level": self.level,
        }


def sigma_hat(ds: Dataset, A: IndexSet) -> SigmaEstimate:
    """
    Gram matrix of the columns in A, n^{-1} sum_i X_{i,A} X_{i,A}'

    Raises:
        ContractViolation: If A is empty or over a different number of columns
    """
    if len(A) == 0:
        raise ContractViolation("sigma_hat needs a nonempty index set")
    XA = ds.subset_columns(A).X
    gram = XA.T @ XA / ds.n
    return SigmaEstimate.from_matrix((gram + gram.T) / 2.0)


def standardized_stat(ctx: AsymptoticContext, beta_hat_A: npt.ArrayLike, beta0_A: npt.ArrayLike) -> float:
    """
    Z = sqrt(n) f0 u'(beta_hat_A - beta0_A) / sqrt(tau (1 - tau) u' Sigma^{-1} u)

    Raises:
        SingularMatrixError: If Sigma is flagged singular
    """
    diff = ctx._check(beta_hat_A, "beta_hat_A") - ctx._check(beta0_A, "beta0_A")
    return float(ctx.u @ diff) / ctx.std_error()


def confidence_interval(ctx: AsymptoticContext, beta_hat_A: npt.ArrayLike, level: float) -> ConfidenceInterval:
    """
    Normal-limit interval u'beta_hat_A +/- z_{(1+level)/2} * std_error

    Raises:
        ContractViolation: If level is outside (0, 1)
        SingularMatrixError: If Sigma is flagged singular
    """
    if not (0.0 < level < 1.0):
        raise ContractViolation(f"level must lie in (0, 1), got {level}")
    center = float(ctx.u @ ctx._check(beta_hat_A, "beta_hat_A"))
    half = float(norm.ppf((1.0 + level) / 2.0)) * ctx.std_error()
    return ConfidenceInterval(lower=center - half, upper=center + half, center=center, half_width=half, level=level)


def estimate_f0(residuals: npt.ArrayLike, bandwidth: Optional[float] = None) -> float:
    """
    Gaussian kernel density estimate of the residual density at zero

    Default bandwidth is 1.06 * min(sd, IQR / 1.349) * n^(-1/5). This is for
    real data only; simulations use the analytic density.

    Raises:
        ContractViolation: With fewer than 20 residuals or when they are all equal
    """
    r = np.asarray(residuals, dtype=np.float64).reshape(-1)
    if r.size < MIN_KDE_RESIDUALS:
        raise ContractViolation(
            f"estimate_f0 needs at least {MIN_KDE_RESIDUALS} residuals, got {r.size}; pass f0 explicitly"
        )
    if np.all(r == r[0]):
        raise ContractViolation("Residuals are all identical; pass f0 explicitly")

    if bandwidth is None:
        sd = float(np.std(r, ddof=1))
        q75, q25 = np.percentile(r, [75, 25])
        spread = min(sd, (q75 - q25) / 1.349)
        if spread <= 0:
            spread = sd
        bandwidth = 1.06 * spread * r.size ** -0.2
    elif not (bandwidth > 0 and math.isfinite(bandwidth)):
        raise ContractViolation(f"bandwidth must be positive, got {bandwidth}")

    f0 = float(np.mean(norm.pdf(r / bandwidth)) / bandwidth)
    if f0 <= 0:
        raise ContractViolation("Density estimate at zero vanished; pass f0 explicitly or widen the bandwidth")
    logger.debug(f"estimate_f0: bandwidth={bandwidth:.4g}, f0={f0:.4g}")
    return f0


def asymptotic_variance(tau: TauLike, f0: float) -> float:
    """Limiting variance tau (1 - tau) / f0^2 of the rescaled estimator"""
    tau = tau_value(tau)
    if not (f0 > 0):
        raise ContractViolation(f"f0 must be positive, got {f0}")
    return tau * (1.0 - tau) / (f0 * f0)


def oracle_linearization(
    ds: Dataset,
    A: IndexSet,
    epsilon: npt.ArrayLike,
    tau: TauLike,
    f0: float
) -> np.ndarray:
    """
    First-order representation of beta_hat_A - beta0_A on the oracle event

    -(1 / (n f0)) Sigma_A^{-1} sum_i X_{i,A} (1{eps_i <= 0} - tau)
    """
    tau = tau_value(tau)
    eps = np.asarray(epsilon, dtype=np.float64).reshape(-1)
    if eps.shape[0] != ds.n:
        raise ContractViolation(f"epsilon has length {eps.shape[0]}, expected n={ds.n}")
    if not (f0 > 0):
        raise ContractViolation(f"f0 must be positive, got {f0}")

    score = ds.subset_columns(A).X.T @ ((eps <= 0) - tau)
    return -sigma_hat(ds, A).solve(score) / (ds.n * f0)
