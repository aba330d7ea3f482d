"""
Solver configuration and result models
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core.models import CoefficientVector, IndexSet
from src.penalty.selo import SeloTuning

logger = logging.getLogger(__name__)


class InitKind(str, Enum):
    """Starting point of the reweighting loop"""
    ZEROS = "zeros"
    L1_WARM = "l1_warm"


class FitConfig(BaseModel):
    """Iteration limits and tolerances for a single fit"""
    model_config = ConfigDict(frozen=True)

    max_outer: int = Field(30, ge=1)
    max_sweeps: int = Field(200, ge=1)
    obj_tol: float = Field(1e-8, gt=0)
    zero_tol: float = Field(1e-8, gt=0)
    inner_tol: float = Field(1e-10, gt=0)
    init: InitKind = InitKind.L1_WARM
    escape_max_dim: int = Field(12, ge=0)
    local_search: bool = True
    search_max_dim: int = Field(4, ge=0)
    max_search_rounds: int = Field(20, ge=0)
    support_starts_max_dim: int = Field(2, ge=0)
    threads: int = Field(1, ge=0)  # 0 = auto


@dataclass(frozen=True)
class FitResult:
    """Penalized estimate together with its convergence record"""
    beta_hat: CoefficientVector
    active_set: IndexSet
    objective: float
    outer_iters: int
    converged: bool
    residuals: np.ndarray
    objective_history: Tuple[float, ...]
    inner_sweeps: int
    tuning: SeloTuning
    tau: float

    @property
    def k_nonzero(self) -> int:
        return len(self.active_set)

    def to_dict(self) -> dict:
        """JSON-ready view of the fit"""
        return {
            "beta_hat": [float(b) for b in self.beta_hat],
            "active_set": self.active_set.to_list(),
            "k_nonzero": self.k_nonzero,
            "objective": self.objective,
            "outer_iters": self.outer_iters,
            "converged": self.converged,
            "inner_sweeps": self.inner_sweeps,
            "objective_history": list(self.objective_history),
            "tuning": self.tuning.as_dict(),
            "tau": self.tau,
        }


@dataclass
class FitPath:
    """Fits over a (lambda, gamma) grid; lambdas are stored in decreasing order"""
    lambdas: Tuple[float, ...]
    gammas: Tuple[float, ...]
    cells: Dict[Tuple[float, float], FitResult] = field(default_factory=dict)

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.lambdas), len(self.gammas)

    def get(self, lambda_: float, gamma: float) -> FitResult:
        return self.cells[(lambda_, gamma)]

    def __iter__(self) -> Iterator[Tuple[float, float, FitResult]]:
        for gamma in self.gammas:
            for lambda_ in self.lambdas:
                yield lambda_, gamma, self.cells[(lambda_, gamma)]

    def __len__(self) -> int:
        return len(self.cells)

    def sparsity_violations(self) -> List[Tuple[float, float, float]]:
        """
        Places where the model size grows with lambda

        Returns:
            (gamma, smaller lambda, larger lambda) for each adjacent pair whose
            larger-lambda fit has more nonzeros
        """
        violations = []
        for gamma in self.gammas:
            # self.lambdas is decreasing
            for big, small in zip(self.lambdas, self.lambdas[1:]):
                k_big = self.cells[(big, gamma)].k_nonzero
                k_small = self.cells[(small, gamma)].k_nonzero
                if k_big > k_small:
                    logger.info(
                        f"Non-monotone path at gamma={gamma}: "
                        f"{k_big} nonzeros at lambda={big} vs {k_small} at lambda={small}"
                    )
                    violations.append((gamma, small, big))
        return violations
