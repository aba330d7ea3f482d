"""
Configuration and result models for BIC tuning selection
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, NamedTuple, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.models import CoefficientVector, IndexSet
from src.solver.models import FitResult


class SnPolicy(str, Enum):
    """How the BIC inflation factor S_n is chosen"""
    AUTO = "auto"
    FIXED = "fixed"
    FORMULA = "formula"


class BicConfig(BaseModel):
    """BIC criterion settings; grids left as None fall back to the scale-aware defaults"""
    model_config = ConfigDict(frozen=True)

    sn_policy: SnPolicy = SnPolicy.AUTO
    sn_fixed: Optional[float] = Field(None, gt=0, allow_inf_nan=False)
    a_exponent: float = Field(0.4, gt=0, lt=0.5)
    c_cap: float = Field(1.0, gt=0, allow_inf_nan=False)
    loss_floor: float = Field(1e-12, gt=0)
    lambda_grid: Optional[Tuple[float, ...]] = None
    gamma_grid: Optional[Tuple[float, ...]] = None
    threads: Optional[int] = Field(None, ge=0)

    @field_validator("lambda_grid", "gamma_grid")
    @classmethod
    def validate_grid(cls, v):
        if v is None:
            return v
        if len(v) == 0:
            raise ValueError("grid must be nonempty")
        if any(not (x > 0 and math.isfinite(x)) for x in v):
            raise ValueError(f"grid values must be positive and finite: {v}")
        return v

    @model_validator(mode="after")
    def validate_policy(self):
        if self.sn_policy == SnPolicy.FIXED and self.sn_fixed is None:
            raise ValueError("sn_policy 'fixed' needs sn_fixed")
        return self


class BicScore(BaseModel):
    """BIC value of one fitted model together with the pieces it is built from"""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    value: float
    mean_loss: float = Field(ge=0)
    k_nonzero: int = Field(ge=0)
    sn: float = Field(gt=0)
    n: int = Field(ge=2)
    lambda_: float = Field(alias="lambda")
    gamma: float
    feasible: bool = True

    def reconstruct(self, loss_floor: float) -> float:
        """Recompute the BIC value from the stored fields"""
        return math.log(max(self.mean_loss, loss_floor)) + math.log(self.n) / self.n * self.sn * self.k_nonzero

    def sort_key(self) -> Tuple[float, int, float, float]:
        """Smaller BIC first, then fewer nonzeros, then larger lambda, then larger gamma"""
        return self.value, self.k_nonzero, -self.lambda_, -self.gamma

    def to_dict(self) -> dict:
        return self.model_dump(by_alias=True)


class BicOrdering(NamedTuple):
    """BIC values of the true, an over-fitted and an under-fitted index set"""
    bic_true: float
    bic_over: float
    bic_under: float


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of a BIC grid search"""
    best: BicScore
    beta_hat: CoefficientVector
    active_set: IndexSet
    scoreboard: List[BicScore]
    excluded_count: int
    sn: float
    cap: int
    fit: FitResult
    grid_shape: Tuple[int, int]

    def to_dict(self) -> dict:
        """JSON-ready view; the scoreboard goes to its own CSV"""
        return {
            "best": self.best.to_dict(),
            "beta_hat": [float(b) for b in self.beta_hat],
            "active_set": self.active_set.to_list(),
            "excluded_count": self.excluded_count,
            "sn": self.sn,
            "cap": self.cap,
            "grid_shape": list(self.grid_shape),
            "fit": self.fit.to_dict(),
        }
