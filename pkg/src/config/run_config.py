"""
Run configuration assembled from a config file and command-line flags
"""
import math
from enum import Enum
from pathlib import Path
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.config.settings import Config
from src.penalty.selo import SeloTuning
from src.selection.models import BicConfig
from src.simulation.models import DEFAULT_LAMBDA_SCALE, DesignKind, ErrorKind
from src.solver.models import FitConfig, InitKind

# Signal placed in the leading coordinates when simulate gets no beta0
DEFAULT_SIGNAL = (2.0, -2.0, 1.5)


class CommandKind(str, Enum):
    """CLI subcommands"""
    FIT = "fit"
    SELECT = "select"
    SIMULATE = "simulate"
    CHECK = "check"


class RunConfig(BaseModel):
    """One validated CLI invocation"""
    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    command: CommandKind
    input_path: Optional[Path] = Field(None, alias="input")
    output_path: Optional[Path] = Field(None, alias="output")
    tau: float = Field(0.5, gt=0, lt=1)
    lambda_: Optional[float] = Field(None, alias="lambda", gt=0, allow_inf_nan=False)
    gamma: Optional[float] = Field(None, gt=0, allow_inf_nan=False)
    lambda_grid: Optional[Tuple[float, ...]] = None
    gamma_grid: Optional[Tuple[float, ...]] = None
    level: float = Field(0.95, gt=0, lt=1)
    seed: int = Field(default_factory=lambda: Config.DEFAULT_SEED, ge=0, lt=2 ** 64)
    threads: int = Field(default_factory=lambda: Config.DEFAULT_THREADS, ge=0)

    # Solver
    init: InitKind = InitKind.L1_WARM
    max_outer: int = Field(30, ge=1)
    max_sweeps: int = Field(200, ge=1)

    # Simulation
    n: Optional[int] = Field(None, ge=2)
    d: Optional[int] = Field(None, ge=1)
    beta0: Optional[Tuple[float, ...]] = None
    reps: int = Field(100, ge=1)
    error: ErrorKind = ErrorKind.NORMAL
    error_param: float = Field(1.0, gt=0, allow_inf_nan=False)
    design: DesignKind = DesignKind.GAUSSIAN_IID
    rho: float = Field(0.0, gt=-1, lt=1)
    lambda_scale: float = Field(DEFAULT_LAMBDA_SCALE, gt=0)
    ladder: Optional[Tuple[int, ...]] = None
    bic: bool = False

    @field_validator("lambda_grid", "gamma_grid")
    @classmethod
    def validate_grid(cls, v):
        if v is None:
            return v
        if len(v) == 0:
            raise ValueError("grid must be nonempty")
        if any(not (x > 0 and math.isfinite(x)) for x in v):
            raise ValueError(f"grid values must be positive and finite: {list(v)}")
        return v

    @field_validator("ladder")
    @classmethod
    def validate_ladder(cls, v):
        if v is not None and (len(v) < 2 or any(n < 2 for n in v)):
            raise ValueError("ladder needs at least two sample sizes, each at least 2")
        return v

    @model_validator(mode="after")
    def validate_command(self):
        if (self.lambda_ is None) != (self.gamma is None):
            raise ValueError("lambda and gamma must be given together")

        if self.command in (CommandKind.FIT, CommandKind.SELECT, CommandKind.CHECK):
            if self.input_path is None:
                raise ValueError(f"'{self.command.value}' needs --input")
        if self.command == CommandKind.FIT and self.lambda_ is None:
            raise ValueError("'fit' needs --lambda and --gamma")

        if self.command == CommandKind.SIMULATE:
            if self.n is None and self.ladder is None:
                raise ValueError("'simulate' needs --n or --ladder")
            if self.beta0 is not None and not all(math.isfinite(b) for b in self.beta0):
                raise ValueError("beta0 must be finite")
            if self.beta0 is not None and self.d is not None and self.d < len(self.beta0):
                raise ValueError(f"d={self.d} is smaller than the {len(self.beta0)} entries of beta0")
            for n in self.ladder or (self.n,):
                d = self.dimension(n)
                if d >= n:
                    raise ValueError(f"'simulate' needs d < n, got d={d} for n={n}")
        return self

    def dimension(self, n: int) -> int:
        """Covariate count of the simulated design at sample size n; --d applies to single scenarios only"""
        if self.d is not None and self.ladder is None:
            return self.d
        return max(len(self.signal()), int(math.floor(2.0 * n ** 0.4)))

    def tuning(self) -> Optional[SeloTuning]:
        if self.lambda_ is None:
            return None
        return SeloTuning(lambda_=self.lambda_, gamma=self.gamma)

    def fit_config(self) -> FitConfig:
        return FitConfig(init=self.init, max_outer=self.max_outer, max_sweeps=self.max_sweeps, threads=self.threads)

    def bic_config(self) -> BicConfig:
        return BicConfig(lambda_grid=self.lambda_grid, gamma_grid=self.gamma_grid, threads=self.threads)

    def signal(self) -> Tuple[float, ...]:
        """Coefficient vector for simulate, before padding to d"""
        return self.beta0 if self.beta0 is not None else DEFAULT_SIGNAL

    def echo(self) -> dict:
        """
        Settings that determine the results, for the report provenance block

        Thread count and output location do not change any result and are
        left out so reports compare byte for byte.
        """
        return self.model_dump(mode="json", by_alias=True, exclude={"threads", "output_path"})
