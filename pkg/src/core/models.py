"""
Core data types: datasets, quantile levels, coefficient vectors and index sets
"""
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

from src.utils.errors import ContractViolation

# Coefficient vectors are plain float64 arrays of length d
CoefficientVector = npt.NDArray[np.float64]


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array, dtype=np.float64)
    array.setflags(write=False)
    return array


class QuantileLevel(BaseModel):
    """Quantile index tau in the open interval (0, 1)"""
    model_config = ConfigDict(frozen=True)

    tau: float = Field(gt=0.0, lt=1.0)

    @classmethod
    def coerce(cls, value: Union["QuantileLevel", float]) -> "QuantileLevel":
        """Accept either a QuantileLevel or a bare float"""
        if isinstance(value, QuantileLevel):
            return value
        try:
            tau = float(value)
        except (TypeError, ValueError) as e:
            raise ContractViolation(f"tau must be a real number, got {value!r}") from e
        if not (0.0 < tau < 1.0):
            raise ContractViolation(f"tau must lie in (0, 1), got {tau!r}")
        return cls(tau=tau)


TauLike = Union[QuantileLevel, float]


def tau_value(tau: TauLike) -> float:
    """Validated float value of a quantile level"""
    return QuantileLevel.coerce(tau).tau


@dataclass(frozen=True)
class Dataset:
    """
    Response vector and dense design matrix

    Rows of X are the observations X_i; an intercept, when wanted, is an
    explicit all-ones column supplied by the caller.
    """
    y: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64)
        X = np.asarray(self.X, dtype=np.float64)

        if y.ndim != 1:
            raise ContractViolation(f"y must be one-dimensional, got shape {y.shape}")
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise ContractViolation(f"X must be two-dimensional, got shape {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise ContractViolation(f"X has {X.shape[0]} rows but y has length {y.shape[0]}")
        if y.shape[0] < 1 or X.shape[1] < 1:
            raise ContractViolation(f"Dataset needs n >= 1 and d >= 1, got n={X.shape[0]}, d={X.shape[1]}")
        if not np.all(np.isfinite(y)):
            raise ContractViolation("y contains non-finite values")
        if not np.all(np.isfinite(X)):
            raise ContractViolation("X contains non-finite values")

        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "X", _frozen(X))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def subset_columns(self, index_set: "IndexSet") -> "Dataset":
        """Dataset restricted to the columns of a nonempty index set"""
        if index_set.d != self.d:
            raise ContractViolation(f"Index set is over {index_set.d} columns, dataset has {self.d}")
        if len(index_set) == 0:
            raise ContractViolation("Cannot restrict a dataset to an empty index set")
        return Dataset(y=self.y, X=self.X[:, list(index_set.members)])


def as_coefficients(beta: Sequence[float], d: int) -> CoefficientVector:
    """Validate a coefficient vector of length d and return it as float64"""
    beta = np.asarray(beta, dtype=np.float64)
    if beta.ndim != 1 or beta.shape[0] != d:
        raise ContractViolation(f"Coefficient vector must have length {d}, got shape {beta.shape}")
    if not np.all(np.isfinite(beta)):
        raise ContractViolation("Coefficient vector contains non-finite values")
    return beta


@dataclass(frozen=True)
class IndexSet:
    """Strictly increasing set of column indices in {0, ..., d-1}"""
    members: Tuple[int, ...]
    d: int
    _mask: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.d < 1:
            raise ContractViolation(f"Index set dimension must be >= 1, got {self.d}")
        members = tuple(int(j) for j in self.members)
        if any(b <= a for a, b in zip(members, members[1:])):
            raise ContractViolation(f"Index set members must be strictly increasing: {members}")
        if members and (members[0] < 0 or members[-1] >= self.d):
            raise ContractViolation(f"Index set members must lie in [0, {self.d - 1}]: {members}")

        mask = np.zeros(self.d, dtype=bool)
        mask[list(members)] = True
        mask.setflags(write=False)
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "_mask", mask)

    @classmethod
    def of(cls, members: Iterable[int], d: int) -> "IndexSet":
        """Build from any iterable; duplicates are rejected, order is normalized"""
        members = [int(j) for j in members]
        if len(set(members)) != len(members):
            raise ContractViolation(f"Index set has duplicate members: {members}")
        return cls(tuple(sorted(members)), d)

    @classmethod
    def from_mask(cls, mask: Sequence[bool]) -> "IndexSet":
        mask = np.asarray(mask, dtype=bool)
        return cls(tuple(int(j) for j in np.flatnonzero(mask)), mask.shape[0])

    @classmethod
    def from_beta(cls, beta: Sequence[float], zero_tol: float = 0.0) -> "IndexSet":
        """Indices with |beta_j| > zero_tol"""
        return cls.from_mask(np.abs(np.asarray(beta, dtype=np.float64)) > zero_tol)

    @classmethod
    def full(cls, d: int) -> "IndexSet":
        return cls(tuple(range(d)), d)

    @classmethod
    def empty(cls, d: int) -> "IndexSet":
        return cls((), d)

    @property
    def mask(self) -> np.ndarray:
        return self._mask

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __contains__(self, j: object) -> bool:
        return j in self.members

    def _check_same_space(self, other: "IndexSet"):
        if other.d != self.d:
            raise ContractViolation(f"Index sets live in different spaces (d={self.d} vs d={other.d})")

    def union(self, other: "IndexSet") -> "IndexSet":
        self._check_same_space(other)
        return IndexSet.from_mask(self.mask | other.mask)

    def difference(self, other: "IndexSet") -> "IndexSet":
        self._check_same_space(other)
        return IndexSet.from_mask(self.mask & ~other.mask)

    def intersection(self, other: "IndexSet") -> "IndexSet":
        self._check_same_space(other)
        return IndexSet.from_mask(self.mask & other.mask)

    def complement(self) -> "IndexSet":
        return IndexSet.from_mask(~self.mask)

    def issubset(self, other: "IndexSet") -> bool:
        self._check_same_space(other)
        return bool(np.all(other.mask[self.mask]))

    def is_strict_subset(self, other: "IndexSet") -> bool:
        return self.issubset(other) and len(self) < len(other)

    def to_list(self) -> list:
        return list(self.members)
