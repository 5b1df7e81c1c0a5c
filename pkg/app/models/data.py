"""
In-memory domain types
Numeric containers backed by numpy arrays; configs and reports live in schemas.py.
"""
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import DataValidationError, DimensionMismatchError
from models.schemas import FitStatus


# ==================== Dataset ====================

@dataclass(frozen=True)
class Dataset:
    """Fixed design `x` (n x p), response `y` (n) and column labels."""
    x: np.ndarray
    y: np.ndarray
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        x = np.ascontiguousarray(np.asarray(self.x, dtype=float))
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if x.ndim != 2:
            raise DimensionMismatchError(f"design must be 2-D, got shape {x.shape}")
        n, p = x.shape
        if n < 1 or p < 1:
            raise DimensionMismatchError(f"design must have n >= 1 and p >= 1, got {x.shape}")
        if y.shape[0] != n:
            raise DimensionMismatchError(f"response has {y.shape[0]} entries, design has {n} rows")
        if not np.all(np.isfinite(x)):
            row, col = np.argwhere(~np.isfinite(x))[0]
            raise DataValidationError("non-finite covariate", line=int(row) + 1, column=str(col))
        if not np.all(np.isfinite(y)):
            row = int(np.flatnonzero(~np.isfinite(y))[0])
            raise DataValidationError("non-finite response", line=row + 1)
        labels = tuple(self.labels) if self.labels else tuple(f"x{j}" for j in range(p))
        if len(labels) != p:
            raise DimensionMismatchError(f"{len(labels)} labels for {p} columns")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def columns(self, support: "ModelSupport") -> np.ndarray:
        return self.x[:, list(support.indices)]

    def with_response(self, y: np.ndarray) -> "Dataset":
        return Dataset(self.x, y, self.labels)

    def check_family(self, family, lines: Optional[Sequence[int]] = None, column: Optional[str] = None) -> "Dataset":
        """Raise DataValidationError when y is outside the family's support."""
        family.validate_response(self.y, lines=lines, column=column)
        return self


# ==================== Model Support ====================

@dataclass(frozen=True, order=True)
class ModelSupport:
    """
    Canonical support: strictly increasing 0-based column indices.
    Hashable; the canonical tuple is the cache key.
    """
    indices: Tuple[int, ...] = ()

    def __post_init__(self):
        idx = tuple(int(j) for j in self.indices)
        if any(j < 0 for j in idx):
            raise ValueError(f"negative column index in {idx}")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise ValueError(f"indices must be strictly increasing: {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, indices: Iterable[int]) -> "ModelSupport":
        """Canonicalize (sort, drop duplicates)."""
        return cls(tuple(sorted({int(j) for j in indices})))

    @classmethod
    def empty(cls) -> "ModelSupport":
        return cls(())

    @property
    def size(self) -> int:
        return len(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, j) -> bool:
        return int(j) in self.indices

    def check_bounds(self, p: int) -> "ModelSupport":
        if self.indices and self.indices[-1] >= p:
            raise DimensionMismatchError(f"column index {self.indices[-1]} out of range for p={p}")
        return self

    def add(self, j: int) -> "ModelSupport":
        return ModelSupport.of(self.indices + (j,))

    def remove(self, j: int) -> "ModelSupport":
        return ModelSupport(tuple(k for k in self.indices if k != j))

    def swap(self, out: int, into: int) -> "ModelSupport":
        return ModelSupport.of([k for k in self.indices if k != out] + [into])

    def issuperset(self, other: "ModelSupport") -> bool:
        return set(other.indices) <= set(self.indices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=int)

    def __str__(self) -> str:
        return "{" + ",".join(str(j) for j in self.indices) + "}"


def support_of(theta: np.ndarray, tol: float = 0.0) -> ModelSupport:
    """Support of a full-dimensional parameter vector."""
    return ModelSupport(tuple(int(j) for j in np.flatnonzero(np.abs(np.asarray(theta)) > tol)))


# ==================== Fit Result ====================

@dataclass(frozen=True)
class FitResult:
    """Per-model maximum-likelihood fit and its Fisher factorization."""
    support: ModelSupport
    theta_hat: np.ndarray
    loglik_at_mle: float
    fisher_chol: np.ndarray      # lower triangular, F = L L'
    logdet_fisher: float
    status: FitStatus
    iterations: int
    grad_norm: float
    loglik_path: Tuple[float, ...] = field(default=(), repr=False)

    @property
    def size(self) -> int:
        return self.support.size

    @property
    def converged(self) -> bool:
        return self.status == FitStatus.CONVERGED

    @property
    def fisher(self) -> np.ndarray:
        return self.fisher_chol @ self.fisher_chol.T


# ==================== Posterior Weights ====================

@dataclass(frozen=True)
class LogWeight:
    """
    Unnormalized log posterior weight with its audit components.
    value = log_prior + log_laplace when both are finite, -inf otherwise.
    """
    value: float
    log_prior: float
    log_laplace: float
    status: Optional[FitStatus] = None

    @property
    def is_valid(self) -> bool:
        return bool(np.isfinite(self.value))


@dataclass(frozen=True)
class ChainState:
    current: ModelSupport
    current_logweight: LogWeight
    iteration: int = 0
    n_accepted: int = 0
