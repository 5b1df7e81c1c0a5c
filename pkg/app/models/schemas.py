"""
Pydantic Schemas
Run configuration documents and JSON report models with validation.

Every document carries `schema_version`; the report models double as the
documented report schema (see README).
"""
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


SCHEMA_VERSION = 1


# ==================== Enums ====================

class FamilyName(str, Enum):
    LOGISTIC = "logistic"
    POISSON = "poisson"


class FitStatus(str, Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    SEPARATED = "separated"
    SINGULAR = "singular"


class DesignKind(str, Enum):
    IID_GAUSSIAN = "iid_gaussian"
    GAUSSIAN_WITH_COVARIANCE = "gaussian_with_covariance"


class CovarianceKind(str, Enum):
    AR1 = "ar1"
    COMPOUND = "compound"


class SelectionMethod(str, Enum):
    AUTO = "auto"
    CHAIN = "chain"
    EXACT = "exact"


class VersionedModel(BaseModel):
    """Base for documents read from disk"""
    schema_version: int = SCHEMA_VERSION

    @field_validator("schema_version")
    @classmethod
    def validate_version(cls, v):
        if v != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {v} (expected {SCHEMA_VERSION})")
        return v


# ==================== Hyperparameters ====================

class Hyperparams(BaseModel):
    """
    Prior and fractional-likelihood hyperparameters.

    Defaults are the recommended lambda = 1e-3, alpha = 0.999, A4 = 0.05.
    `a7` only feeds the constraint checker (lambda = A6 * p^-A7).
    """
    model_config = ConfigDict(populate_by_name=True)

    alpha: float = Field(0.999, gt=0, le=1)
    lam:   float = Field(1e-3, gt=0, alias="lambda")
    a4:    float = Field(0.05, gt=0)
    a7:    float = Field(0.0, ge=0)
    delta1: float = Field(0.0, ge=0)
    s_max: int = Field(10, ge=1)
    c_dev: Optional[float] = Field(None, gt=0)

    def validate_for(self, n: int, p: int) -> "Hyperparams":
        if self.s_max > min(n, p):
            raise ValueError(f"s_max={self.s_max} exceeds min(n, p)={min(n, p)}")
        return self


class FitOptions(BaseModel):
    max_iter:       int   = Field(100, gt=0)
    grad_tol:       float = Field(1e-8, gt=0)
    step_halvings:  int   = Field(30, gt=0)
    theta_norm_cap: Optional[float] = Field(None, gt=0)  # None = family default


class ChainSettings(BaseModel):
    n_iter:   int = Field(50_000, gt=0)
    n_burnin: Optional[int] = Field(None, ge=0)  # None = n_iter // 10
    n_chains: int = Field(1, ge=1)
    seed:     int = Field(0, ge=0)
    init:     List[int] = Field(default_factory=list)
    top_k:    Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def check_burnin(self):
        if self.n_burnin is not None and self.n_burnin >= self.n_iter:
            raise ValueError("n_burnin must be smaller than n_iter")
        return self

    @property
    def burnin(self) -> int:
        return self.n_iter // 10 if self.n_burnin is None else self.n_burnin


# ==================== Run Configuration ====================

class RunConfig(VersionedModel):
    """Configuration document for `fit`; command-line flags override it."""
    data:     Optional[str] = None
    response: Optional[str] = None
    family:   FamilyName = FamilyName.LOGISTIC
    hyperparams: Hyperparams = Field(default_factory=Hyperparams)
    chain:    ChainSettings = Field(default_factory=ChainSettings)
    output:   Optional[str] = None
    threads:  Optional[int] = Field(None, ge=1)


class CovarianceSpec(BaseModel):
    kind: CovarianceKind = CovarianceKind.AR1
    rho:  float = Field(0.5, gt=-1, lt=1)


class SimConfig(VersionedModel):
    family: FamilyName = FamilyName.LOGISTIC
    n:  int = Field(..., ge=1)
    p:  int = Field(..., ge=1)
    s0: int = Field(..., ge=0)
    signal_values: Optional[List[float]] = None
    signal_range:  Optional[Tuple[float, float]] = None
    design: DesignKind = DesignKind.IID_GAUSSIAN
    covariance: Optional[CovarianceSpec] = None
    seed: int = Field(0, ge=0)
    replications: int = Field(10, ge=1)
    hyperparams: Hyperparams = Field(default_factory=Hyperparams)
    chain: ChainSettings = Field(default_factory=lambda: ChainSettings(n_iter=20_000))
    method: SelectionMethod = SelectionMethod.AUTO
    threads: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def check_consistency(self):
        if self.hyperparams.s_max > min(self.n, self.p):
            raise ValueError("s_max must not exceed min(n, p)")
        if self.s0 > self.hyperparams.s_max:
            raise ValueError("s0 must not exceed s_max")
        if self.signal_values is not None:
            if len(self.signal_values) != self.s0:
                raise ValueError("signal_values must have exactly s0 entries")
            if any(v <= 0 for v in self.signal_values):
                raise ValueError("signal magnitudes must be positive")
        if self.signal_range is not None:
            lo, hi = self.signal_range
            if not 0 < lo <= hi:
                raise ValueError("signal_range must satisfy 0 < min <= max")
        if self.design == DesignKind.GAUSSIAN_WITH_COVARIANCE and self.covariance is None:
            raise ValueError("covariance is required for gaussian_with_covariance designs")
        return self


# ==================== Hyperparameter Check ====================

class HyperparamReport(BaseModel):
    """Advisory evaluation of A4 > A6 p^-A7 and A4 + A7/2 > alpha*16*C_dev + log_p(s0) + delta1."""
    model_config = ConfigDict(populate_by_name=True)

    alpha:  float
    lam:    float = Field(..., alias="lambda")
    a4:     float
    a6:     float
    a7:     float
    delta1: float
    c_dev:  float
    p:      int
    s0:     int
    slack_first:  float
    slack_second: float
    satisfied_first:  bool
    satisfied_second: bool
    min_a4: float

    @property
    def satisfied(self) -> bool:
        return self.satisfied_first and self.satisfied_second


# ==================== Posterior Reports ====================

class TopModel(BaseModel):
    indices:     List[int]
    labels:      List[str] = Field(default_factory=list)
    visits:      int
    log_weight:  float
    log_prior:   float
    log_laplace: float


class PosteriorSummary(BaseModel):
    inclusion_prob:  List[float]
    top_models:      List[TopModel]
    acceptance_rate: float = Field(..., ge=0, le=1)
    n_iter:   int
    n_burnin: int
    n_chains: int = 1

    @field_validator("inclusion_prob")
    @classmethod
    def validate_probs(cls, v):
        if any(not 0.0 <= q <= 1.0 for q in v):
            raise ValueError("inclusion probabilities must lie in [0, 1]")
        return v


class ChainDigest(BaseModel):
    chain: int
    seed_entropy: List[int]
    acceptance_rate: float
    modal_model: List[int]


class FitReport(VersionedModel):
    family: FamilyName
    n: int
    p: int
    labels: List[str]
    seed: int
    config: Dict[str, Any]
    hyperparam_check: HyperparamReport
    summary: PosteriorSummary
    chains: List[ChainDigest]


# ==================== Diagnostics Reports ====================

class SupportDiagnostics(BaseModel):
    indices: List[int]
    xi_norm: float
    delta_mis: float
    delta_mis_tilde: float
    zeta: float
    rho_min: float
    rho_max: float
    kappa_n: float
    k_cubic_lower: float


class SparsityDiagnostics(BaseModel):
    s_level: int
    phi1: float
    phi2: float


class QuadResidualSample(BaseModel):
    epsilon: float
    residual: float


class DiagnosticsReport(VersionedModel):
    family: FamilyName
    n: int
    p: int
    supports: List[SupportDiagnostics]
    sparsity: List[SparsityDiagnostics]
    sigma_min_sq: float
    sigma_max_sq: float
    nu_n: float
    kappa_n: Optional[float] = None
    beta_min: Optional[float] = None
    beta_min_threshold: Optional[float] = None
    quad_residual: List[QuadResidualSample] = Field(default_factory=list)


# ==================== Simulation Reports ====================

class ReplicationSummary(BaseModel):
    replication: int
    method: SelectionMethod
    true_support: List[int]
    modal_model: List[int]
    mass_on_true: float = Field(..., ge=0, le=1)
    false_positives: int
    false_negatives: int


class SelectionMetrics(VersionedModel):
    exact_recovery_rate: float = Field(..., ge=0, le=1)
    mean_mass_on_true:   float = Field(..., ge=0, le=1)
    mean_false_positives: float
    mean_false_negatives: float
    config: Dict[str, Any]
    replications: List[ReplicationSummary]


# ==================== Oracle Reports ====================

class OracleCheck(BaseModel):
    name: str
    value: float
    tolerance: float
    passed: bool


class OracleReport(VersionedModel):
    family: FamilyName
    seed: int
    checks: List[OracleCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)
