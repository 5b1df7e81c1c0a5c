from .data import Dataset, ModelSupport, FitResult, LogWeight, ChainState, support_of
from .schemas import (
    SCHEMA_VERSION, FamilyName, FitStatus, DesignKind, CovarianceKind, SelectionMethod,
    Hyperparams, FitOptions, ChainSettings, RunConfig, CovarianceSpec, SimConfig,
    HyperparamReport, TopModel, PosteriorSummary, ChainDigest, FitReport,
    SupportDiagnostics, SparsityDiagnostics, QuadResidualSample, DiagnosticsReport,
    ReplicationSummary, SelectionMetrics, OracleCheck, OracleReport,
)
