"""Anomaly detection for process provenance logs.

Records flow through five context views to natural-language sentences, then
to dense embeddings; a benign-only autoencoder scores each process by
reconstruction error, evaluated against isolation-forest, one-class SVM, and
PCA baselines.
"""

from .errors import (
    BackendUnavailable,
    CacheCorrupt,
    ConvergenceFailure,
    CountExceedsDataset,
    DegenerateData,
    DegenerateDataWarning,
    DimensionMismatch,
    EmptyTrainingSet,
    InvalidConfig,
    InvalidRecord,
    NoAnomaliesWarning,
    ParseError,
    PerplexityTooLarge,
    ProvDetectError,
    SingleClass,
    ZeroVector,
)
from .records import NetFlow, ProcessRecord, ProvenanceEvent, View, project, validate_record

__version__ = "0.1.0"

__all__ = [
    "BackendUnavailable",
    "CacheCorrupt",
    "ConvergenceFailure",
    "CountExceedsDataset",
    "DegenerateData",
    "DegenerateDataWarning",
    "DimensionMismatch",
    "EmptyTrainingSet",
    "InvalidConfig",
    "InvalidRecord",
    "NetFlow",
    "NoAnomaliesWarning",
    "ParseError",
    "PerplexityTooLarge",
    "ProcessRecord",
    "ProvDetectError",
    "ProvenanceEvent",
    "SingleClass",
    "View",
    "ZeroVector",
    "__version__",
    "project",
    "validate_record",
]
