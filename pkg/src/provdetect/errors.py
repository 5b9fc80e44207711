"""Exception and warning types shared across the package."""

from __future__ import annotations


class ProvDetectError(Exception):
    """Base class for all package-specific errors."""


class InvalidRecord(ProvDetectError):
    """A provenance record violates a type invariant.

    Attributes:
        field: name of the offending field.
        reason: human-readable cause.
    """

    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class InvalidConfig(ProvDetectError):
    """A generator or pipeline configuration is unusable."""


class CountExceedsDataset(ProvDetectError):
    """Asked to inject more anomalies than there are records."""


class ParseError(ProvDetectError):
    """A JSONL line is malformed or violates the record schema.

    Attributes:
        line_number: 1-based line number of the offending line.
        reason: human-readable cause.
    """

    def __init__(self, line_number: int, reason: str):
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"line {line_number}: {reason}")


class ZeroVector(ProvDetectError):
    """Normalization of an all-zero vector was requested."""


class BackendUnavailable(ProvDetectError):
    """The remote embedding backend cannot be reached or is not serving."""


class DimensionMismatch(ProvDetectError):
    """Input width disagrees with the model or backend dimension."""


class CacheCorrupt(ProvDetectError):
    """The embedding cache file is structurally damaged (magic/digest check failed)."""


class EmptyTrainingSet(ProvDetectError):
    """Training was requested on zero usable rows."""


class ConvergenceFailure(ProvDetectError):
    """An iterative solver hit its iteration cap before reaching tolerance.

    Attributes:
        residual: the violation measure at the point of giving up.
    """

    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (residual={residual:g})")


class DegenerateData(ProvDetectError):
    """The training data carries no usable variance."""


class SingleClass(ProvDetectError):
    """A metric needing both classes was given only one."""


class PerplexityTooLarge(ProvDetectError):
    """t-SNE perplexity exceeds what the sample count can support."""


class NoAnomaliesWarning(UserWarning):
    """A labeled split was requested but the corpus contains no anomalies."""


class DegenerateDataWarning(UserWarning):
    """Training data was degenerate but the model remains usable (constant scores)."""
