"""PCA anomaly detector: squared residual distance to the dominant benign subspace.

Fitting centers the data, eigendecomposes the sample covariance (divisor
n−1), and keeps the smallest number of leading axes whose cumulative
explained-variance ratio reaches the threshold (default 95%).  Axis signs are
pinned (largest-magnitude entry positive) so fits are byte-reproducible.

A point's score is ‖(x−μ) − PPᵀ(x−μ)‖²: zero anywhere inside the retained
subspace, and exactly the squared perpendicular distance outside it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateData, DimensionMismatch

DEFAULT_VARIANCE = 0.95


@dataclass
class PCADetector:
    """Fitted model: train mean, retained orthonormal axes (rows), their variances."""

    mean: np.ndarray
    components: np.ndarray        # k × d, orthonormal rows, variance-descending
    explained_variance: np.ndarray
    total_variance: float
    variance_threshold: float

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    def score(self, X: np.ndarray) -> np.ndarray:
        """Squared reconstruction residual per row; higher = more anomalous."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.mean.shape[0]:
            raise DimensionMismatch(
                f"row width {X.shape[1]} != model dim {self.mean.shape[0]}"
            )
        centered = X - self.mean
        projected = (centered @ self.components.T) @ self.components
        residual = centered - projected
        return np.sum(residual * residual, axis=1)

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "components": self.components.tolist(),
            "explained_variance": self.explained_variance.tolist(),
            "total_variance": self.total_variance,
            "variance_threshold": self.variance_threshold,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "PCADetector":
        return cls(
            mean=np.asarray(obj["mean"], dtype=np.float64),
            components=np.asarray(obj["components"], dtype=np.float64),
            explained_variance=np.asarray(obj["explained_variance"], dtype=np.float64),
            total_variance=obj["total_variance"],
            variance_threshold=obj["variance_threshold"],
        )


def pca_fit(train: np.ndarray, variance_threshold: float = DEFAULT_VARIANCE) -> PCADetector:
    """Fit the detector: keep the fewest axes reaching the cumulative variance threshold.

    Raises:
        DegenerateData: if the training data has zero total variance.
    """
    X = np.asarray(train, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("training matrix must be 2-D with at least 2 rows")
    if not 0.0 < variance_threshold <= 1.0:
        raise ValueError(f"variance_threshold must be in (0, 1], got {variance_threshold}")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = (centered.T @ centered) / (X.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.maximum(eigvals[order], 0.0)  # clamp eigh roundoff
    eigvecs = eigvecs[:, order]
    total = float(eigvals.sum())
    if total == 0.0:
        raise DegenerateData("training data has zero total variance")
    cumulative = np.cumsum(eigvals) / total
    k = int(np.searchsorted(cumulative, variance_threshold - 1e-12) + 1)
    components = eigvecs[:, :k].T.copy()
    # pin the eigenvector sign ambiguity: largest-|entry| coordinate positive
    for row in components:
        pivot = int(np.argmax(np.abs(row)))
        if row[pivot] < 0:
            row *= -1.0
    return PCADetector(
        mean=mean,
        components=components,
        explained_variance=eigvals[:k].copy(),
        total_variance=total,
        variance_threshold=variance_threshold,
    )


def pca_score(model: PCADetector, X: np.ndarray) -> np.ndarray:
    """Module-level alias for :meth:`PCADetector.score`."""
    return model.score(X)
