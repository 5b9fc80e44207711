"""From-scratch one-class baseline detectors sharing a fit/score interface.

All three consume the same embedding matrices as the autoencoder and score
with the same polarity (higher = more anomalous), so evaluation treats every
detector uniformly.
"""

from .iforest import IsolationForest, c_factor, iforest_fit, iforest_score
from .ocsvm import OneClassSVM, ocsvm_fit, ocsvm_score, rbf_kernel
from .pca import PCADetector, pca_fit, pca_score

__all__ = [
    "IsolationForest",
    "OneClassSVM",
    "PCADetector",
    "c_factor",
    "iforest_fit",
    "iforest_score",
    "ocsvm_fit",
    "ocsvm_score",
    "pca_fit",
    "pca_score",
    "rbf_kernel",
]
