"""One-class SVM: a tight RBF boundary around benign data, fitted by SMO.

The fitted boundary solves the normalized one-class dual

    minimize   ½ αᵀKα
    subject to 0 ≤ α_i ≤ 1/(ν·n),   Σα_i = 1

with K(x, y) = exp(−γ‖x−y‖²), ν = 0.01 (at most ~1% of training points may
fall outside the boundary) and γ = 1/n_features when "auto".  Pairwise
coordinate descent picks the most violating pair (smallest vs. largest
gradient with head-/tailroom), solves the 2-variable subproblem exactly, and
stops when the KKT gap drops below 1e-4.  After convergence, α is projected
exactly onto its constraint set, and the offset ρ is the mean decision value
over unbounded support vectors.

Scores are ρ − Σ α_i K(x_i, x): positive where the data looks unlike training.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from ..errors import ConvergenceFailure, DimensionMismatch

DEFAULT_NU = 0.01
KKT_TOL = 1e-4


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """exp(−γ‖a−b‖²) for every row pair; clipped squared distances guard roundoff."""
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


@dataclass
class OneClassSVM:
    """Fitted model: support vectors, their coefficients, kernel width, offset."""

    support_vectors: np.ndarray  # rows with α > 0
    alpha: np.ndarray            # matching coefficients
    rho: float
    gamma: float
    nu: float
    dim: int

    def decision(self, X: np.ndarray) -> np.ndarray:
        """f(x) = Σ α_i K(x_i, x) − ρ; negative outside the benign boundary."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.dim:
            raise DimensionMismatch(f"row width {X.shape[1]} != model dim {self.dim}")
        K = rbf_kernel(X, self.support_vectors, self.gamma)
        return K @ self.alpha - self.rho

    def score(self, X: np.ndarray) -> np.ndarray:
        """Anomaly score −f(x) = ρ − Σ α_i K(x_i, x); higher = more anomalous."""
        return -self.decision(X)

    def to_dict(self) -> dict:
        return {
            "support_vectors": self.support_vectors.tolist(),
            "alpha": self.alpha.tolist(),
            "rho": self.rho,
            "gamma": self.gamma,
            "nu": self.nu,
            "dim": self.dim,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "OneClassSVM":
        return cls(
            support_vectors=np.asarray(obj["support_vectors"], dtype=np.float64),
            alpha=np.asarray(obj["alpha"], dtype=np.float64),
            rho=obj["rho"],
            gamma=obj["gamma"],
            nu=obj["nu"],
            dim=obj["dim"],
        )


def _project_exact(alpha: np.ndarray, cap: float) -> np.ndarray:
    """Clip to the box exactly, then repair Σα = 1 through one unbounded coordinate."""
    alpha = np.clip(alpha, 0.0, cap)
    total = math.fsum(alpha.tolist())
    if total != 1.0:
        interior = [i for i, a in enumerate(alpha) if 0.0 < a < cap]
        candidates = interior if interior else range(len(alpha))
        # the coordinate with the most slack absorbs the (tiny) discrepancy
        j = max(candidates, key=lambda i: min(alpha[i], cap - alpha[i]))
        rest = math.fsum(np.delete(alpha, j).tolist())
        alpha[j] = min(max(1.0 - rest, 0.0), cap)
    return alpha


def ocsvm_fit(train: np.ndarray, nu: float = DEFAULT_NU,
              gamma: Union[str, float] = "auto", tol: float = KKT_TOL,
              max_iter: int = 0) -> OneClassSVM:
    """Fit the one-class dual by most-violating-pair coordinate descent.

    Args:
        train: n × d benign matrix, n ≥ 1.
        nu: outlier-fraction bound in (0, 1].
        gamma: RBF width, or "auto" for 1/d.
        tol: KKT gap at which to stop.
        max_iter: iteration cap; 0 means max(20000, 100·n).

    Raises:
        ConvergenceFailure: if the cap is reached first (carries the residual gap).
    """
    X = np.asarray(train, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[0] < 1:
        raise ValueError("training matrix must have at least 1 row")
    if not 0.0 < nu <= 1.0:
        raise ValueError(f"nu must be in (0, 1], got {nu}")
    n, d = X.shape
    g = 1.0 / d if gamma == "auto" else float(gamma)
    cap = 1.0 / (nu * n)
    K = rbf_kernel(X, X, g)

    if n == 1:
        return OneClassSVM(support_vectors=X, alpha=np.array([1.0]),
                           rho=float(K[0, 0]), gamma=g, nu=nu, dim=d)

    alpha = np.full(n, 1.0 / n)  # feasible: 1/n ≤ 1/(νn) for ν ≤ 1
    grad = K @ alpha             # ∇(½αᵀKα) = Kα
    if max_iter <= 0:
        max_iter = max(20000, 100 * n)
    eps = 1e-12
    gap = math.inf
    for _ in range(max_iter):
        up = alpha < cap - eps      # room to grow
        down = alpha > eps          # room to shrink
        if not up.any() or not down.any():
            gap = 0.0               # ν=1: the feasible set is a single point
            break
        i = int(np.flatnonzero(up)[np.argmin(grad[up])])
        j = int(np.flatnonzero(down)[np.argmax(grad[down])])
        gap = float(grad[j] - grad[i])
        if gap <= tol:
            break
        denom = float(K[i, i] + K[j, j] - 2.0 * K[i, j])
        if denom > eps:
            delta = gap / denom
        else:
            delta = cap  # flat direction: move as far as the box allows
        delta = min(delta, cap - float(alpha[i]), float(alpha[j]))
        alpha[i] += delta
        alpha[j] -= delta
        grad += delta * (K[:, i] - K[:, j])
    else:
        raise ConvergenceFailure(
            f"SMO did not reach KKT tolerance {tol} in {max_iter} iterations", residual=gap
        )

    alpha = _project_exact(alpha, cap)
    decision = K @ alpha
    margin = 1e-9 * cap
    unbounded = np.flatnonzero((alpha > margin) & (alpha < cap - margin))
    if unbounded.size == 0:
        unbounded = np.flatnonzero(alpha > margin)  # degenerate dual: average over all SVs
    rho = float(np.mean(decision[unbounded]))

    support = np.flatnonzero(alpha > 0.0)
    return OneClassSVM(
        support_vectors=X[support].copy(),
        alpha=alpha[support].copy(),
        rho=rho,
        gamma=g,
        nu=nu,
        dim=d,
    )


def ocsvm_score(model: OneClassSVM, X: np.ndarray) -> np.ndarray:
    """Module-level alias for :meth:`OneClassSVM.score`."""
    return model.score(X)
