"""Isolation forest: anomalies are points that random axis-aligned splits isolate quickly.

Each of the (default 100) trees is grown on a seeded subsample of
ψ = min(256, n) rows.  A node picks a split attribute uniformly among the
attributes that still vary in its data, then a split value uniformly inside
that attribute's [min, max]; growth stops at height ⌈log2 ψ⌉ or when a single
point (or an all-constant slab) remains.  A point's anomaly score is

    s(x) = 2^(−E[h(x)] / c(ψ))

where h(x) is the traversal depth plus the average-path-length adjustment
c(leaf_size) at truncated leaves, and c(n) = 2·H(n−1) − 2(n−1)/n with H the
harmonic number (c(1) = 0).  Scores always land strictly inside (0, 1).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateDataWarning, DimensionMismatch
from ..rng import Xoshiro256StarStar, derive_seed

DEFAULT_TREES = 100
MAX_SUBSAMPLE = 256


def c_factor(n: int) -> float:
    """Expected unsuccessful-search path length in a BST of n points; c(1) = 0."""
    if n <= 1:
        return 0.0
    h = math.fsum(1.0 / i for i in range(1, n))  # H(n-1), exact summation order
    return 2.0 * h - 2.0 * (n - 1) / n


def _grow(X: np.ndarray, rows: np.ndarray, depth: int, limit: int,
          rng: Xoshiro256StarStar) -> dict:
    size = rows.shape[0]
    if size <= 1 or depth >= limit:
        return {"size": int(size)}
    data = X[rows]
    lo = data.min(axis=0)
    hi = data.max(axis=0)
    varying = np.flatnonzero(hi > lo)
    if varying.size == 0:
        return {"size": int(size)}
    attr = int(varying[rng.randbelow(varying.size)])
    value = rng.uniform(float(lo[attr]), float(hi[attr]))
    mask = data[:, attr] < value
    left_rows = rows[mask]
    right_rows = rows[~mask]
    if left_rows.size == 0 or right_rows.size == 0:
        # uniform() can return the exact lower bound; degenerate split → leaf
        return {"size": int(size)}
    return {
        "attr": attr,
        "value": float(value),
        "left": _grow(X, left_rows, depth + 1, limit, rng),
        "right": _grow(X, right_rows, depth + 1, limit, rng),
    }


def _tree_paths(node: dict, X: np.ndarray, rows: np.ndarray, depth: int,
                out: np.ndarray) -> None:
    if "size" in node:
        out[rows] = depth + c_factor(node["size"])
        return
    mask = X[rows, node["attr"]] < node["value"]
    _tree_paths(node["left"], X, rows[mask], depth + 1, out)
    _tree_paths(node["right"], X, rows[~mask], depth + 1, out)


@dataclass
class IsolationForest:
    """A fitted forest: tree structures plus the normalization constant c(ψ)."""

    trees: list[dict]
    subsample: int
    height_limit: int
    dim: int
    seed: int

    def path_lengths(self, X: np.ndarray) -> np.ndarray:
        """Average adjusted path length per row across all trees."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.dim:
            raise DimensionMismatch(f"row width {X.shape[1]} != model dim {self.dim}")
        total = np.zeros(X.shape[0], dtype=np.float64)
        rows = np.arange(X.shape[0])
        scratch = np.empty(X.shape[0], dtype=np.float64)
        for tree in self.trees:
            _tree_paths(tree, X, rows, 0, scratch)
            total += scratch
        return total / len(self.trees)

    def score(self, X: np.ndarray) -> np.ndarray:
        """Anomaly scores in (0, 1); higher = isolated sooner = more anomalous."""
        expected = self.path_lengths(X)
        return np.power(2.0, -expected / c_factor(self.subsample))

    def to_dict(self) -> dict:
        """JSON-able serialization (splits as floats); inverse of from_dict."""
        return {
            "trees": self.trees,
            "subsample": self.subsample,
            "height_limit": self.height_limit,
            "dim": self.dim,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "IsolationForest":
        return cls(
            trees=obj["trees"],
            subsample=obj["subsample"],
            height_limit=obj["height_limit"],
            dim=obj["dim"],
            seed=obj["seed"],
        )


def iforest_fit(train: np.ndarray, n_trees: int = DEFAULT_TREES, seed: int = 0) -> IsolationForest:
    """Fit an isolation forest on ψ = min(256, n) seeded subsamples per tree.

    Per-tree seeds derive from ``seed`` by a documented stage split, so trees
    could be grown in parallel without changing the result.

    Warns:
        DegenerateDataWarning: if all training rows are identical — every tree
            is a single leaf and scores are constant (the model stays usable).
    """
    X = np.asarray(train, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("training matrix must be 2-D with at least 2 rows")
    n = X.shape[0]
    if bool(np.all(X == X[0])):
        warnings.warn("all training rows identical; scores will be constant",
                      DegenerateDataWarning, stacklevel=2)
    psi = min(MAX_SUBSAMPLE, n)
    limit = math.ceil(math.log2(psi))
    trees = []
    for t in range(n_trees):
        rng = Xoshiro256StarStar(derive_seed(seed, f"tree-{t}"))
        sub = np.array(rng.sample_indices(n, psi), dtype=np.intp)
        trees.append(_grow(X[sub], np.arange(psi), 0, limit, rng))
    return IsolationForest(trees=trees, subsample=psi, height_limit=limit,
                           dim=X.shape[1], seed=seed)


def iforest_score(model: IsolationForest, X: np.ndarray) -> np.ndarray:
    """Module-level alias for :meth:`IsolationForest.score`."""
    return model.score(X)
