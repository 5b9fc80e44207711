"""Dense autoencoder trained on benign embeddings; reconstruction error scores anomalies.

The network is a symmetric ReLU stack (default 768→512→128→512→768, identity
output) trained with mean-squared reconstruction error and a hand-rolled Adam
optimizer (lr 0.001, β1 0.9, β2 0.999, ε 1e-8) for 15 epochs at batch size
128.  Only benign rows are ever fitted; at score time, rows the model cannot
reconstruct well — behavior it never saw — receive high scores.

All math runs in float64.  Training is bit-deterministic given (data, seed,
config): weight init and epoch shuffles draw from the package PRNG, the final
partial batch is always included, and the loss history records full-pass
train/validation MSE after each epoch on an internal 90/10 benign split.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DimensionMismatch, EmptyTrainingSet
from .rng import Xoshiro256StarStar

logger = logging.getLogger(__name__)

DEFAULT_WIDTHS = (768, 512, 128, 512, 768)

_CKPT_MAGIC = b"AEM1"


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters. ``seed`` drives epoch shuffling and the val split."""

    epochs: int = 15
    batch_size: int = 128
    seed: int = 0
    val_fraction: float = 0.1

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError(f"val_fraction must be in [0, 1), got {self.val_fraction}")


@dataclass(frozen=True)
class TrainHistory:
    """Per-epoch full-pass losses, recorded after each epoch's updates."""

    train_mse: tuple[float, ...]
    val_mse: tuple[float, ...]


class AdamOptimizer:
    """Adam with bias correction, updating a parameter list in place."""

    def __init__(self, lr: float = 0.001, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: list[np.ndarray] | None = None
        self._v: list[np.ndarray] | None = None

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        """One Adam update; increments the step counter."""
        if self._m is None:
            self._m = [np.zeros_like(p) for p in params]
            self._v = [np.zeros_like(p) for p in params]
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self._m, self._v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(g)
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class AutoEncoder:
    """Symmetric dense autoencoder with ReLU hidden layers and identity output."""

    def __init__(self, widths: tuple[int, ...] = DEFAULT_WIDTHS, seed: int = 0):
        widths = tuple(int(w) for w in widths)
        if len(widths) < 3:
            raise ValueError("need at least input, latent, and output layers")
        if any(w < 1 for w in widths):
            raise ValueError("layer widths must be positive")
        if widths != widths[::-1]:
            raise ValueError(f"widths must be symmetric about the latent layer: {widths}")
        self.widths = widths
        self.seed = seed
        self.epochs_trained = 0
        rng = Xoshiro256StarStar(seed)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(widths, widths[1:]):
            a = math.sqrt(6.0 / (fan_in + fan_out))
            flat = np.array(rng.randoms(fan_in * fan_out), dtype=np.float64)
            self.weights.append((2.0 * a * flat - a).reshape(fan_in, fan_out))
            self.biases.append(np.zeros(fan_out, dtype=np.float64))

    @property
    def dim(self) -> int:
        return self.widths[0]

    def _check_width(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise DimensionMismatch(
                f"batch width {X.shape[-1] if X.ndim else '?'} != input width {self.dim}"
            )
        return X

    def _forward(self, X: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Returns (pre-activations per layer, activations per layer incl. input)."""
        zs: list[np.ndarray] = []
        acts: list[np.ndarray] = [X]
        a = X
        last = len(self.weights) - 1
        for li, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ W + b
            zs.append(z)
            a = np.maximum(z, 0.0) if li < last else z
            acts.append(a)
        return zs, acts

    def reconstruct(self, X: np.ndarray) -> np.ndarray:
        X = self._check_width(X)
        return self._forward(X)[1][-1]

    def forward_mse(self, batch: np.ndarray) -> tuple[np.ndarray, float]:
        """Reconstruction of a batch plus the mean over all n·d squared residuals."""
        batch = self._check_width(batch)
        recon = self._forward(batch)[1][-1]
        mse = float(np.mean((recon - batch) ** 2))
        return recon, mse

    def gradients(self, batch: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Exact gradients of the batch MSE w.r.t. every weight and bias.

        The ReLU subgradient at exactly 0 is 0.
        """
        batch = self._check_width(batch)
        zs, acts = self._forward(batch)
        n, d = batch.shape
        delta = 2.0 * (acts[-1] - batch) / (n * d)
        grad_w: list[np.ndarray] = [np.empty(0)] * len(self.weights)
        grad_b: list[np.ndarray] = [np.empty(0)] * len(self.biases)
        for li in range(len(self.weights) - 1, -1, -1):
            grad_w[li] = acts[li].T @ delta
            grad_b[li] = delta.sum(axis=0)
            if li > 0:
                delta = (delta @ self.weights[li].T) * (zs[li - 1] > 0)
        return grad_w, grad_b

    def fit(self, train: Union[np.ndarray, "object"], config: TrainConfig = TrainConfig()) -> TrainHistory:
        """Train on benign rows only; returns the per-epoch loss history.

        Accepts a raw matrix or anything with a ``.rows`` attribute.
        """
        X = getattr(train, "rows", train)
        X = self._check_width(np.asarray(X, dtype=np.float64))
        n = X.shape[0]
        if n == 0:
            raise EmptyTrainingSet("no training rows")
        rng = Xoshiro256StarStar(config.seed)
        if config.val_fraction > 0:
            n_val = max(1, int(n * config.val_fraction))
        else:
            n_val = 0
        if n - n_val < 1:
            raise EmptyTrainingSet(
                f"{n} rows leave no training data after a {config.val_fraction:.0%} validation split"
            )
        idx = list(range(n))
        rng.shuffle(idx)
        val_X = X[idx[:n_val]]
        train_X = X[idx[n_val:]]
        n_train = train_X.shape[0]

        optimizer = AdamOptimizer()
        params = self.weights + self.biases
        order = list(range(n_train))
        hist_train: list[float] = []
        hist_val: list[float] = []
        for epoch in range(config.epochs):
            rng.shuffle(order)
            for start in range(0, n_train, config.batch_size):
                batch = train_X[order[start:start + config.batch_size]]
                grad_w, grad_b = self.gradients(batch)
                optimizer.step(params, grad_w + grad_b)
            train_mse = self.forward_mse(train_X)[1]
            val_mse = self.forward_mse(val_X)[1] if n_val else float("nan")
            hist_train.append(train_mse)
            hist_val.append(val_mse)
            logger.info("epoch %d/%d: train mse %.3e, val mse %.3e",
                        epoch + 1, config.epochs, train_mse, val_mse)
        self.epochs_trained += config.epochs
        return TrainHistory(train_mse=tuple(hist_train), val_mse=tuple(hist_val))

    def score(self, matrix: Union[np.ndarray, "object"]) -> np.ndarray:
        """Per-row mean squared reconstruction error; higher = more anomalous."""
        X = getattr(matrix, "rows", matrix)
        X = self._check_width(np.asarray(X, dtype=np.float64))
        recon = self._forward(X)[1][-1]
        return np.mean((recon - X) ** 2, axis=1)

    def save(self, path: Union[str, os.PathLike]) -> None:
        """Checkpoint: magic, JSON header, then float32 LE params (weights, bias per layer)."""
        header = json.dumps(
            {"widths": list(self.widths), "seed": self.seed, "epochs": self.epochs_trained},
            separators=(",", ":"),
        ).encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(_CKPT_MAGIC + header + b"\n")
            for W, b in zip(self.weights, self.biases):
                fh.write(W.astype("<f4").tobytes(order="C"))
                fh.write(b.astype("<f4").tobytes(order="C"))

    @classmethod
    def load(cls, path: Union[str, os.PathLike]) -> "AutoEncoder":
        with open(path, "rb") as fh:
            blob = fh.read()
        if not blob.startswith(_CKPT_MAGIC):
            raise ValueError(f"{path}: not a model checkpoint (bad magic)")
        nl = blob.index(b"\n", len(_CKPT_MAGIC))
        header = json.loads(blob[len(_CKPT_MAGIC):nl].decode("utf-8"))
        model = cls.__new__(cls)
        model.widths = tuple(header["widths"])
        model.seed = header["seed"]
        model.epochs_trained = header["epochs"]
        model.weights = []
        model.biases = []
        offset = nl + 1
        for fan_in, fan_out in zip(model.widths, model.widths[1:]):
            w_bytes = 4 * fan_in * fan_out
            W = np.frombuffer(blob, dtype="<f4", count=fan_in * fan_out, offset=offset)
            offset += w_bytes
            b = np.frombuffer(blob, dtype="<f4", count=fan_out, offset=offset)
            offset += 4 * fan_out
            model.weights.append(W.reshape(fan_in, fan_out).astype(np.float64))
            model.biases.append(b.astype(np.float64))
        if offset != len(blob):
            raise ValueError(f"{path}: checkpoint has trailing bytes")
        return model
