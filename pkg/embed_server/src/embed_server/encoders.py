"""Encoder implementations behind the embedding endpoint.

Both encoders share one duck type: ``model_id``, ``dim``, and
``encode(texts, normalize) -> (n, dim) float array``.  The service sees
nothing else, so swapping the real model for the stub changes no wire
behavior except the vectors themselves.
"""

from __future__ import annotations

import hashlib
from typing import Protocol, Sequence

import numpy as np

DEFAULT_MODEL = "sentence-transformers/all-mpnet-base-v2"
DEFAULT_DIM = 768


class EncoderProtocol(Protocol):
    model_id: str
    dim: int

    def encode(self, texts: Sequence[str], normalize: bool = True) -> np.ndarray: ...


class StubEncoder:
    """Deterministic stand-in: unit vectors seeded from each text's digest.

    Properties the service relies on hold by construction: fixed dimension,
    determinism across processes, distinct texts giving (almost surely)
    distinct directions.  Vectors carry no semantics.
    """

    def __init__(self, dim: int = DEFAULT_DIM):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.model_id = f"stub-{dim}"

    def encode(self, texts: Sequence[str], normalize: bool = True) -> np.ndarray:
        out = np.empty((len(texts), self.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            digest = hashlib.sha256(text.encode("utf-8")).digest()
            seed = int.from_bytes(digest[:8], "little")
            row = np.random.default_rng(seed).standard_normal(self.dim)
            if normalize:
                row = row / np.linalg.norm(row)
            out[i] = row
        return out


class SentenceTransformerEncoder:
    """Frozen sentence-transformer encoder (mean pooling over masked tokens).

    The pooling convention comes from the model's own pooling config, so the
    service inherits the published behavior of the model family.  Weights
    load in ``__init__``; construct on a worker thread to keep /healthz
    responsive during startup.
    """

    def __init__(self, model_name: str = DEFAULT_MODEL):
        from sentence_transformers import SentenceTransformer

        self._model = SentenceTransformer(model_name)
        self.model_id = model_name.rsplit("/", 1)[-1]
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts: Sequence[str], normalize: bool = True) -> np.ndarray:
        vectors = self._model.encode(
            list(texts),
            normalize_embeddings=normalize,
            convert_to_numpy=True,
            show_progress_bar=False,
        )
        return np.asarray(vectors, dtype=np.float64)
