"""Sentence → fixed-dimension unit vectors, with pluggable backends and a disk cache.

Two backends implement the same interface:

* :class:`HashingBackend` — fully offline and deterministic.  Tokens are the
  lowercased whitespace words of the sentence plus every character 3-gram of
  each word; an FNV-1a 64-bit hash of the token picks a bucket (``hash % dim``)
  and a sign (bit 63), ±1 contributions are accumulated and the result is
  L2-normalized.  Near-duplicate sentences share most tokens and therefore
  land near each other.
* :class:`RemoteBackend` — POSTs batches to an embedding HTTP service
  (``/v1/embed``; 256 texts per request) and is identified by the model name
  the service reports on ``/healthz``.

``embed_corpus`` memoizes matrices in a small binary cache file: the magic
bytes ``EMB1``, one JSON manifest line, then the row-major little-endian
float32 block.  A structurally damaged file raises
:class:`~provdetect.errors.CacheCorrupt`; a healthy file built from a
different corpus or backend is silently recomputed and atomically replaced.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Protocol, Sequence, Union

import numpy as np
import requests

from .errors import BackendUnavailable, CacheCorrupt, DimensionMismatch, ZeroVector
from .rng import fnv1a64
from .textualize import SentenceDoc

DEFAULT_DIM = 768
BATCH_LIMIT = 256

_MAGIC = b"EMB1"


def normalize(v: np.ndarray) -> np.ndarray:
    """Scale a vector to unit L2 norm (float64).

    Raises:
        ZeroVector: on all-zero input.
        ValueError: on non-finite entries.
    """
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ZeroVector("cannot normalize an all-zero vector")
    return v / norm


@lru_cache(maxsize=1 << 20)
def _token_hash(token: str) -> int:
    return fnv1a64(token.encode("utf-8"))


def _tokens(text: str) -> list[str]:
    words = text.lower().split()
    toks = list(words)
    for w in words:
        toks.extend(w[i:i + 3] for i in range(len(w) - 2))
    return toks


def hash_embed(text: str, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Deterministic hashed embedding of one sentence (unit-norm float32).

    Raises:
        ZeroVector: if the text contains no tokens (empty/whitespace-only).
    """
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    toks = _tokens(text)
    if not toks:
        raise ZeroVector("cannot embed empty text")
    vec = np.zeros(dim, dtype=np.float64)
    for t in toks:
        h = _token_hash(t)
        idx = h % dim
        vec[idx] += 1.0 if (h >> 63) == 0 else -1.0
    if not vec.any():  # ±1 contributions can cancel exactly
        vec[_token_hash(toks[0]) % dim] = 1.0
    return normalize(vec).astype(np.float32)


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Row-per-sentence embedding matrix plus its provenance manifest."""

    rows: np.ndarray  # n × dim float32, unit rows
    manifest: dict    # backend_id, dim, count, corpus_digest, data_digest


class EmbeddingBackend(Protocol):
    """Anything that can map a batch of sentences to vectors."""

    id: str
    dim: int
    calls: int

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


class HashingBackend:
    """Offline deterministic backend built on :func:`hash_embed`."""

    def __init__(self, dim: int = DEFAULT_DIM):
        if dim < 2:
            raise ValueError(f"dim must be >= 2, got {dim}")
        self.dim = dim
        self.id = f"hash-fnv1a-{dim}"
        self.calls = 0

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        self.calls += 1
        return np.stack([hash_embed(t, self.dim) for t in texts])


class RemoteBackend:
    """HTTP client for the embedding service wire contract.

    The backend id is ``remote:<model>`` where ``<model>`` comes from the
    service's health endpoint at first use, so cache manifests record which
    model produced the vectors.
    """

    def __init__(self, url: str, dim: int = DEFAULT_DIM, timeout: float = 30.0,
                 batch_limit: int = BATCH_LIMIT):
        if batch_limit < 1:
            raise ValueError("batch_limit must be >= 1")
        self.url = url.rstrip("/")
        self.dim = dim
        self.timeout = timeout
        self.batch_limit = batch_limit
        self.calls = 0
        self._id: Optional[str] = None
        self._session = requests.Session()

    @property
    def id(self) -> str:
        if self._id is None:
            health = self._get_health()
            self._id = f"remote:{health.get('model', 'unknown')}"
        return self._id

    def _get_health(self) -> dict:
        try:
            resp = self._session.get(f"{self.url}/healthz", timeout=self.timeout)
        except requests.RequestException as e:
            raise BackendUnavailable(f"embedding service unreachable at {self.url}: {e}") from None
        if resp.status_code != 200:
            raise BackendUnavailable(
                f"embedding service at {self.url} not ready (HTTP {resp.status_code})"
            )
        return resp.json()

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = []
        for start in range(0, len(texts), self.batch_limit):
            chunk = list(texts[start:start + self.batch_limit])
            self.calls += 1
            try:
                resp = self._session.post(
                    f"{self.url}/v1/embed",
                    json={"texts": chunk, "normalize": True},
                    timeout=self.timeout,
                )
            except requests.RequestException as e:
                raise BackendUnavailable(
                    f"embedding service unreachable at {self.url}: {e}"
                ) from None
            if resp.status_code != 200:
                raise BackendUnavailable(
                    f"embedding service returned HTTP {resp.status_code}: {resp.text[:200]}"
                )
            body = resp.json()
            if body.get("dim") != self.dim:
                raise DimensionMismatch(
                    f"service returned dim {body.get('dim')}, expected {self.dim}"
                )
            vectors = np.asarray(body["vectors"], dtype=np.float64)
            if vectors.shape != (len(chunk), self.dim):
                raise DimensionMismatch(
                    f"service returned shape {vectors.shape}, expected {(len(chunk), self.dim)}"
                )
            out.append(vectors)
        return np.vstack(out).astype(np.float32)


def corpus_digest(texts: Sequence[str]) -> str:
    """sha256 over length-prefixed UTF-8 texts — order- and content-sensitive."""
    h = hashlib.sha256()
    for t in texts:
        raw = t.encode("utf-8")
        h.update(struct.pack("<Q", len(raw)))
        h.update(raw)
    return h.hexdigest()


def _write_cache(path: Union[str, os.PathLike], matrix: EmbeddingMatrix) -> None:
    payload = matrix.rows.astype("<f4", copy=False).tobytes(order="C")
    manifest = dict(matrix.manifest)
    manifest["data_digest"] = hashlib.sha256(payload).hexdigest()
    blob = _MAGIC + json.dumps(manifest, separators=(",", ":")).encode("utf-8") + b"\n" + payload
    directory = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".emb-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_cache(path: Union[str, os.PathLike]) -> EmbeddingMatrix:
    """Load a cache file, verifying magic, manifest, and float-block digest.

    Raises:
        CacheCorrupt: on any structural damage.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if not blob.startswith(_MAGIC):
        raise CacheCorrupt(f"{path}: bad magic")
    nl = blob.find(b"\n", len(_MAGIC))
    if nl < 0:
        raise CacheCorrupt(f"{path}: missing manifest line")
    try:
        manifest = json.loads(blob[len(_MAGIC):nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise CacheCorrupt(f"{path}: unparseable manifest") from None
    required = {"backend_id", "dim", "count", "corpus_digest", "data_digest"}
    if not isinstance(manifest, dict) or not required <= set(manifest):
        raise CacheCorrupt(f"{path}: manifest missing fields")
    payload = blob[nl + 1:]
    if hashlib.sha256(payload).hexdigest() != manifest["data_digest"]:
        raise CacheCorrupt(f"{path}: float block digest mismatch")
    dim, count = manifest["dim"], manifest["count"]
    if len(payload) != 4 * dim * count:
        raise CacheCorrupt(f"{path}: float block has wrong length")
    rows = np.frombuffer(payload, dtype="<f4").reshape(count, dim).copy()
    return EmbeddingMatrix(rows=rows, manifest=manifest)


def embed_corpus(corpus: Sequence[SentenceDoc], backend: EmbeddingBackend,
                 cache_path: Optional[Union[str, os.PathLike]] = None) -> EmbeddingMatrix:
    """Embed a sentence corpus, reading/writing the cache when a path is given.

    Row i embeds ``corpus[i]``.  Every row is re-normalized (in float64, then
    stored as float32), so the unit-norm invariant holds regardless of
    backend.  A warm cache hit performs zero backend calls.
    """
    if not corpus:
        raise ValueError("corpus must be non-empty")
    texts = [doc.text for doc in corpus]
    digest = corpus_digest(texts)
    backend_id = backend.id  # may probe a remote service; resolve before cache check
    if cache_path is not None and os.path.exists(cache_path):
        cached = load_cache(cache_path)
        m = cached.manifest
        if (m["backend_id"] == backend_id and m["corpus_digest"] == digest
                and m["dim"] == backend.dim and m["count"] == len(texts)):
            return cached
    raw = backend.embed(texts)
    if raw.shape != (len(texts), backend.dim):
        raise DimensionMismatch(f"backend returned shape {raw.shape}")
    rows = np.empty((len(texts), backend.dim), dtype=np.float32)
    for i in range(len(texts)):
        rows[i] = normalize(raw[i]).astype(np.float32)
    matrix = EmbeddingMatrix(
        rows=rows,
        manifest={
            "backend_id": backend_id,
            "dim": backend.dim,
            "count": len(texts),
            "corpus_digest": digest,
        },
    )
    if cache_path is not None:
        _write_cache(cache_path, matrix)
        return load_cache(cache_path)  # hand back the persisted (digest-stamped) form
    return matrix
