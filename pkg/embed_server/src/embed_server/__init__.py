"""Sentence-embedding HTTP service.

Exposes ``POST /v1/embed`` (batched texts to dense vectors) and
``GET /healthz`` (503 while weights load, 200 after).  The default encoder
is a frozen sentence-transformer; a deterministic stub encoder supports
offline development and tests.
"""

from .app import BATCH_LIMIT, create_app, main
from .encoders import EncoderProtocol, SentenceTransformerEncoder, StubEncoder

__version__ = "0.1.0"

__all__ = [
    "BATCH_LIMIT",
    "EncoderProtocol",
    "SentenceTransformerEncoder",
    "StubEncoder",
    "create_app",
    "main",
    "__version__",
]
