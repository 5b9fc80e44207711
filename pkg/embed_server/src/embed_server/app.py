"""FastAPI application implementing the embedding wire contract.

    POST /v1/embed   {"texts": [...], "normalize": true}
                     -> {"model": str, "dim": int, "vectors": [[...], ...]}
    GET  /healthz    -> 503 {"status": "loading"} until the encoder is ready,
                        then 200 {"status": "ok", "model": str}

Malformed bodies answer 400 (never FastAPI's default 422, so clients see one
consistent error code), batches beyond 256 texts answer 413, and /v1/embed
answers 503 before the encoder finishes loading.  Requests are stateless;
encoding may serialize internally, concurrent requests are accepted.
"""

from __future__ import annotations

import argparse
import logging
import threading
from typing import Callable, Optional, Sequence

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .encoders import DEFAULT_MODEL, EncoderProtocol, SentenceTransformerEncoder, StubEncoder

logger = logging.getLogger(__name__)

BATCH_LIMIT = 256
DEFAULT_PORT = 8080


class EncoderHolder:
    """Mutable slot the app reads on every request; thread-safe flip."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._encoder: Optional[EncoderProtocol] = None

    @property
    def encoder(self) -> Optional[EncoderProtocol]:
        with self._lock:
            return self._encoder

    def set(self, encoder: EncoderProtocol) -> None:
        with self._lock:
            self._encoder = encoder


def _bad_request(detail: str) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": detail})


def _validate_texts(texts: object) -> Optional[str]:
    """Returns an error message for invalid payloads, None when acceptable."""
    if not isinstance(texts, list):
        return "texts must be a list of strings"
    if not texts:
        return "texts must not be empty"
    for i, t in enumerate(texts):
        if not isinstance(t, str):
            return f"texts[{i}] is not a string"
        if not t.strip():
            return f"texts[{i}] is empty"
    return None


def create_app(holder: Optional[EncoderHolder] = None) -> FastAPI:
    """Build the service around an encoder holder (empty = still loading)."""
    if holder is None:
        holder = EncoderHolder()
    app = FastAPI(title="embed-server", docs_url=None, redoc_url=None)
    app.state.holder = holder

    @app.exception_handler(RequestValidationError)
    async def _validation_to_400(request: Request, exc: RequestValidationError):
        return _bad_request("malformed request body")

    @app.get("/healthz")
    async def healthz():
        encoder = holder.encoder
        if encoder is None:
            return JSONResponse(status_code=503, content={"status": "loading"})
        return {"status": "ok", "model": encoder.model_id}

    @app.post("/v1/embed")
    async def embed(request: Request):
        encoder = holder.encoder
        if encoder is None:
            return JSONResponse(
                status_code=503, content={"detail": "model is still loading"}
            )
        try:
            body = await request.json()
        except Exception:
            return _bad_request("body is not valid JSON")
        if not isinstance(body, dict):
            return _bad_request("body must be a JSON object")

        texts = body.get("texts")
        error = _validate_texts(texts)
        if error is not None:
            return _bad_request(error)
        if len(texts) > BATCH_LIMIT:
            return JSONResponse(
                status_code=413,
                content={"detail": f"batch of {len(texts)} exceeds limit {BATCH_LIMIT}"},
            )
        normalize = body.get("normalize", True)
        if not isinstance(normalize, bool):
            return _bad_request("normalize must be a boolean")

        vectors = encoder.encode(texts, normalize=normalize)
        return {
            "model": encoder.model_id,
            "dim": encoder.dim,
            "vectors": vectors.tolist(),
        }

    return app


def load_in_background(holder: EncoderHolder,
                       factory: Callable[[], EncoderProtocol]) -> threading.Thread:
    """Start encoder construction on a daemon thread; /healthz stays 503 until done."""

    def _load() -> None:
        encoder = factory()
        holder.set(encoder)
        logger.info("encoder ready: %s (dim %d)", encoder.model_id, encoder.dim)

    thread = threading.Thread(target=_load, name="encoder-load", daemon=True)
    thread.start()
    return thread


def main(argv: Optional[Sequence[str]] = None) -> int:
    import uvicorn

    parser = argparse.ArgumentParser(
        prog="embed-server",
        description="Serve sentence embeddings over HTTP.",
    )
    parser.add_argument("--port", type=int, default=DEFAULT_PORT,
                        help=f"listen port (default {DEFAULT_PORT})")
    parser.add_argument("--host", default="127.0.0.1", help="bind address")
    parser.add_argument("--model", default=DEFAULT_MODEL,
                        help="sentence-transformer model name")
    parser.add_argument("--stub", action="store_true",
                        help="serve deterministic stub vectors (no model download)")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    holder = EncoderHolder()
    if args.stub:
        factory: Callable[[], EncoderProtocol] = StubEncoder
    else:
        factory = lambda: SentenceTransformerEncoder(args.model)  # noqa: E731
    load_in_background(holder, factory)

    app = create_app(holder)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
