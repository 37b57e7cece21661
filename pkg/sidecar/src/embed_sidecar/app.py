"""FastAPI application exposing the embedding contract.

POST /embed  {"texts": [..]} -> {"dim": d, "vectors": [[..], ..]}  (order-preserving)
GET  /healthz                -> {"model": name, "dim": d}

400 for an empty list or a batch over the cap, 503 while no encoder is
loaded. Model selection and the batch cap come from the environment:
EMBED_SIDECAR_MODEL (default sentence-transformers/all-MiniLM-L6-v2; use
"debug-hash-<dim>" for the offline deterministic encoder) and
EMBED_SIDECAR_BATCH_CAP (default 256).
"""

from __future__ import annotations

import logging
import os
import threading

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .encoders import EncoderError, load_encoder

log = logging.getLogger(__name__)

DEFAULT_MODEL = "sentence-transformers/all-MiniLM-L6-v2"
ENV_MODEL = "EMBED_SIDECAR_MODEL"
ENV_BATCH_CAP = "EMBED_SIDECAR_BATCH_CAP"


class EmbedRequest(BaseModel):
    texts: list[str] = Field(description="texts to encode, order preserved")


class EmbedResponse(BaseModel):
    dim: int
    vectors: list[list[float]]


def create_app(model_name: str | None = None, batch_cap: int | None = None,
               encoder=None) -> FastAPI:
    """Build the service; `encoder` injects a preloaded backend (tests)."""
    name = model_name or os.environ.get(ENV_MODEL, DEFAULT_MODEL)
    cap = batch_cap if batch_cap is not None else int(os.environ.get(ENV_BATCH_CAP, "256"))
    app = FastAPI(title="embed-sidecar")
    state = {"encoder": encoder, "error": None}
    lock = threading.Lock()
    infer_lock = threading.Lock()  # requests may be concurrent; inference is serialized

    def get_encoder():
        with lock:
            if state["encoder"] is None and state["error"] is None:
                try:
                    state["encoder"] = load_encoder(name)
                    log.info("loaded encoder %s (dim=%d)", state["encoder"].name,
                             state["encoder"].dim)
                except EncoderError as exc:
                    state["error"] = str(exc)
                    log.error("encoder load failed: %s", exc)
            return state["encoder"]

    @app.get("/healthz")
    def healthz():
        enc = get_encoder()
        if enc is None:
            raise HTTPException(status_code=503,
                                detail=f"model not loaded: {state['error']}")
        return {"model": enc.name, "dim": enc.dim}

    @app.post("/embed", response_model=EmbedResponse)
    def embed(request: EmbedRequest):
        if not request.texts:
            raise HTTPException(status_code=400, detail="texts must be non-empty")
        if len(request.texts) > cap:
            raise HTTPException(status_code=400,
                                detail=f"batch of {len(request.texts)} exceeds cap {cap}")
        enc = get_encoder()
        if enc is None:
            raise HTTPException(status_code=503,
                                detail=f"model not loaded: {state['error']}")
        with infer_lock:
            vectors = enc.encode(request.texts)
        if len(vectors) != len(request.texts):
            raise HTTPException(status_code=500, detail="encoder broke order preservation")
        return {"dim": enc.dim, "vectors": [[float(x) for x in row] for row in vectors]}

    return app
