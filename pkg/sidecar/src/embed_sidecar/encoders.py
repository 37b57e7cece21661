"""Encoder backends for the sidecar.

Two kinds: a pretrained sentence-transformer (the production path) and a
deterministic hash encoder for offline development and CI, selected with a
model name of the form "debug-hash-<dim>". Both are pure functions of the
input text within one process lifetime.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

DEBUG_MODEL_RE = re.compile(r"^debug-hash-(\d+)$")


class EncoderError(RuntimeError):
    """Raised when the configured encoder cannot be loaded."""


class HashEncoder:
    """Seeded pseudo-random unit vectors; no model download required."""

    def __init__(self, dim: int):
        if dim < 2:
            raise EncoderError(f"debug encoder needs dim >= 2, got {dim}")
        self.dim = dim
        self.name = f"debug-hash-{dim}"

    def encode(self, texts: list[str]) -> np.ndarray:
        rows = []
        for text in texts:
            digest = hashlib.blake2b(text.encode("utf-8"), digest_size=16).digest()
            rng = np.random.Generator(np.random.Philox(key=int.from_bytes(digest, "little")))
            vec = rng.standard_normal(self.dim)
            rows.append(vec / np.linalg.norm(vec))
        return np.asarray(rows, dtype=np.float32)


class SentenceTransformerEncoder:
    """Wraps a pretrained sentence encoder in deterministic inference mode."""

    def __init__(self, model_name: str):
        try:
            import torch
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise EncoderError(f"sentence-transformers is not installed: {exc}") from exc
        try:
            self._model = SentenceTransformer(model_name, device="cpu")
        except Exception as exc:  # model missing, no network, bad name
            raise EncoderError(f"cannot load model {model_name!r}: {exc}") from exc
        self._model.eval()
        self._torch = torch
        self.name = model_name
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts: list[str]) -> np.ndarray:
        with self._torch.no_grad():
            vectors = self._model.encode(texts, convert_to_numpy=True,
                                         batch_size=32, show_progress_bar=False)
        return np.asarray(vectors, dtype=np.float32)


def load_encoder(model_name: str):
    match = DEBUG_MODEL_RE.match(model_name)
    if match:
        return HashEncoder(int(match.group(1)))
    return SentenceTransformerEncoder(model_name)
