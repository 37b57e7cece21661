"""Keyword embedding providers and the embedding table.

A keyword maps to exactly one vector regardless of slice, so the table is
keyed by the normalized string and shared across the whole run. Three
providers: "file" reads a precomputed table, "hash" derives deterministic
pseudo-random unit vectors (test/default provider), "http" calls an
encoder service (POST /embed) in batches.

Table file format: header line "dim=<d>", then one record per line of
"keyword<TAB>base64(vector bytes)". Provider input files carry little-endian
float32 payloads; the loader also accepts float64 payloads, which this
package writes for its own lossless caches. Either way the payload survives
a round trip bit-exactly.
"""

from __future__ import annotations

import base64
import hashlib
import logging
import time
from dataclasses import dataclass

import numpy as np
import requests

from .errors import ConfigError, ProviderError

log = logging.getLogger(__name__)

PROVIDER_KINDS = ("file", "hash", "http")


class EmbeddingTable:
    """Map keyword -> d-vector with dimension and finiteness enforced."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ConfigError(f"embedding dimension must be >= 1, got {dim}")
        self.dim = int(dim)
        self._vectors: dict[str, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, keyword: str) -> bool:
        return keyword in self._vectors

    def keywords(self) -> list[str]:
        return sorted(self._vectors)

    def add(self, keyword: str, vector) -> None:
        vec = np.asarray(vector, dtype=np.float64)
        if vec.shape != (self.dim,):
            raise ProviderError(
                f"vector for {keyword!r} has dimension {vec.shape}, expected ({self.dim},)"
            )
        if not np.all(np.isfinite(vec)):
            raise ProviderError(f"vector for {keyword!r} has non-finite components")
        # first writer wins; values are identical by purity of the providers
        self._vectors.setdefault(keyword, vec)

    def vector(self, keyword: str) -> np.ndarray:
        try:
            return self._vectors[keyword]
        except KeyError:
            raise ProviderError(f"no embedding for keyword {keyword!r}") from None

    def matrix(self, keywords) -> np.ndarray:
        """Rows in the order given; missing keywords are fatal."""
        return np.array([self.vector(k) for k in keywords], dtype=np.float64)

    def save(self, path, dtype: str = "f8") -> None:
        """Persist sorted records; "f8" is lossless, "f4" is the compact form."""
        if dtype not in ("f4", "f8"):
            raise ConfigError(f"dtype must be 'f4' or 'f8', got {dtype!r}")
        np_dtype = np.dtype(f"<{dtype}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"dim={self.dim}\n")
            for keyword in sorted(self._vectors):
                payload = self._vectors[keyword].astype(np_dtype).tobytes()
                fh.write(f"{keyword}\t{base64.b64encode(payload).decode('ascii')}\n")

    @classmethod
    def load(cls, path) -> "EmbeddingTable":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.read().splitlines()
        except OSError as exc:
            raise ProviderError(f"cannot read embedding file {path}: {exc}") from exc
        if not lines or not lines[0].startswith("dim="):
            raise ProviderError(f"embedding file {path} is missing the dim= header")
        try:
            dim = int(lines[0][4:])
        except ValueError:
            raise ProviderError(f"bad dim= header in {path}: {lines[0]!r}") from None
        table = cls(dim)
        for lineno, line in enumerate(lines[1:], start=2):
            if not line:
                continue
            keyword, _, blob = line.partition("\t")
            if not blob:
                raise ProviderError(f"{path}:{lineno}: malformed record")
            raw = base64.b64decode(blob)
            if len(raw) == 4 * dim:
                vec = np.frombuffer(raw, dtype="<f4").astype(np.float64)
            elif len(raw) == 8 * dim:
                vec = np.frombuffer(raw, dtype="<f8")
            else:
                raise ProviderError(
                    f"{path}:{lineno}: payload of {len(raw)} bytes does not match dim={dim}"
                )
            table.add(keyword, vec)
        return table


@dataclass(frozen=True)
class ProviderConfig:
    """Which embedding source to use and how to reach it."""

    kind: str = "hash"
    dim: int = 1024
    seed: int = 0                      # hash provider
    path: str | None = None            # file provider
    base_url: str | None = None        # http provider
    batch_size: int = 64
    timeout: float = 10.0
    max_retries: int = 3

    def __post_init__(self):
        if self.kind not in PROVIDER_KINDS:
            raise ConfigError(f"unknown provider kind {self.kind!r}; expected one of {PROVIDER_KINDS}")
        if self.kind == "hash" and self.dim < 2:
            raise ConfigError("hash provider needs dim >= 2")
        if self.kind == "file" and not self.path:
            raise ConfigError("file provider needs a path")
        if self.kind == "http":
            if not self.base_url:
                raise ConfigError("http provider needs a base_url")
            if self.batch_size < 1:
                raise ConfigError("batch_size must be >= 1")


def hash_embed(keyword: str, seed: int, d: int) -> np.ndarray:
    """Deterministic unit vector from a counter-based generator.

    The Philox key is a hash of (seed, keyword), so the vector is a pure
    function of the string, identical across runs and platforms.
    """
    if d < 2:
        raise ConfigError(f"hash_embed needs d >= 2, got {d}")
    h = hashlib.blake2b(digest_size=16)
    h.update(str(int(seed)).encode("ascii"))
    h.update(b"\x00")
    h.update(keyword.encode("utf-8"))
    key = int.from_bytes(h.digest(), "little")
    rng = np.random.Generator(np.random.Philox(key=key))
    vec = rng.standard_normal(d)
    return vec / np.linalg.norm(vec)


def _http_embed_batch(cfg: ProviderConfig, batch: list[str]) -> list[np.ndarray]:
    url = cfg.base_url.rstrip("/") + "/embed"
    last_error: Exception | None = None
    for attempt in range(cfg.max_retries):
        try:
            resp = requests.post(url, json={"texts": batch}, timeout=cfg.timeout)
            if resp.status_code >= 500:
                raise ProviderError(f"{url} returned {resp.status_code}")
            if resp.status_code != 200:
                # 4xx will not improve with retries
                raise _FatalHttpError(f"{url} returned {resp.status_code}: {resp.text[:200]}")
            body = resp.json()
            dim = int(body["dim"])
            vectors = body["vectors"]
            if dim != cfg.dim:
                raise _FatalHttpError(
                    f"provider dimension {dim} does not match configured dim {cfg.dim}"
                )
            if len(vectors) != len(batch):
                raise _FatalHttpError(
                    f"provider returned {len(vectors)} vectors for {len(batch)} texts"
                )
            return [np.asarray(v, dtype=np.float64) for v in vectors]
        except _FatalHttpError:
            raise
        except (requests.RequestException, ProviderError, KeyError, ValueError) as exc:
            last_error = exc
            if attempt + 1 < cfg.max_retries:
                time.sleep(min(0.5 * 2 ** attempt, 2.0))
    raise ProviderError(
        f"http provider unreachable after {cfg.max_retries} attempts: {last_error}"
    )


class _FatalHttpError(ProviderError):
    """HTTP failure that retries cannot fix (bad dim, 4xx)."""


def embed_vocabulary(keywords, provider: ProviderConfig,
                     cache: EmbeddingTable | None = None,
                     cache_path=None) -> EmbeddingTable:
    """Ensure every keyword has a vector, reusing any cached entries.

    Keywords already present in `cache` are never re-requested, so a term
    shared between slices costs one provider call for the whole run. If the
    http provider dies mid-run, whatever was fetched is persisted to
    `cache_path` before the error propagates.
    """
    if not keywords:
        raise ConfigError("embed_vocabulary called with an empty keyword set")
    table = cache if cache is not None else EmbeddingTable(provider.dim)
    if table.dim != provider.dim:
        raise ConfigError(
            f"cache dimension {table.dim} does not match provider dim {provider.dim}"
        )
    missing = sorted(set(keywords) - set(table.keywords()))
    if not missing:
        return table

    if provider.kind == "hash":
        for keyword in missing:
            table.add(keyword, hash_embed(keyword, provider.seed, provider.dim))
        return table

    if provider.kind == "file":
        source = EmbeddingTable.load(provider.path)
        if source.dim != provider.dim:
            raise ProviderError(
                f"file {provider.path} has dim={source.dim}, expected {provider.dim}"
            )
        for keyword in missing:
            if keyword not in source:
                raise ProviderError(
                    f"file provider {provider.path} has no embedding for keyword {keyword!r}"
                )
            table.add(keyword, source.vector(keyword))
        return table

    # http
    try:
        for i in range(0, len(missing), provider.batch_size):
            batch = missing[i:i + provider.batch_size]
            for keyword, vec in zip(batch, _http_embed_batch(provider, batch)):
                table.add(keyword, vec)
    except ProviderError:
        if cache_path is not None and len(table):
            table.save(cache_path)
            log.warning("persisted partial embedding cache (%d keywords) to %s",
                        len(table), cache_path)
        raise
    return table


def check_http_provider(cfg: ProviderConfig) -> dict:
    """GET /healthz; returns the service's reported metadata."""
    url = cfg.base_url.rstrip("/") + "/healthz"
    try:
        resp = requests.get(url, timeout=cfg.timeout)
    except requests.RequestException as exc:
        raise ProviderError(f"embedding service health check failed: {exc}") from exc
    if resp.status_code != 200:
        raise ProviderError(f"embedding service unhealthy: {url} -> {resp.status_code}")
    return resp.json()
