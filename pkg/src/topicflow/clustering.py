"""Per-slice topic detection: k selection by gap statistic, then k-means.

k-means is Lloyd's algorithm with k-means++ seeding and a fixed number of
restarts; an empty cluster is re-seeded with the point farthest from its
assigned centroid, so the final clustering is always a full partition of
the slice vocabulary. The gap statistic compares the log within-cluster
dispersion against reference datasets drawn uniformly over the data's
axis-aligned bounding box.

All randomness is derived from (seed, slice, k, reference, restart), so
slices and restarts can run in any order without changing results.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .embedding import EmbeddingTable
from .errors import ConfigError, DataError
from .preprocess import SliceVocabulary
from .seeding import derive_rng, derive_seed

log = logging.getLogger(__name__)

K_POLICIES = ("argmax-gap", "first-standard-error")


@dataclass(frozen=True)
class ClusteringConfig:
    max_clusters: int = 50       # N: candidate k runs over [2, N]
    gap_refs: int = 10           # B: reference datasets per candidate k
    k_policy: str = "argmax-gap"
    restarts: int = 5
    max_iter: int = 300
    tol: float = 1e-6            # relative centroid movement
    seed: int = 0

    def __post_init__(self):
        if self.max_clusters < 2:
            raise ConfigError("max_clusters must be >= 2")
        if self.gap_refs < 1:
            raise ConfigError("gap_refs must be >= 1")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")
        if self.k_policy not in K_POLICIES:
            raise ConfigError(f"unknown k_policy {self.k_policy!r}; expected one of {K_POLICIES}")


@dataclass
class KMeansResult:
    labels: np.ndarray     # shape (n,), cluster index per point
    centroids: np.ndarray  # shape (k, d)
    inertia: float         # within-cluster sum of squared distances (W)


@dataclass(frozen=True)
class GapResult:
    gap: float
    std_err: float
    log_w: float
    log_w_refs: tuple[float, ...]


@dataclass(frozen=True)
class Topic:
    """One detected cluster of keywords within a slice."""

    slice_index: int
    topic_index: int
    members: frozenset[str]
    centroid: np.ndarray | None = None
    representatives: tuple[tuple[str, float], ...] = ()
    label: str | None = None
    slice_label: str | None = None

    @property
    def topic_id(self) -> str:
        slice_ref = self.slice_label if self.slice_label is not None else str(self.slice_index)
        return f"{slice_ref}-{self.topic_index}"

    def __len__(self) -> int:
        return len(self.members)


def _sq_dists(points: np.ndarray, centers: np.ndarray, x_sq: np.ndarray) -> np.ndarray:
    d2 = x_sq[:, None] - 2.0 * points @ centers.T + np.einsum("ij,ij->i", centers, centers)[None, :]
    np.maximum(d2, 0.0, out=d2)  # clamp tiny negatives from cancellation
    return d2


def _kmeanspp(points: np.ndarray, k: int, rng: np.random.Generator,
              x_sq: np.ndarray) -> np.ndarray:
    n, d = points.shape
    centers = np.empty((k, d), dtype=np.float64)
    centers[0] = points[rng.integers(n)]
    d2 = _sq_dists(points, centers[:1], x_sq)[:, 0]
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))  # all candidates coincide with chosen centers
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[j] = points[idx]
        d2 = np.minimum(d2, _sq_dists(points, centers[j:j + 1], x_sq)[:, 0])
    return centers


def _assign_with_repair(points: np.ndarray, centers: np.ndarray,
                        x_sq: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nearest-centroid assignment; empty clusters steal the worst-fit point."""
    k = len(centers)
    d2 = _sq_dists(points, centers, x_sq)
    labels = d2.argmin(axis=1)
    dists = d2[np.arange(len(points)), labels]
    counts = np.bincount(labels, minlength=k)
    if counts.min() == 0:
        centers = centers.copy()
        dists = dists.copy()
        for j in np.flatnonzero(counts == 0):
            donors = counts[labels] >= 2  # never empty a singleton cluster
            if not donors.any():
                break
            candidate_dists = np.where(donors, dists, -np.inf)
            p = int(candidate_dists.argmax())
            counts[labels[p]] -= 1
            counts[j] += 1
            labels[p] = j
            centers[j] = points[p]
            dists[p] = 0.0
    return labels, centers, dists


def _lloyd(points: np.ndarray, k: int, rng: np.random.Generator,
           max_iter: int, tol: float) -> KMeansResult:
    x_sq = np.einsum("ij,ij->i", points, points)
    centers = _kmeanspp(points, k, rng, x_sq)
    for _ in range(max_iter):
        labels, centers, _ = _assign_with_repair(points, centers, x_sq)
        new_centers = np.empty_like(centers)
        for j in range(k):
            new_centers[j] = points[labels == j].mean(axis=0)
        shift = float(np.linalg.norm(new_centers - centers))
        scale = max(1.0, float(np.linalg.norm(centers)))
        centers = new_centers
        if shift <= tol * scale:
            break
    labels, centers, dists = _assign_with_repair(points, centers, x_sq)
    return KMeansResult(labels=labels, centroids=centers, inertia=float(dists.sum()))


def kmeans(points, k: int, seed: int, restarts: int = 5,
           max_iter: int = 300, tol: float = 1e-6) -> KMeansResult:
    """Best of `restarts` seeded Lloyd runs (lowest within-cluster dispersion).

    Restart r draws from the sub-stream (seed, "restart", r), so running
    with restarts+1 replays the same first runs plus one more; the best
    dispersion is therefore non-increasing in the restart count.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or len(points) == 0:
        raise DataError("points must be a non-empty 2-d array")
    if k < 2 or k > len(points):
        raise DataError(f"k={k} outside the valid range [2, {len(points)}]")
    best: KMeansResult | None = None
    for r in range(restarts):
        result = _lloyd(points, k, derive_rng(seed, "restart", r), max_iter, tol)
        if best is None or result.inertia < best.inertia:
            best = result
    return best


def gap_statistic(points, k: int, B: int, seed: int, *, restarts: int = 5,
                  max_iter: int = 300, tol: float = 1e-6) -> GapResult:
    """Gap and its standard error at one candidate k.

    gap = mean_b log W_ref(b) - log W_data with W the k-means dispersion;
    references are drawn uniformly over the bounding box of the data and
    clustered with the same restart budget, so the comparison is symmetric.
    std_err = sd_b(log W_ref) * sqrt(1 + 1/B).
    """
    points = np.asarray(points, dtype=np.float64)
    if B < 1:
        raise ConfigError("B must be >= 1")
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    if np.all(hi == lo):
        raise DataError("degenerate bounding box: all points identical in every dimension")
    if B == 1:
        log.warning("gap statistic with B=1: standard error is 0 by convention")

    w_data = kmeans(points, k, derive_seed(seed, "data"), restarts, max_iter, tol).inertia
    log_w_refs = []
    for b in range(B):
        ref = derive_rng(seed, "ref", b, "draw").uniform(lo, hi, size=points.shape)
        w_ref = kmeans(ref, k, derive_seed(seed, "ref", b, "fit"),
                       restarts, max_iter, tol).inertia
        log_w_refs.append(w_ref)
    with np.errstate(divide="ignore"):
        log_w = float(np.log(w_data))
        log_refs = np.log(np.asarray(log_w_refs))
    gap = float(log_refs.mean() - log_w)
    std_err = float(log_refs.std(ddof=0) * np.sqrt(1.0 + 1.0 / B))
    return GapResult(gap=gap, std_err=std_err, log_w=log_w,
                     log_w_refs=tuple(float(v) for v in log_refs))


def gap_curve(points, cfg: ClusteringConfig) -> list[tuple[int, GapResult]]:
    """Gap results for every candidate k in [2, max_clusters]."""
    points = np.asarray(points, dtype=np.float64)
    if len(points) <= cfg.max_clusters:
        raise DataError(
            f"{len(points)} points cannot support max_clusters={cfg.max_clusters}; "
            "lower max_clusters below the vocabulary size"
        )
    return [
        (k, gap_statistic(points, k, cfg.gap_refs, derive_seed(cfg.seed, "gap", k),
                          restarts=cfg.restarts, max_iter=cfg.max_iter, tol=cfg.tol))
        for k in range(2, cfg.max_clusters + 1)
    ]


def choose_k(curve: list[tuple[int, GapResult]], policy: str = "argmax-gap") -> int:
    """Pick k from a gap curve; ties always resolve toward smaller k."""
    if policy not in K_POLICIES:
        raise ConfigError(f"unknown k_policy {policy!r}")
    if not curve:
        raise DataError("empty gap curve")
    best_k, best_gap = curve[0][0], curve[0][1].gap
    for k, res in curve[1:]:
        if res.gap > best_gap:
            best_k, best_gap = k, res.gap
    if policy == "first-standard-error":
        for (k, res), (_, nxt) in zip(curve, curve[1:]):
            if res.gap >= nxt.gap - nxt.std_err:
                return k
        log.info("no k satisfied the standard-error rule; falling back to argmax")
    return best_k


def select_k(points, cfg: ClusteringConfig) -> int:
    return choose_k(gap_curve(points, cfg), cfg.k_policy)


def detect_topics(vocab: SliceVocabulary, table: EmbeddingTable,
                  cfg: ClusteringConfig, n_representatives: int = 6,
                  slice_label: str | None = None) -> list[Topic]:
    """Cluster one slice's vocabulary into topics.

    Runs select_k, re-clusters at the chosen k, and labels topics in
    descending size order. Representatives are the n members closest to the
    centroid in Euclidean distance.
    """
    keywords = sorted(vocab.keywords)
    if len(keywords) <= cfg.max_clusters:
        raise DataError(
            f"slice {vocab.slice_index}: |V|={len(keywords)} <= max_clusters="
            f"{cfg.max_clusters}; lower max_clusters for this corpus"
        )
    points = table.matrix(keywords)
    slice_cfg = replace(cfg, seed=derive_seed(cfg.seed, "slice", vocab.slice_index))
    k = select_k(points, slice_cfg)
    result = kmeans(points, k, derive_seed(slice_cfg.seed, "final"),
                    slice_cfg.restarts, slice_cfg.max_iter, slice_cfg.tol)
    log.info("slice %s: |V|=%d -> k=%d", vocab.slice_index, len(keywords), k)

    by_cluster: dict[int, list[int]] = {}
    for idx, lab in enumerate(result.labels):
        by_cluster.setdefault(int(lab), []).append(idx)
    # stable topic numbering: biggest cluster first, then lexicographic anchor
    ordered = sorted(by_cluster.items(),
                     key=lambda kv: (-len(kv[1]), keywords[min(kv[1])]))
    topics = []
    for topic_index, (cluster, idxs) in enumerate(ordered):
        centroid = result.centroids[cluster]
        dists = np.linalg.norm(points[idxs] - centroid, axis=1)
        ranked = sorted(zip((keywords[i] for i in idxs), dists),
                        key=lambda kd: (kd[1], kd[0]))
        topics.append(Topic(
            slice_index=vocab.slice_index,
            topic_index=topic_index,
            members=frozenset(keywords[i] for i in idxs),
            centroid=centroid,
            representatives=tuple((kw, float(d)) for kw, d in ranked[:n_representatives]),
            slice_label=slice_label,
        ))

    assigned = [kw for t in topics for kw in t.members]
    if len(assigned) != len(keywords) or set(assigned) != vocab.keywords:
        raise AssertionError("topics do not partition the slice vocabulary")
    return topics
