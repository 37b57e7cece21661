"""Emergence indicators for final-slice topics and TOPSIS aggregation.

Four indicators per topic: novelty (share of keywords unseen in any prior
slice), growth (relative change in documents mentioning the topic's
keywords between the last two slices), coherence (mean pairwise cosine of
the member vectors), and community (mean distinct-author count per
keyword). TOPSIS turns the indicator matrix into one score per topic:
each column is scaled to a unit vector and weighted, per-column ideals
are taken under the configured benefit/cost directions, and the score is
P = d-/(d+ + d-), the relative closeness to the positive ideal.

Default directions treat novelty as benefit and growth, coherence and
community as costs; all four are configurable.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .clustering import Topic
from .embedding import EmbeddingTable
from .errors import ConfigError, DataError
from .evolution import TopicGraph
from .preprocess import SliceVocabulary

log = logging.getLogger(__name__)

INDICATORS = ("novelty", "growth", "coherence", "community")
DIRECTIONS = ("benefit", "cost")
DEFAULT_DIRECTIONS = ("benefit", "cost", "cost", "cost")

_RANGE_TOL = 1e-9


@dataclass(frozen=True)
class IndicatorVector:
    novelty: float     # in [0, 1]
    growth: float      # unitless rate, any sign
    coherence: float   # in [-1, 1]
    community: float   # mean distinct-author count, >= 0

    def __post_init__(self):
        values = (self.novelty, self.growth, self.coherence, self.community)
        if not all(math.isfinite(v) for v in values):
            raise DataError(f"indicator vector has non-finite components: {values}")
        if not -_RANGE_TOL <= self.novelty <= 1.0 + _RANGE_TOL:
            raise DataError(f"novelty {self.novelty} outside [0, 1]")
        if not -1.0 - _RANGE_TOL <= self.coherence <= 1.0 + _RANGE_TOL:
            raise DataError(f"coherence {self.coherence} outside [-1, 1]")
        if self.community < -_RANGE_TOL:
            raise DataError(f"community {self.community} negative")

    def as_row(self) -> tuple[float, float, float, float]:
        return (self.novelty, self.growth, self.coherence, self.community)


@dataclass(frozen=True)
class TopsisConfig:
    weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    directions: tuple[str, str, str, str] = DEFAULT_DIRECTIONS

    def __post_init__(self):
        if len(self.weights) != 4 or len(self.directions) != 4:
            raise ConfigError("TOPSIS needs exactly four weights and four directions")
        if any(w < 0 for w in self.weights):
            raise ConfigError("TOPSIS weights must be non-negative")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ConfigError(f"TOPSIS weights must sum to 1, got {sum(self.weights)}")
        if any(d not in DIRECTIONS for d in self.directions):
            raise ConfigError(f"directions must be 'benefit' or 'cost', got {self.directions}")


def novelty(topic: Topic, prior_vocabularies: list[SliceVocabulary]) -> float:
    """Share of the topic's keywords absent from every earlier slice."""
    if not prior_vocabularies:
        raise DataError("novelty needs at least one prior slice (T >= 2)")
    seen: set[str] = set()
    for vocab in prior_vocabularies:
        seen |= vocab.keywords
    fresh = sum(1 for kw in topic.members if kw not in seen)
    return fresh / len(topic.members)


def growth(topic: Topic, mention_docs_by_slice: dict[int, dict[str, frozenset[str]]]) -> float:
    """Relative change in documents mentioning any member keyword, T-1 to T.

    Document sets come from raw extracted mentions, so a keyword's history
    counts even in slices where the frequency filter dropped it.
    """
    t = topic.slice_index
    if t - 1 not in mention_docs_by_slice or t not in mention_docs_by_slice:
        raise DataError(f"growth needs mention indexes for slices {t - 1} and {t}")
    docs_prev: set[str] = set()
    docs_last: set[str] = set()
    for kw in topic.members:
        docs_prev |= mention_docs_by_slice[t - 1].get(kw, frozenset())
        docs_last |= mention_docs_by_slice[t].get(kw, frozenset())
    if not docs_prev:
        log.warning("topic %s: no documents mentioned its keywords in slice %d; "
                    "growth uses denominator 1", topic.topic_id, t - 1)
    return (len(docs_last) - len(docs_prev)) / max(len(docs_prev), 1)


def community(topic: Topic, vocab: SliceVocabulary) -> float:
    """Mean distinct-author count over the topic's keywords."""
    counts = []
    for kw in topic.members:
        if kw not in vocab.stats:
            raise DataError(f"keyword {kw!r} missing from slice {vocab.slice_index} stats")
        counts.append(vocab.stats[kw].author_count)
    return sum(counts) / len(counts)


def coherence(topic: Topic, table: EmbeddingTable) -> float:
    """Mean cosine similarity over all unordered pairs of member vectors."""
    members = sorted(topic.members)
    if len(members) == 1:
        log.info("topic %s is a singleton; coherence = 1.0 by convention", topic.topic_id)
        return 1.0
    vectors = table.matrix(members)
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(norms == 0.0):
        zero = members[int(np.argmin(norms))]
        raise DataError(f"keyword {zero!r} has a zero vector; cosine undefined")
    unit = vectors / norms[:, None]
    sims = unit @ unit.T
    n = len(members)
    upper = sims[np.triu_indices(n, k=1)]
    return float(upper.mean())


def topsis_normalize(X, weights) -> np.ndarray:
    """Column-wise unit-vector scaling followed by the weight product."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise DataError("indicator matrix must be 2-d and non-empty")
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (X.shape[1],):
        raise ConfigError(f"expected {X.shape[1]} weights, got {weights.shape}")
    norms = np.sqrt((X ** 2).sum(axis=0))
    for j, norm in enumerate(norms):
        if norm == 0.0:
            name = INDICATORS[j] if X.shape[1] == len(INDICATORS) else f"column {j}"
            raise DataError(f"indicator {name} is zero for every topic; cannot normalize")
    return weights * X / norms


@dataclass
class TopsisResult:
    d_plus: np.ndarray
    d_minus: np.ndarray
    scores: np.ndarray      # P_i in [0, 1]
    order: list[int]        # row indices, best first
    degenerate: bool = False


def topsis_rank(R, directions=DEFAULT_DIRECTIONS) -> TopsisResult:
    """Distances to the per-column ideals and the closeness score P.

    Ties in P keep row order, so callers that sort rows by topic id get
    id-ordered tie-breaking for free.
    """
    R = np.asarray(R, dtype=np.float64)
    if any(d not in DIRECTIONS for d in directions):
        raise ConfigError(f"directions must be 'benefit' or 'cost', got {directions}")
    if len(directions) != R.shape[1]:
        raise ConfigError(f"expected {R.shape[1]} directions, got {len(directions)}")
    benefit = np.array([d == "benefit" for d in directions])
    pis = np.where(benefit, R.max(axis=0), R.min(axis=0))
    nis = np.where(benefit, R.min(axis=0), R.max(axis=0))
    d_plus = np.sqrt(((R - pis) ** 2).sum(axis=1))
    d_minus = np.sqrt(((R - nis) ** 2).sum(axis=1))
    total = d_plus + d_minus
    degenerate = bool(np.all(total == 0.0))
    if degenerate:
        log.warning("all topics coincide with both ideals; scores forced to 0.5")
    scores = np.where(total == 0.0, 0.5, np.divide(d_minus, np.where(total == 0.0, 1.0, total)))
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return TopsisResult(d_plus=d_plus, d_minus=d_minus, scores=scores,
                        order=order, degenerate=degenerate)


@dataclass
class TopicScore:
    topic_id: str
    label: str | None
    indicators: IndicatorVector
    normalized: tuple[float, float, float, float]
    d_plus: float
    d_minus: float
    score: float
    rank: int                     # 1 = most emergent
    backward_topics: list[str]


@dataclass
class EmergenceReport:
    entries: list[TopicScore]     # sorted by rank
    weights: tuple[float, float, float, float]
    directions: tuple[str, str, str, str]
    degenerate: bool = False

    def ranking(self) -> list[str]:
        return [e.topic_id for e in self.entries]


def score_emergence(final_topics: list[Topic], *,
                    prior_vocabularies: list[SliceVocabulary],
                    final_vocabulary: SliceVocabulary,
                    mention_docs_by_slice: dict[int, dict[str, frozenset[str]]],
                    table: EmbeddingTable,
                    cfg: TopsisConfig = TopsisConfig(),
                    graph: TopicGraph | None = None) -> EmergenceReport:
    """Indicator matrix, TOPSIS scores, and ranking for the final slice."""
    if len(final_topics) < 2:
        raise DataError("emergence scoring needs at least two final-slice topics")
    topics = sorted(final_topics, key=lambda t: t.topic_id)
    vectors = [
        IndicatorVector(
            novelty=novelty(t, prior_vocabularies),
            growth=growth(t, mention_docs_by_slice),
            coherence=coherence(t, table),
            community=community(t, final_vocabulary),
        )
        for t in topics
    ]
    X = np.array([v.as_row() for v in vectors])
    R = topsis_normalize(X, cfg.weights)
    result = topsis_rank(R, cfg.directions)

    ranks = {row: pos + 1 for pos, row in enumerate(result.order)}
    entries = [
        TopicScore(
            topic_id=t.topic_id,
            label=t.label,
            indicators=vectors[i],
            normalized=tuple(float(v) for v in R[i]),
            d_plus=float(result.d_plus[i]),
            d_minus=float(result.d_minus[i]),
            score=float(result.scores[i]),
            rank=ranks[i],
            backward_topics=graph.backward_topics(t.topic_id) if graph else [],
        )
        for i, t in enumerate(topics)
    ]
    entries.sort(key=lambda e: e.rank)
    return EmergenceReport(entries=entries, weights=cfg.weights,
                           directions=cfg.directions, degenerate=result.degenerate)
