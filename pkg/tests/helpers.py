"""Shared fixture builders for the test suite.

The planted fixtures are constructed so ground truth is known exactly:
blob slices for clustering recovery, lineage-based member sets for
evolution recovery, and a small document corpus for end-to-end runs.
"""

from __future__ import annotations

import json

import numpy as np

from topicflow.clustering import Topic
from topicflow.embedding import EmbeddingTable
from topicflow.preprocess import KeywordStats, SliceVocabulary

BLOB_AXES = [(0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0), (2, 1.0), (2, -1.0)]


def planted_blob_slice(seed: int, slice_index: int, n_topics: int = 6, dim: int = 32,
                       separation: float = 40.0, n_points: int = 200,
                       blob_std: float = 1.0):
    """One slice of Gaussian keyword blobs with known topic labels.

    Centers sit at +/-separation along the first axes, so the minimum
    inter-center distance is separation*sqrt(2), far above 10x blob_std.
    Returns (vocabulary, embedding table, {keyword: planted topic}).
    """
    assert n_topics <= len(BLOB_AXES)
    rng = np.random.default_rng(seed)
    centers = np.zeros((n_topics, dim))
    for i, (axis, sign) in enumerate(BLOB_AXES[:n_topics]):
        centers[i, axis] = sign * separation
    base = n_points // n_topics
    sizes = [base + (1 if i < n_points - base * n_topics else 0) for i in range(n_topics)]
    points = np.vstack([c + rng.normal(0.0, blob_std, (m, dim))
                        for c, m in zip(centers, sizes)])
    blob = np.repeat(np.arange(n_topics), sizes)

    table = EmbeddingTable(dim)
    stats = {}
    planted = {}
    for i in range(n_points):
        kw = f"s{slice_index}k{i:03d}"
        table.add(kw, points[i])
        stats[kw] = KeywordStats(doc_freq=6, author_count=3,
                                 document_ids=frozenset({f"d{i}"}))
        planted[kw] = int(blob[i])
    vocab = SliceVocabulary(slice_index=slice_index, stats=stats)
    return vocab, table, planted


def _names(prefix: str, start: int, count: int) -> list[str]:
    return [f"{prefix}{i:03d}" for i in range(start, start + count)]


def planted_evolution():
    """Hand-built 4-slice topic sets with a known evolution structure.

    Keyword carryover along every planted link is >= 60% of the smaller
    set; topics from different lineages share nothing. Returns
    (topics_by_slice, planted_edges, expected_flow_classes).
    """
    def topic(s, i, members):
        return Topic(slice_index=s, topic_index=i, members=frozenset(members))

    # constant chain: keep 14 of 20 each step
    a0 = _names("con", 0, 20)
    a1 = a0[6:] + _names("con", 20, 6)
    a2 = a1[6:] + _names("con", 26, 6)
    a3 = a2[6:] + _names("con", 32, 6)

    # seed: p0 -> s1, then s1 splits into s2a (dies out via s3a) and s2b (death)
    p0 = _names("sed", 0, 20)
    s1 = p0[6:] + _names("sed", 20, 6)          # carries 14 of p0
    s2a = s1[:10] + _names("sed", 26, 5)
    s2b = s1[10:] + _names("sed", 31, 5)
    s3a = s2a[:10] + _names("sed", 36, 5)

    # consolidate: two chains merge into m2, which carries on to m3
    g0a = _names("mga", 0, 12)
    g0b = _names("mgb", 0, 12)
    m1a = g0a[4:] + _names("mga", 12, 4)
    m1b = g0b[4:] + _names("mgb", 12, 4)
    m2 = m1a[:8] + m1b[:8] + _names("mgc", 0, 2)
    m3 = m2[:12] + _names("mgc", 2, 2)

    # temporary: two chains merge into t2 which immediately splits again
    u0a = _names("tpa", 0, 12)
    u0b = _names("tpb", 0, 12)
    t1a = u0a[4:] + _names("tpa", 12, 4)
    t1b = u0b[4:] + _names("tpb", 12, 4)
    t2 = t1a[:8] + t1b[:8] + _names("tpc", 0, 2)
    t3a = t2[:9] + _names("tpc", 2, 3)
    t3b = t2[9:] + _names("tpc", 5, 3)

    # birth: appears fresh mid-timeline
    b2 = _names("bir", 0, 15)
    b3 = b2[:10] + _names("bir", 15, 5)

    topics_by_slice = [
        [topic(0, 0, a0), topic(0, 1, p0), topic(0, 2, g0a), topic(0, 3, g0b),
         topic(0, 4, u0a), topic(0, 5, u0b)],
        [topic(1, 0, a1), topic(1, 1, s1), topic(1, 2, m1a), topic(1, 3, m1b),
         topic(1, 4, t1a), topic(1, 5, t1b)],
        [topic(2, 0, a2), topic(2, 1, s2a), topic(2, 2, s2b), topic(2, 3, m2),
         topic(2, 4, t2), topic(2, 5, b2)],
        [topic(3, 0, a3), topic(3, 1, s3a), topic(3, 2, m3), topic(3, 3, t3a),
         topic(3, 4, t3b), topic(3, 5, b3)],
    ]
    planted_edges = {
        ("0-0", "1-0"), ("1-0", "2-0"), ("2-0", "3-0"),
        ("0-1", "1-1"), ("1-1", "2-1"), ("1-1", "2-2"), ("2-1", "3-1"),
        ("0-2", "1-2"), ("0-3", "1-3"), ("1-2", "2-3"), ("1-3", "2-3"), ("2-3", "3-2"),
        ("0-4", "1-4"), ("0-5", "1-5"), ("1-4", "2-4"), ("1-5", "2-4"),
        ("2-4", "3-3"), ("2-4", "3-4"),
        ("2-5", "3-5"),
    }
    expected_classes = {
        "0-0": "boundary", "0-1": "boundary", "0-2": "boundary",
        "0-3": "boundary", "0-4": "boundary", "0-5": "boundary",
        "1-0": "constant", "1-1": "seed", "1-2": "constant",
        "1-3": "constant", "1-4": "constant", "1-5": "constant",
        "2-0": "constant", "2-1": "constant", "2-2": "death",
        "2-3": "consolidate", "2-4": "temporary", "2-5": "birth",
        "3-0": "boundary", "3-1": "boundary", "3-2": "boundary",
        "3-3": "boundary", "3-4": "boundary", "3-5": "boundary",
    }
    return topics_by_slice, planted_edges, expected_classes


def write_planted_corpus(path, seed: int = 0, n_slices: int = 3,
                         first_year: int = 2015, keywords_per_slice: int = 24,
                         docs_per_slice: int = 40, doc_freq: int = 8,
                         carryover: int = 10, with_keyword_field: bool = True) -> dict:
    """Line-delimited JSON corpus whose per-slice vocabularies are planted.

    Each slice has `keywords_per_slice` terms, each placed in exactly
    `doc_freq` distinct documents; `carryover` terms repeat from the
    previous slice so linking and novelty have material to work on.
    Returns {slice_index: sorted keyword list}.
    """
    rng = np.random.default_rng(seed)
    planted: dict[int, list[str]] = {}
    records = []
    prev_keywords: list[str] = []
    for t in range(n_slices):
        fresh = [f"topic{t}term{i:02d}" for i in range(keywords_per_slice - min(carryover, len(prev_keywords)))]
        carried = prev_keywords[:carryover]
        keywords = sorted(carried + fresh)
        planted[t] = keywords
        prev_keywords = keywords

        doc_keywords: dict[int, list[str]] = {j: [] for j in range(docs_per_slice)}
        for kw in keywords:
            for j in rng.choice(docs_per_slice, size=doc_freq, replace=False):
                doc_keywords[int(j)].append(kw)
        base_ts = int(np.datetime64(f"{first_year + t}-01-01T00:00:00").astype(
            "datetime64[s]").astype(int))
        for j in range(docs_per_slice):
            kws = doc_keywords[j]
            rng.shuffle(kws)
            if not kws:
                kws = [f"filler{t}pad{j:02d}"]  # keeps every document non-empty
            rec = {
                "id": f"doc{t}-{j:03d}",
                "text": " ".join(kws),
                "author": f"user{int(rng.integers(12)):02d}",
                "created_utc": base_ts + j * 3600,
            }
            if with_keyword_field:
                rec["keywords"] = kws
            records.append(rec)

    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return planted
