"""Keyword extraction and the three-stage noise filter.

Extraction produces occurrence-level keyword mentions, either from a
precomputed per-record keyword list ("external") or from a rule-based
word n-gram pass ("builtin"). Filtering applies, in order, a rule stage
(length bounds, pure punctuation, pronouns), a stopword stage, and a
frequency stage (document-frequency floor and ratio cap), and reports how
many keywords each stage dropped.
"""

from __future__ import annotations

import logging
import re
import string
import unicodedata
from dataclasses import dataclass, field
from importlib import resources

from .corpus import Document
from .errors import ConfigError, DataError

log = logging.getLogger(__name__)

EXTRACTORS = ("builtin", "external")

_MAX_NGRAM = 3
_STRIP_CHARS = string.punctuation + string.whitespace
_TOKEN_RE = re.compile(r"[\w'’-]+|[^\w\s]", re.UNICODE)
_WORD_RE = re.compile(r"\w", re.UNICODE)

# Keywords that are pronouns carry no topical content on their own.
PRONOUNS = frozenset(
    """i you he she it we they me him her us them my your his its our their
    mine yours hers ours theirs myself yourself himself herself itself
    ourselves yourselves themselves this that these those who whom whose
    which what anyone anybody anything someone somebody something everyone
    everybody everything nobody nothing none one oneself""".split()
)


def load_stopwords() -> frozenset[str]:
    """Stopword list shipped with the package (standard English)."""
    text = resources.files("topicflow").joinpath("data/stopwords_en.txt").read_text("utf-8")
    words = {line.strip() for line in text.splitlines()
             if line.strip() and not line.startswith("#")}
    return frozenset(words)


def normalize_keyword(raw: str) -> str:
    """Lowercase, NFC-normalize, collapse whitespace, strip edge punctuation.

    Idempotent, so keyword identity is stable across slices.
    """
    s = unicodedata.normalize("NFC", raw.lower())
    s = " ".join(s.split())
    return s.strip(_STRIP_CHARS)


@dataclass(frozen=True)
class KeywordMention:
    """One occurrence of a normalized keyword in one document."""

    keyword: str
    document_id: str
    slice_index: int
    author: str


@dataclass(frozen=True)
class FilterConfig:
    min_length: int = 6
    max_length: int = 40
    min_doc_freq: int = 5
    max_doc_freq_ratio: float = 0.5
    stopwords: frozenset[str] = field(default_factory=load_stopwords)

    def __post_init__(self):
        if self.min_length >= self.max_length:
            raise ConfigError("min_length must be smaller than max_length")
        if self.min_doc_freq < 0:
            raise ConfigError("min_doc_freq must be >= 0")
        if not 0.0 < self.max_doc_freq_ratio <= 1.0:
            raise ConfigError("max_doc_freq_ratio must lie in (0, 1]")


@dataclass(frozen=True)
class KeywordStats:
    doc_freq: int          # distinct documents in the slice containing the keyword
    author_count: int      # distinct authors in the slice mentioning it
    document_ids: frozenset[str]


@dataclass
class SliceVocabulary:
    """Filtered keyword set of one slice with per-keyword statistics."""

    slice_index: int
    stats: dict[str, KeywordStats]
    drop_counts: dict[str, int] = field(default_factory=dict)

    @property
    def keywords(self) -> set[str]:
        return set(self.stats)

    def __len__(self) -> int:
        return len(self.stats)

    def __contains__(self, keyword: str) -> bool:
        return keyword in self.stats


def _builtin_mentions(doc: Document, slice_index: int,
                      stopwords: frozenset[str]) -> list[KeywordMention]:
    tokens = _TOKEN_RE.findall(doc.text)
    is_word = [bool(_WORD_RE.search(t)) for t in tokens]
    mentions: list[KeywordMention] = []
    for n in range(1, _MAX_NGRAM + 1):
        for i in range(len(tokens) - n + 1):
            window = tokens[i:i + n]
            if not all(is_word[i:i + n]):
                continue  # n-grams spanning punctuation are noise
            if window[0].lower() in stopwords or window[-1].lower() in stopwords:
                continue
            keyword = normalize_keyword(" ".join(window))
            if keyword:
                mentions.append(KeywordMention(keyword, doc.id, slice_index, doc.author))
    return mentions


def extract_keywords(doc: Document, extractor: str = "builtin",
                     slice_index: int = 0,
                     stopwords: frozenset[str] | None = None) -> list[KeywordMention]:
    """Extract occurrence-level keyword mentions from one document.

    "external" replays the precomputed keyword list attached to the record
    (records without one yield no mentions); "builtin" emits contiguous word
    n-grams (n = 1..3) that do not start or end with a stopword and do not
    span punctuation.
    """
    if extractor not in EXTRACTORS:
        raise ConfigError(f"unknown extractor {extractor!r}; expected one of {EXTRACTORS}")
    if not doc.text.strip():
        return []
    if extractor == "external":
        mentions = []
        for raw in doc.keywords or ():
            keyword = normalize_keyword(raw)
            if keyword:
                mentions.append(KeywordMention(keyword, doc.id, slice_index, doc.author))
        return mentions
    return _builtin_mentions(doc, slice_index, stopwords or load_stopwords())


def _passes_rule_stage(keyword: str, cfg: FilterConfig) -> bool:
    if len(keyword) < cfg.min_length or len(keyword) > cfg.max_length:
        return False
    if not _WORD_RE.search(keyword):
        return False  # pure punctuation
    return keyword not in PRONOUNS


def filter_vocabulary(mentions: list[KeywordMention], cfg: FilterConfig,
                      n_documents: int | None = None) -> SliceVocabulary:
    """Run the rule -> stopword -> frequency stages over one slice's mentions.

    n_documents is the slice's document count used by the ratio cap; when
    omitted it falls back to the number of distinct documents seen in the
    mentions. Fatal if nothing survives, since clustering needs |V_t| > 0.
    """
    if not mentions:
        raise DataError("no keyword mentions to filter in this slice")
    slice_indices = {m.slice_index for m in mentions}
    if len(slice_indices) != 1:
        raise DataError(f"mentions span multiple slices: {sorted(slice_indices)}")
    slice_index = slice_indices.pop()

    docs_by_kw: dict[str, set[str]] = {}
    authors_by_kw: dict[str, set[str]] = {}
    for m in mentions:
        docs_by_kw.setdefault(m.keyword, set()).add(m.document_id)
        authors_by_kw.setdefault(m.keyword, set()).add(m.author)
    if n_documents is None:
        n_documents = len({m.document_id for m in mentions})

    candidates = sorted(docs_by_kw)
    survivors = [k for k in candidates if _passes_rule_stage(k, cfg)]
    dropped_rule = len(candidates) - len(survivors)

    after_stop = [k for k in survivors if k not in cfg.stopwords]
    dropped_stop = len(survivors) - len(after_stop)

    max_df = cfg.max_doc_freq_ratio * n_documents
    kept = [
        k for k in after_stop
        if len(docs_by_kw[k]) > cfg.min_doc_freq and len(docs_by_kw[k]) <= max_df
    ]
    dropped_freq = len(after_stop) - len(kept)

    drop_counts = {"rule": dropped_rule, "stopword": dropped_stop,
                   "frequency": dropped_freq, "kept": len(kept)}
    log.info("slice %s vocabulary: %s", slice_index, drop_counts)
    if not kept:
        raise DataError(
            f"slice {slice_index}: vocabulary empty after filtering "
            f"(drops: rule={dropped_rule}, stopword={dropped_stop}, frequency={dropped_freq})"
        )
    stats = {
        k: KeywordStats(
            doc_freq=len(docs_by_kw[k]),
            author_count=len(authors_by_kw[k]),
            document_ids=frozenset(docs_by_kw[k]),
        )
        for k in kept
    }
    return SliceVocabulary(slice_index=slice_index, stats=stats, drop_counts=drop_counts)


def mention_document_index(mentions: list[KeywordMention]) -> dict[str, frozenset[str]]:
    """keyword -> distinct document ids, over raw (unfiltered) mentions.

    The growth indicator matches documents against this index so that a
    keyword's history is visible even in slices where the filter dropped it.
    """
    docs: dict[str, set[str]] = {}
    for m in mentions:
        docs.setdefault(m.keyword, set()).add(m.document_id)
    return {k: frozenset(v) for k, v in docs.items()}
