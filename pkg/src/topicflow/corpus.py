"""Ingestion of time-stamped documents and partitioning into time slices.

Input is line-delimited JSON with fields {id, text, author, created_utc};
created_utc is accepted as integer epoch seconds or an ISO-8601 string.
Malformed records go to a rejection log instead of aborting the load.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

from .errors import ConfigError, DataError

log = logging.getLogger(__name__)

GRANULARITIES = ("year", "quarter", "month", "days")


@dataclass(frozen=True)
class Document:
    """One post or comment; the unit of ingestion."""

    id: str
    text: str
    author: str
    timestamp: datetime
    keywords: tuple[str, ...] | None = None  # optional precomputed keywords


@dataclass(frozen=True)
class Rejection:
    record: int  # 1-based record number (blank lines are not records)
    reason: str


@dataclass
class DocumentSet:
    documents: list[Document]
    rejections: list[Rejection]

    def __len__(self) -> int:
        return len(self.documents)

    @property
    def total_records(self) -> int:
        return len(self.documents) + len(self.rejections)


@dataclass(frozen=True)
class SlicePolicy:
    """Half-open time range split by calendar unit or fixed day width.

    Timestamps exactly on a boundary belong to the later slice.
    """

    start: datetime
    end: datetime
    granularity: str = "year"
    width_days: int | None = None

    def __post_init__(self):
        if self.granularity not in GRANULARITIES:
            raise ConfigError(
                f"unknown granularity {self.granularity!r}; expected one of {GRANULARITIES}"
            )
        object.__setattr__(self, "start", _as_utc(self.start))
        object.__setattr__(self, "end", _as_utc(self.end))
        if self.start >= self.end:
            raise ConfigError("slice range is empty (start must precede end)")
        if self.granularity == "days":
            if not self.width_days or self.width_days < 1:
                raise ConfigError("granularity 'days' requires width_days >= 1")
        if len(self.boundaries()) < 3:
            raise ConfigError(
                "policy yields fewer than 2 slices; evolution needs at least two"
            )

    def boundaries(self) -> list[datetime]:
        """Slice edges b_0 < b_1 < ... < b_n; slice i covers [b_i, b_{i+1})."""
        edges = [self.start]
        cursor = self.start
        while True:
            cursor = _next_edge(cursor, self.granularity, self.width_days)
            if cursor >= self.end:
                break
            edges.append(cursor)
        edges.append(self.end)
        return edges

    def labels(self) -> list[str]:
        return [_slice_label(b, self.granularity) for b in self.boundaries()[:-1]]


@dataclass
class Slice:
    index: int
    label: str
    start: datetime
    end: datetime
    documents: list[Document] = field(default_factory=list)


@dataclass
class SlicedCorpus:
    """Ordered slices plus counts for everything that fell outside them."""

    slices: list[Slice]
    out_of_range: int
    rejected: int

    @property
    def n_documents(self) -> int:
        return sum(len(s.documents) for s in self.slices)

    def slice_counts(self) -> list[tuple[str, int]]:
        return [(s.label, len(s.documents)) for s in self.slices]


def _as_utc(value: datetime) -> datetime:
    if value.tzinfo is None:
        return value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc)


def _next_edge(edge: datetime, granularity: str, width_days: int | None) -> datetime:
    if granularity == "year":
        return datetime(edge.year + 1, 1, 1, tzinfo=timezone.utc)
    if granularity == "quarter":
        q_month = ((edge.month - 1) // 3) * 3 + 4
        year, month = edge.year, q_month
        if month > 12:
            year, month = year + 1, 1
        return datetime(year, month, 1, tzinfo=timezone.utc)
    if granularity == "month":
        year, month = (edge.year, edge.month + 1) if edge.month < 12 else (edge.year + 1, 1)
        return datetime(year, month, 1, tzinfo=timezone.utc)
    return edge + timedelta(days=width_days)


def _slice_label(start: datetime, granularity: str) -> str:
    if granularity == "year":
        return str(start.year)
    if granularity == "quarter":
        return f"{start.year}Q{(start.month - 1) // 3 + 1}"
    if granularity == "month":
        return f"{start.year}-{start.month:02d}"
    return start.date().isoformat()


def parse_timestamp(value) -> datetime:
    """Epoch seconds (int/float) or ISO-8601 string, normalized to UTC."""
    if isinstance(value, bool):
        raise ValueError("boolean is not a timestamp")
    if isinstance(value, (int, float)):
        return datetime.fromtimestamp(int(value), tz=timezone.utc)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty timestamp")
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        return _as_utc(datetime.fromisoformat(text))
    raise ValueError(f"unsupported timestamp type {type(value).__name__}")


def _parse_record(obj: dict, seen_ids: set[str]) -> Document:
    for key in ("id", "text", "author", "created_utc"):
        if key not in obj or obj[key] is None:
            raise ValueError(f"missing {'timestamp' if key == 'created_utc' else key}")
    doc_id = str(obj["id"])
    if doc_id in seen_ids:
        raise ValueError("duplicate id")
    text = str(obj["text"])
    if not text.strip():
        raise ValueError("empty text")
    try:
        ts = parse_timestamp(obj["created_utc"])
    except (ValueError, OverflowError, OSError) as exc:
        raise ValueError(f"unparseable timestamp: {exc}") from exc
    keywords = None
    if obj.get("keywords") is not None:
        kws = obj["keywords"]
        if not isinstance(kws, list) or not all(isinstance(k, str) for k in kws):
            raise ValueError("keywords field must be a list of strings")
        keywords = tuple(kws)
    return Document(id=doc_id, text=text, author=str(obj["author"]), timestamp=ts,
                    keywords=keywords)


def load_documents(path, format: str = "jsonl") -> DocumentSet:
    """Load every valid record; collect malformed ones in the rejection log.

    Fatal only on an unreadable file, an unknown format tag, or when more
    than half of the records are rejected (which signals a wrong schema).
    """
    if format != "jsonl":
        raise ConfigError(f"unknown input format {format!r}; expected 'jsonl'")
    documents: list[Document] = []
    rejections: list[Rejection] = []
    seen_ids: set[str] = set()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise DataError(f"cannot read corpus file {path}: {exc}") from exc

    record_no = 0
    for line in lines:
        if not line.strip():
            continue
        record_no += 1
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise ValueError("record is not a JSON object")
            doc = _parse_record(obj, seen_ids)
        except json.JSONDecodeError as exc:
            rejections.append(Rejection(record=record_no, reason=f"invalid JSON: {exc.msg}"))
            continue
        except ValueError as exc:
            rejections.append(Rejection(record=record_no, reason=str(exc)))
            continue
        seen_ids.add(doc.id)
        documents.append(doc)

    total = len(documents) + len(rejections)
    if total and len(rejections) * 2 > total:
        by_reason: dict[str, int] = {}
        for rej in rejections:
            by_reason[rej.reason] = by_reason.get(rej.reason, 0) + 1
        summary = ", ".join(f"{r}: {n}" for r, n in sorted(by_reason.items()))
        raise DataError(
            f"{len(rejections)}/{total} records rejected (wrong schema?): {summary}"
        )
    return DocumentSet(documents=documents, rejections=rejections)


def assign_slices(docs: DocumentSet, policy: SlicePolicy) -> SlicedCorpus:
    """Partition documents into the policy's slices.

    Every in-range document lands in exactly one slice; out-of-range
    documents are counted, not silently dropped. Empty slices are kept so
    indices stay aligned with calendar labels.
    """
    edges = policy.boundaries()
    labels = policy.labels()
    slices = [
        Slice(index=i, label=labels[i], start=edges[i], end=edges[i + 1])
        for i in range(len(labels))
    ]
    out_of_range = 0
    for doc in docs.documents:
        ts = _as_utc(doc.timestamp)
        if ts < policy.start or ts >= policy.end:
            out_of_range += 1
            continue
        # binary search over slice edges; boundary timestamps go to the later slice
        lo, hi = 0, len(slices) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if ts >= edges[mid]:
                lo = mid
            else:
                hi = mid - 1
        slices[lo].documents.append(doc)

    populated = sum(1 for s in slices if s.documents)
    if populated == 0:
        raise DataError("no documents fall inside the slice range")
    for s in slices:
        if not s.documents:
            log.warning("slice %s (%s) has zero documents", s.index, s.label)
    if out_of_range:
        log.info("%d documents outside the slice range were excluded", out_of_range)
    return SlicedCorpus(slices=slices, out_of_range=out_of_range,
                        rejected=len(docs.rejections))
