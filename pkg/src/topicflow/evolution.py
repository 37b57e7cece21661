"""Topic linking across adjacent slices, flow classification, Sankey export.

A link from topic c_i (slice t) to c_j (slice t+1) carries the raw
intersection size as its weight and is admitted when the Jaccard
coefficient strictly exceeds the threshold (an overlap-coefficient gate
is available as an alternative). Flow classes describe each node's role
from its in-degree b and out-degree f.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .clustering import Topic
from .errors import ConfigError, DataError

log = logging.getLogger(__name__)

GATES = ("jaccard", "overlap")

FLOW_CLASSES = ("constant", "seed", "consolidate", "temporary", "birth", "death", "boundary")


@dataclass(frozen=True)
class TopicLink:
    source: str           # topic id in slice t
    target: str           # topic id in slice t+1
    weight: int           # |c_i ∩ c_j|
    jaccard: float        # |c_i ∩ c_j| / |c_i ∪ c_j|


@dataclass
class TopicGraph:
    """Time-directed graph over all detected topics."""

    topics: dict[str, Topic]
    edges: list[TopicLink]
    slice_indices: list[int]            # every slice position, topics or not
    flow_classes: dict[str, str] = field(default_factory=dict)

    def in_degree(self, topic_id: str) -> int:
        return sum(1 for e in self.edges if e.target == topic_id)

    def out_degree(self, topic_id: str) -> int:
        return sum(1 for e in self.edges if e.source == topic_id)

    def backward_topics(self, topic_id: str) -> list[str]:
        return sorted(e.source for e in self.edges if e.target == topic_id)

    def forward_topics(self, topic_id: str) -> list[str]:
        return sorted(e.target for e in self.edges if e.source == topic_id)


def _pair_measures(a: Topic, b: Topic) -> tuple[int, float, float]:
    inter = len(a.members & b.members)
    union = len(a.members | b.members)
    jaccard = inter / union if union else 0.0
    overlap = inter / min(len(a.members), len(b.members)) if inter else 0.0
    return inter, jaccard, overlap


def link_topics(topics_t: list[Topic], topics_next: list[Topic], theta: float,
                gate: str = "jaccard") -> list[TopicLink]:
    """Links between two adjacent slices' topics.

    The gate is strict (measure > theta), so theta=0 still requires a
    non-empty intersection and theta=1 admits nothing.
    """
    if not 0.0 <= theta <= 1.0:
        raise ConfigError(f"theta must lie in [0, 1], got {theta}")
    if gate not in GATES:
        raise ConfigError(f"unknown gate {gate!r}; expected one of {GATES}")
    if topics_t and topics_next:
        slices_t = {t.slice_index for t in topics_t}
        slices_next = {t.slice_index for t in topics_next}
        if len(slices_t) != 1 or len(slices_next) != 1:
            raise DataError("each side of link_topics must come from a single slice")
        if slices_t.pop() + 1 != slices_next.pop():
            raise DataError("link_topics expects adjacent slices (t and t+1)")
    links = []
    for a in topics_t:
        for b in topics_next:
            inter, jaccard, overlap = _pair_measures(a, b)
            measure = jaccard if gate == "jaccard" else overlap
            if measure > theta:
                links.append(TopicLink(source=a.topic_id, target=b.topic_id,
                                       weight=inter, jaccard=jaccard))
    return links


def build_graph(topics_by_slice: list[list[Topic]], theta: float,
                gate: str = "jaccard") -> TopicGraph:
    """Assemble the full evolution graph over consecutive slices.

    topics_by_slice must cover every slice position in order; an empty
    slice contributes no nodes but still counts as a position, so a topic
    followed only by an empty slice is a death, not a boundary.
    """
    if not topics_by_slice:
        raise DataError("build_graph needs at least one slice")
    offset = None
    for position, slice_topics in enumerate(topics_by_slice):
        indices = {t.slice_index for t in slice_topics}
        if len(indices) > 1:
            raise DataError(f"slice position {position} mixes slice indices {sorted(indices)}")
        if indices:
            inferred = indices.pop() - position
            if offset is None:
                offset = inferred
            elif inferred != offset:
                raise DataError("topics_by_slice positions do not line up with slice indices")
    if offset is None:
        offset = 0  # no topics anywhere; keep positional indices
    topics: dict[str, Topic] = {}
    for slice_topics in topics_by_slice:
        for topic in slice_topics:
            if topic.topic_id in topics:
                raise DataError(f"duplicate topic id {topic.topic_id}")
            topics[topic.topic_id] = topic
    edges: list[TopicLink] = []
    for left, right in zip(topics_by_slice, topics_by_slice[1:]):
        edges.extend(link_topics(left, right, theta, gate))
    slice_indices = [offset + i for i in range(len(topics_by_slice))]
    return TopicGraph(topics=topics, edges=edges, slice_indices=slice_indices)


def classify_flows(graph: TopicGraph) -> dict[str, str]:
    """Assign every node exactly one flow class.

    Interior nodes follow the (in-degree b, out-degree f) taxonomy:
    (1,1) constant, (1,>=2) seed, (>=2,1) consolidate, (>=2,>=2) temporary,
    b=0 birth, f=0 death (birth wins for isolated nodes). Edge-slice nodes
    whose class would depend on the missing side are boundary.
    """
    if not graph.topics:
        graph.flow_classes = {}
        return {}
    first = min(graph.slice_indices)
    last = max(graph.slice_indices)
    in_deg = {tid: 0 for tid in graph.topics}
    out_deg = {tid: 0 for tid in graph.topics}
    for e in graph.edges:
        out_deg[e.source] += 1
        in_deg[e.target] += 1

    classes: dict[str, str] = {}
    for tid, topic in graph.topics.items():
        t = topic.slice_index
        b, f = in_deg[tid], out_deg[tid]
        if t == first and t == last:
            cls = "boundary"  # single-slice graph: no flow information at all
        elif t == first:
            cls = "death" if f == 0 else "boundary"
        elif t == last:
            cls = "birth" if b == 0 else "boundary"
        elif b == 0:
            cls = "birth"  # takes precedence over death for isolated nodes
        elif f == 0:
            cls = "death"
        elif b == 1 and f == 1:
            cls = "constant"
        elif b == 1:
            cls = "seed"
        elif f == 1:
            cls = "consolidate"
        else:
            cls = "temporary"
        classes[tid] = cls
    graph.flow_classes = classes
    return classes


@dataclass(frozen=True)
class ThresholdCurve:
    points: tuple[tuple[float, int], ...]   # (theta, total link count)
    elbow: float | None                     # grid point maximizing the second difference


def threshold_curve(topics_by_slice: list[list[Topic]], thetas,
                    gate: str = "jaccard") -> ThresholdCurve:
    """Total link count per threshold, for picking theta by elbow."""
    thetas = list(thetas)
    if not thetas:
        raise ConfigError("theta grid is empty")
    if any(t2 <= t1 for t1, t2 in zip(thetas, thetas[1:])):
        raise ConfigError("theta grid must be strictly increasing")
    if thetas[0] < 0.0 or thetas[-1] > 1.0:
        raise ConfigError("theta grid must stay within [0, 1]")

    measures = []
    for left, right in zip(topics_by_slice, topics_by_slice[1:]):
        for a in left:
            for b in right:
                inter, jaccard, overlap = _pair_measures(a, b)
                if inter:
                    measures.append(jaccard if gate == "jaccard" else overlap)
    counts = [sum(1 for m in measures if m > theta) for theta in thetas]

    elbow = None
    if len(thetas) >= 3:
        best = -float("inf")
        for i in range(1, len(thetas) - 1):
            second_diff = counts[i - 1] - 2 * counts[i] + counts[i + 1]
            if second_diff > best:
                best = second_diff
                elbow = thetas[i]
    return ThresholdCurve(points=tuple(zip(thetas, counts)), elbow=elbow)


def export_sankey(graph: TopicGraph) -> dict:
    """JSON-ready Sankey document (nodes slice-major, topic-index-minor)."""
    if not graph.flow_classes:
        classify_flows(graph)
    ordered = sorted(graph.topics.values(), key=lambda t: (t.slice_index, t.topic_index))
    nodes = [
        {
            "id": t.topic_id,
            "slice": t.slice_index,
            "label": t.label or ", ".join(kw for kw, _ in t.representatives[:3]),
            "size": len(t.members),
            "flow_class": graph.flow_classes[t.topic_id],
        }
        for t in ordered
    ]
    position = {t.topic_id: (t.slice_index, t.topic_index) for t in ordered}
    links = [
        {"source": e.source, "target": e.target, "value": e.weight, "jaccard": e.jaccard}
        for e in sorted(graph.edges, key=lambda e: (position[e.source], position[e.target]))
    ]
    return {"nodes": nodes, "links": links}
