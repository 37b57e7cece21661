"""Pipeline orchestration and command-line interface.

One JSON config drives the whole run; every stage reads only the declared
files of the stage before it, so stages can be re-run individually. All
artifacts are written deterministically (sorted keys, no wall-clock
content): re-running with the same config and seed reproduces every output
byte for byte.

Exit codes: 0 success, 1 config error, 2 data error, 3 provider error.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import corpus as corpus_mod
from . import emergence as emergence_mod
from .clustering import ClusteringConfig, Topic, detect_topics
from .embedding import EmbeddingTable, ProviderConfig, embed_vocabulary
from .errors import ConfigError, DataError, TopicflowError
from .evolution import build_graph, classify_flows, export_sankey, threshold_curve
from .preprocess import (FilterConfig, SliceVocabulary, KeywordStats,
                         extract_keywords, filter_vocabulary, load_stopwords,
                         mention_document_index)
from .seeding import derive_seed

log = logging.getLogger(__name__)

ENV_EMBED_URL = "TOPICFLOW_EMBED_URL"

# Shipped defaults follow the reference deployment: yearly slices, keyword
# length 6..40, document-frequency cutoff 5, linking threshold 0.1, equal
# TOPSIS weights, 1024-dim embeddings.
DEFAULT_CONFIG: dict = {
    "corpus": {"path": None, "format": "jsonl"},
    "slices": {"granularity": "year", "start": None, "end": None, "width_days": None},
    "extractor": "builtin",
    "filter": {
        "min_length": 6,
        "max_length": 40,
        "min_doc_freq": 5,
        "max_doc_freq_ratio": 0.5,
        "extra_stopwords": [],
    },
    "embedding": {
        "kind": "hash",
        "dim": 1024,
        "seed": None,
        "path": None,
        "base_url": None,
        "batch_size": 64,
        "timeout": 10.0,
        "max_retries": 3,
    },
    "clustering": {
        "max_clusters": 50,
        "gap_refs": 10,
        "k_policy": "argmax-gap",
        "restarts": 5,
        "max_iter": 300,
        "tol": 1e-6,
    },
    "linking": {
        "theta": 0.1,
        "theta_grid": [round(0.05 * i, 2) for i in range(11)],
        "gate": "jaccard",
    },
    "topsis": {
        "weights": [0.25, 0.25, 0.25, 0.25],
        "directions": ["benefit", "cost", "cost", "cost"],
    },
    "representatives": 6,
    "include_centroids": False,
    "output_dir": "artifacts",
    "seed": None,
}

STAGES = ("ingest", "preprocess", "embed", "detect", "link", "score")

ARTIFACTS = {
    "documents": "documents.jsonl",
    "rejections": "rejections.jsonl",
    "slices": "slices.json",
    "vocabulary": "vocabulary.jsonl",
    "mention_docs": "mention_docs.jsonl",
    "drop_counts": "drop_counts.json",
    "embeddings": "embeddings.tsv",
    "topics": "topics.json",
    "graph": "graph.json",
    "sankey": "sankey.json",
    "threshold_curve": "threshold_curve.csv",
    "ranking": "ranking.csv",
    "manifest": "manifest.json",
}


def _merge_defaults(user: dict, defaults: dict, path: str = "") -> dict:
    merged = copy.deepcopy(defaults)
    for key, value in user.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(defaults[key], dict) and defaults[key]:
            if not isinstance(value, dict):
                raise ConfigError(f"config key {path + key!r} must be an object")
            merged[key] = _merge_defaults(value, defaults[key], path + key + ".")
        else:
            merged[key] = value
    return merged


@dataclass
class PipelineConfig:
    raw: dict  # merged, validated config dictionary

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "PipelineConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object")
        merged = _merge_defaults(user, DEFAULT_CONFIG)
        for key, value in (overrides or {}).items():
            node = merged
            *parents, leaf = key.split(".")
            for part in parents:
                node = node[part]
            node[leaf] = value
        env_url = os.environ.get(ENV_EMBED_URL)
        if env_url:
            merged["embedding"]["base_url"] = env_url
        cfg = cls(raw=merged)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        raw = self.raw
        if not raw["corpus"]["path"]:
            raise ConfigError("corpus.path is required")
        self.slice_policy()
        self.filter_config()
        self.provider_config()
        self.clustering_config()
        self.topsis_config()
        if raw["extractor"] not in ("builtin", "external"):
            raise ConfigError(f"unknown extractor {raw['extractor']!r}")
        if not isinstance(raw["representatives"], int) or raw["representatives"] < 1:
            raise ConfigError("representatives must be a positive integer")

    def require_seed(self) -> int:
        if self.raw["seed"] is None:
            raise ConfigError("seed is required (set config key 'seed' or pass --seed)")
        return int(self.raw["seed"])

    @property
    def output_dir(self) -> Path:
        return Path(self.raw["output_dir"])

    def artifact(self, name: str) -> Path:
        return self.output_dir / ARTIFACTS[name]

    def slice_policy(self) -> corpus_mod.SlicePolicy:
        s = self.raw["slices"]
        if s["start"] is None or s["end"] is None:
            raise ConfigError("slices.start and slices.end are required")
        try:
            start = corpus_mod.parse_timestamp(s["start"])
            end = corpus_mod.parse_timestamp(s["end"])
        except ValueError as exc:
            raise ConfigError(f"bad slice range: {exc}") from exc
        return corpus_mod.SlicePolicy(start=start, end=end, granularity=s["granularity"],
                                      width_days=s["width_days"])

    def filter_config(self) -> FilterConfig:
        f = self.raw["filter"]
        stopwords = load_stopwords() | frozenset(
            w.strip().lower() for w in f["extra_stopwords"] if w.strip()
        )
        return FilterConfig(min_length=f["min_length"], max_length=f["max_length"],
                            min_doc_freq=f["min_doc_freq"],
                            max_doc_freq_ratio=f["max_doc_freq_ratio"],
                            stopwords=frozenset(stopwords))

    def provider_config(self) -> ProviderConfig:
        e = self.raw["embedding"]
        seed = e["seed"]
        if seed is None:
            seed = derive_seed(self.raw["seed"] or 0, "embedding")
        return ProviderConfig(kind=e["kind"], dim=e["dim"], seed=seed, path=e["path"],
                              base_url=e["base_url"], batch_size=e["batch_size"],
                              timeout=e["timeout"], max_retries=e["max_retries"])

    def clustering_config(self) -> ClusteringConfig:
        c = self.raw["clustering"]
        return ClusteringConfig(max_clusters=c["max_clusters"], gap_refs=c["gap_refs"],
                                k_policy=c["k_policy"], restarts=c["restarts"],
                                max_iter=c["max_iter"], tol=c["tol"],
                                seed=self.raw["seed"] or 0)

    def topsis_config(self) -> emergence_mod.TopsisConfig:
        t = self.raw["topsis"]
        return emergence_mod.TopsisConfig(weights=tuple(t["weights"]),
                                          directions=tuple(t["directions"]))

    def canonical_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, ensure_ascii=False,
                          separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# deterministic artifact io

def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def write_jsonl(path: Path, records) -> int:
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(_dump(rec) + "\n")
            n += 1
    return n


def read_jsonl(path: Path) -> list[dict]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]
    except OSError as exc:
        raise DataError(f"missing artifact {path} (run the earlier stage first): {exc}") from exc


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2) + "\n")


def read_json(path: Path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise DataError(f"missing artifact {path} (run the earlier stage first): {exc}") from exc


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# stages

def stage_ingest(cfg: PipelineConfig) -> dict:
    policy = cfg.slice_policy()
    docs = corpus_mod.load_documents(cfg.raw["corpus"]["path"], cfg.raw["corpus"]["format"])
    sliced = corpus_mod.assign_slices(docs, policy)
    slice_of = {}
    for s in sliced.slices:
        for doc in s.documents:
            slice_of[doc.id] = s.index

    def doc_records():
        for doc in docs.documents:
            rec = {
                "id": doc.id,
                "text": doc.text,
                "author": doc.author,
                "created_utc": int(doc.timestamp.timestamp()),
                "slice": slice_of.get(doc.id),
            }
            if doc.keywords is not None:
                rec["keywords"] = list(doc.keywords)
            yield rec

    n_docs = write_jsonl(cfg.artifact("documents"), doc_records())
    write_jsonl(cfg.artifact("rejections"),
                ({"record": r.record, "reason": r.reason} for r in docs.rejections))
    write_json(cfg.artifact("slices"), {
        "granularity": policy.granularity,
        "start": policy.start.isoformat(),
        "end": policy.end.isoformat(),
        "slices": [
            {"index": s.index, "label": s.label, "start": s.start.isoformat(),
             "end": s.end.isoformat(), "documents": len(s.documents)}
            for s in sliced.slices
        ],
        "out_of_range": sliced.out_of_range,
        "rejected": sliced.rejected,
        "total_records": docs.total_records,
    })
    return {"documents": n_docs, "rejected": len(docs.rejections),
            "out_of_range": sliced.out_of_range}


def stage_preprocess(cfg: PipelineConfig) -> dict:
    filter_cfg = cfg.filter_config()
    extractor = cfg.raw["extractor"]
    stopwords = filter_cfg.stopwords
    slices_meta = read_json(cfg.artifact("slices"))
    doc_rows = read_jsonl(cfg.artifact("documents"))

    mentions_by_slice: dict[int, list] = {s["index"]: [] for s in slices_meta["slices"]}
    docs_by_slice: dict[int, set[str]] = {s["index"]: set() for s in slices_meta["slices"]}
    for row in doc_rows:
        if row["slice"] is None:
            continue
        doc = corpus_mod.Document(
            id=row["id"], text=row["text"], author=row["author"],
            timestamp=corpus_mod.parse_timestamp(row["created_utc"]),
            keywords=tuple(row["keywords"]) if row.get("keywords") is not None else None,
        )
        t = row["slice"]
        docs_by_slice[t].add(doc.id)
        mentions_by_slice[t].extend(extract_keywords(doc, extractor, t, stopwords))

    vocab_rows = []
    mention_rows = []
    drop_counts = {}
    n_keywords = 0
    for t in sorted(mentions_by_slice):
        mentions = mentions_by_slice[t]
        if not mentions:
            log.warning("slice %d has no keyword mentions; it will have zero topics", t)
            drop_counts[str(t)] = {"rule": 0, "stopword": 0, "frequency": 0, "kept": 0}
            continue
        vocab = filter_vocabulary(mentions, filter_cfg, n_documents=len(docs_by_slice[t]))
        drop_counts[str(t)] = vocab.drop_counts
        for kw in sorted(vocab.stats):
            st = vocab.stats[kw]
            vocab_rows.append({"slice": t, "keyword": kw, "df": st.doc_freq,
                               "author_count": st.author_count})
        index = mention_document_index(mentions)
        for kw in sorted(index):
            mention_rows.append({"slice": t, "keyword": kw,
                                 "doc_ids": sorted(index[kw])})
        n_keywords += len(vocab)

    write_jsonl(cfg.artifact("vocabulary"), vocab_rows)
    n_mentions = write_jsonl(cfg.artifact("mention_docs"), mention_rows)
    write_json(cfg.artifact("drop_counts"), drop_counts)
    if n_keywords == 0:
        raise DataError("no slice produced a non-empty vocabulary")
    return {"keywords": n_keywords, "mention_keywords": n_mentions}


def _load_vocabularies(cfg: PipelineConfig) -> dict[int, SliceVocabulary]:
    rows = read_jsonl(cfg.artifact("vocabulary"))
    stats: dict[int, dict[str, KeywordStats]] = {}
    for row in rows:
        stats.setdefault(row["slice"], {})[row["keyword"]] = KeywordStats(
            doc_freq=row["df"], author_count=row["author_count"], document_ids=frozenset())
    return {t: SliceVocabulary(slice_index=t, stats=s) for t, s in stats.items()}


def stage_embed(cfg: PipelineConfig) -> dict:
    provider = cfg.provider_config()
    vocabs = _load_vocabularies(cfg)
    keywords = sorted(set().union(*(v.keywords for v in vocabs.values())))
    if not keywords:
        raise DataError("vocabulary artifact is empty")
    table = embed_vocabulary(keywords, provider,
                             cache_path=cfg.output_dir / "embeddings.partial.tsv")
    table.save(cfg.artifact("embeddings"), dtype="f8")
    return {"vectors": len(table)}


def stage_detect(cfg: PipelineConfig) -> dict:
    vocabs = _load_vocabularies(cfg)
    table = EmbeddingTable.load(cfg.artifact("embeddings"))
    slices_meta = read_json(cfg.artifact("slices"))
    labels = {s["index"]: s["label"] for s in slices_meta["slices"]}
    clustering_cfg = cfg.clustering_config()

    topic_rows = []
    n_topics = 0
    for t in sorted(labels):
        vocab = vocabs.get(t)
        if vocab is None:
            continue
        topics = detect_topics(vocab, table, clustering_cfg,
                               n_representatives=cfg.raw["representatives"],
                               slice_label=labels[t])
        for topic in topics:
            row = {
                "slice": topic.slice_index,
                "slice_label": topic.slice_label,
                "topic_id": topic.topic_id,
                "topic_index": topic.topic_index,
                "members": sorted(topic.members),
                "representatives": [
                    {"keyword": kw, "distance": dist} for kw, dist in topic.representatives
                ],
            }
            if cfg.raw["include_centroids"]:
                row["centroid"] = [float(v) for v in topic.centroid]
            topic_rows.append(row)
        n_topics += len(topics)
    write_json(cfg.artifact("topics"), topic_rows)
    return {"topics": n_topics}


def _load_topics_by_slice(cfg: PipelineConfig) -> tuple[list[list[Topic]], dict[int, str]]:
    rows = read_json(cfg.artifact("topics"))
    slices_meta = read_json(cfg.artifact("slices"))
    labels = {s["index"]: s["label"] for s in slices_meta["slices"]}
    by_slice: dict[int, list[Topic]] = {t: [] for t in labels}
    for row in rows:
        by_slice[row["slice"]].append(Topic(
            slice_index=row["slice"],
            topic_index=row["topic_index"],
            members=frozenset(row["members"]),
            representatives=tuple((r["keyword"], r["distance"])
                                  for r in row["representatives"]),
            slice_label=row["slice_label"],
        ))
    ordered = [sorted(by_slice[t], key=lambda tp: tp.topic_index) for t in sorted(by_slice)]
    return ordered, labels


def stage_link(cfg: PipelineConfig) -> dict:
    topics_by_slice, _ = _load_topics_by_slice(cfg)
    linking = cfg.raw["linking"]
    graph = build_graph(topics_by_slice, linking["theta"], linking["gate"])
    classify_flows(graph)
    curve = threshold_curve(topics_by_slice, linking["theta_grid"], linking["gate"])

    write_json(cfg.artifact("graph"), {
        "theta": linking["theta"],
        "gate": linking["gate"],
        "nodes": sorted(graph.topics),
        "edges": [
            {"source": e.source, "target": e.target, "weight": e.weight,
             "jaccard": e.jaccard}
            for e in sorted(graph.edges, key=lambda e: (e.source, e.target))
        ],
        "flow_classes": graph.flow_classes,
        "elbow_theta": curve.elbow,
    })
    write_json(cfg.artifact("sankey"), export_sankey(graph))
    curve_path = cfg.artifact("threshold_curve")
    curve_path.parent.mkdir(parents=True, exist_ok=True)
    with open(curve_path, "w", encoding="utf-8") as fh:
        fh.write("theta,links\n")
        for theta, count in curve.points:
            fh.write(f"{theta!r},{count}\n")
    return {"edges": len(graph.edges)}


def stage_score(cfg: PipelineConfig) -> dict:
    topics_by_slice, _ = _load_topics_by_slice(cfg)
    vocabs = _load_vocabularies(cfg)
    table = EmbeddingTable.load(cfg.artifact("embeddings"))
    graph_doc = read_json(cfg.artifact("graph"))

    populated = [i for i, topics in enumerate(topics_by_slice) if topics]
    if len(populated) < 2:
        raise DataError("emergence scoring needs at least two slices with topics")
    final_position = populated[-1]
    final_topics = topics_by_slice[final_position]
    final_index = final_topics[0].slice_index

    mention_docs: dict[int, dict[str, frozenset[str]]] = {
        final_index - 1: {}, final_index: {}}
    for row in read_jsonl(cfg.artifact("mention_docs")):
        if row["slice"] in mention_docs:
            mention_docs[row["slice"]][row["keyword"]] = frozenset(row["doc_ids"])

    prior = [vocabs[t] for t in sorted(vocabs) if t < final_index]
    backward = {tid: [] for tid in (t.topic_id for t in final_topics)}
    for edge in graph_doc["edges"]:
        if edge["target"] in backward:
            backward[edge["target"]].append(edge["source"])

    report = emergence_mod.score_emergence(
        final_topics,
        prior_vocabularies=prior,
        final_vocabulary=vocabs[final_index],
        mention_docs_by_slice=mention_docs,
        table=table,
        cfg=cfg.topsis_config(),
    )
    ranking_path = cfg.artifact("ranking")
    ranking_path.parent.mkdir(parents=True, exist_ok=True)
    with open(ranking_path, "w", encoding="utf-8") as fh:
        fh.write("topic_id,label,novelty,growth,coherence,community,"
                 "d_plus,d_minus,P,rank,backward_topics\n")
        for e in report.entries:
            ind = e.indicators
            back = ";".join(sorted(backward.get(e.topic_id, [])))
            fh.write(f"{e.topic_id},{e.label or ''},{ind.novelty!r},{ind.growth!r},"
                     f"{ind.coherence!r},{ind.community!r},{e.d_plus!r},{e.d_minus!r},"
                     f"{e.score!r},{e.rank},{back}\n")
    return {"scored_topics": len(report.entries)}


STAGE_FUNCS = {
    "ingest": stage_ingest,
    "preprocess": stage_preprocess,
    "embed": stage_embed,
    "detect": stage_detect,
    "link": stage_link,
    "score": stage_score,
}


def run_pipeline(cfg: PipelineConfig) -> dict:
    cfg.require_seed()
    counts = {}
    for stage in STAGES:
        try:
            counts[stage] = STAGE_FUNCS[stage](cfg)
        except TopicflowError as exc:
            exc.stage = stage
            raise
    files = {}
    for name, filename in sorted(ARTIFACTS.items()):
        if name == "manifest":
            continue
        path = cfg.output_dir / filename
        if path.exists():
            files[filename] = sha256_file(path)
    manifest = {
        "config_hash": cfg.config_hash(),
        "seed": cfg.raw["seed"],
        "stages": counts,
        "files": files,
    }
    write_json(cfg.artifact("manifest"), manifest)
    return manifest


# ---------------------------------------------------------------------------
# report

def render_report(artifacts_dir: Path, top_n: int = 10) -> str:
    slices_meta = read_json(artifacts_dir / ARTIFACTS["slices"])
    vocab_rows = read_jsonl(artifacts_dir / ARTIFACTS["vocabulary"])
    topic_rows = read_json(artifacts_dir / ARTIFACTS["topics"])
    graph_doc = read_json(artifacts_dir / ARTIFACTS["graph"])

    vocab_sizes: dict[int, int] = {}
    for row in vocab_rows:
        vocab_sizes[row["slice"]] = vocab_sizes.get(row["slice"], 0) + 1
    topic_counts: dict[int, int] = {}
    for row in topic_rows:
        topic_counts[row["slice"]] = topic_counts.get(row["slice"], 0) + 1

    lines = ["slice  label       |V_t|  k_t", "-" * 34]
    for s in slices_meta["slices"]:
        lines.append(f"{s['index']:>5}  {s['label']:<10}  {vocab_sizes.get(s['index'], 0):>5}"
                     f"  {topic_counts.get(s['index'], 0):>3}")

    census: dict[str, int] = {}
    for cls in graph_doc["flow_classes"].values():
        census[cls] = census.get(cls, 0) + 1
    lines.append("")
    lines.append("flow classes: " + (", ".join(f"{k}={v}" for k, v in sorted(census.items()))
                                     or "none"))

    ranking_path = artifacts_dir / ARTIFACTS["ranking"]
    if ranking_path.exists():
        with open(ranking_path, "r", encoding="utf-8") as fh:
            header, *rows = fh.read().splitlines()
        lines.append("")
        lines.append(f"top {min(top_n, len(rows))} emerging topics "
                     "(topic_id, P, novelty, growth, coherence, community):")
        for row in rows[:top_n]:
            f = row.split(",")
            lines.append(f"  {f[0]:<12} P={float(f[8]):.4f} nov={float(f[2]):.3f} "
                         f"gro={float(f[3]):.3f} coh={float(f[4]):.3f} com={float(f[5]):.3f}")
    lines.append("")
    lines.append(f"sankey data: {artifacts_dir / ARTIFACTS['sankey']}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# entry point

def _add_config_arg(parser):
    parser.add_argument("--config", required=True, help="pipeline config JSON")
    parser.add_argument("--seed", type=int, help="override config seed")
    parser.add_argument("--output", help="override output directory")
    parser.add_argument("--corpus", help="override corpus path")
    parser.add_argument("--theta", type=float, help="override linking threshold")


def _overrides_from(args) -> dict:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.output:
        overrides["output_dir"] = args.output
    if args.corpus:
        overrides["corpus.path"] = args.corpus
    if args.theta is not None:
        overrides["linking.theta"] = args.theta
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicflow",
        description="Detect topics per time slice, link them into an evolution "
                    "graph, and rank final-slice topics by emergence.")
    sub = parser.add_subparsers(dest="command", required=True)
    for stage in STAGES:
        stage_parser = sub.add_parser(stage, help=f"run the {stage} stage")
        _add_config_arg(stage_parser)
    run_parser = sub.add_parser("run", help="run the whole pipeline")
    _add_config_arg(run_parser)
    report_parser = sub.add_parser("report", help="summarize pipeline artifacts")
    report_parser.add_argument("artifacts", help="artifact directory of a finished run")
    report_parser.add_argument("--top", type=int, default=10, help="rows in the emergence table")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            print(render_report(Path(args.artifacts), args.top))
            return 0
        cfg = PipelineConfig.from_file(args.config, _overrides_from(args))
        if args.command == "run":
            manifest = run_pipeline(cfg)
            print(f"run complete: {len(manifest['files'])} artifacts in {cfg.output_dir} "
                  f"(config {manifest['config_hash'][:12]})")
            return 0
        counts = STAGE_FUNCS[args.command](cfg)
        print(f"{args.command}: " + ", ".join(f"{k}={v}" for k, v in counts.items()))
        return 0
    except TopicflowError as exc:
        stage = getattr(exc, "stage", None)
        code = {1: "config", 2: "data", 3: "provider"}[exc.exit_code]
        where = f" stage={stage}" if stage else ""
        print(f"error[code={code}{where}]: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
