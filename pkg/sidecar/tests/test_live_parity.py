"""Contract parity: the primary's http provider against a live sidecar.

Starts a real uvicorn server (debug encoder, so no model download) and
drives it with the consumer package's provider, exercising the same
behaviors its own suite checks against a stub: fetch, order, dedup,
dimension enforcement, health check, and table round-trip.
"""

import threading
import time

import numpy as np
import pytest
import uvicorn

topicflow_embedding = pytest.importorskip(
    "topicflow.embedding", reason="consumer package not installed")

from embed_sidecar.app import create_app


@pytest.fixture(scope="module")
def live_sidecar():
    app = create_app(model_name="debug-hash-24", batch_cap=256)
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("sidecar did not start")
        time.sleep(0.02)
    port = server.servers[0].sockets[0].getsockname()[1]
    try:
        yield f"http://127.0.0.1:{port}"
    finally:
        server.should_exit = True
        thread.join(timeout=5)


def _provider(url, **over):
    kwargs = dict(kind="http", dim=24, base_url=url, batch_size=16)
    kwargs.update(over)
    return topicflow_embedding.ProviderConfig(**kwargs)


class TestProviderAgainstLiveSidecar:
    def test_healthz_contract(self, live_sidecar):
        info = topicflow_embedding.check_http_provider(_provider(live_sidecar))
        assert info == {"model": "debug-hash-24", "dim": 24}

    def test_embed_vocabulary_end_to_end(self, live_sidecar):
        keywords = {f"planted keyword {i:02d}" for i in range(40)}
        table = topicflow_embedding.embed_vocabulary(keywords, _provider(live_sidecar))
        assert len(table) == 40
        assert all(len(table.vector(kw)) == 24 for kw in keywords)

    def test_vectors_stable_across_calls(self, live_sidecar):
        cfg = _provider(live_sidecar)
        a = topicflow_embedding.embed_vocabulary({"battery pack"}, cfg)
        b = topicflow_embedding.embed_vocabulary({"battery pack"}, cfg)
        assert a.vector("battery pack").tobytes() == b.vector("battery pack").tobytes()

    def test_cache_prevents_re_requests(self, live_sidecar):
        cfg = _provider(live_sidecar)
        table = topicflow_embedding.embed_vocabulary({"shared term", "one off"}, cfg)
        before = table.vector("shared term").copy()
        table = topicflow_embedding.embed_vocabulary({"shared term", "second off"}, cfg,
                                                     cache=table)
        assert np.array_equal(table.vector("shared term"), before)
        assert len(table) == 3

    def test_wrong_configured_dim_is_fatal(self, live_sidecar):
        with pytest.raises(topicflow_embedding.ProviderError, match="dimension"):
            topicflow_embedding.embed_vocabulary({"kw"}, _provider(live_sidecar, dim=99))

    def test_table_round_trip_from_live_vectors(self, live_sidecar, tmp_path):
        keywords = {f"trip keyword {i}" for i in range(8)}
        table = topicflow_embedding.embed_vocabulary(keywords, _provider(live_sidecar))
        path = tmp_path / "live.tsv"
        table.save(path, dtype="f8")
        loaded = topicflow_embedding.EmbeddingTable.load(path)
        for kw in keywords:
            assert loaded.vector(kw).tobytes() == table.vector(kw).tobytes()

    def test_batch_of_64_under_five_seconds(self, live_sidecar):
        keywords = {f"latency keyword {i:02d}" for i in range(64)}
        started = time.perf_counter()
        table = topicflow_embedding.embed_vocabulary(
            keywords, _provider(live_sidecar, batch_size=64))
        assert time.perf_counter() - started < 5.0
        assert len(table) == 64
