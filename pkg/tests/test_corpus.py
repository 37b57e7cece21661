"""Ingestion and slice-assignment contracts."""

import json
from datetime import datetime, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topicflow.corpus import (Document, DocumentSet, SlicePolicy, assign_slices,
                              load_documents, parse_timestamp)
from topicflow.errors import ConfigError, DataError


def _utc(*args):
    return datetime(*args, tzinfo=timezone.utc)


def _write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def _record(i, **over):
    rec = {"id": f"d{i}", "text": f"some text {i}", "author": f"u{i % 3}",
           "created_utc": 1430000000 + i}
    rec.update(over)
    return rec


class TestLoadDocuments:
    def test_three_valid_records(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(path, [_record(i) for i in range(3)])
        docs = load_documents(path)
        assert len(docs) == 3
        assert docs.rejections == []

    def test_missing_timestamp_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        recs = [_record(0), _record(1), _record(2)]
        del recs[1]["created_utc"]
        _write_jsonl(path, recs)
        docs = load_documents(path)
        assert len(docs) == 2
        assert len(docs.rejections) == 1
        assert docs.rejections[0].record == 2
        assert docs.rejections[0].reason == "missing timestamp"

    def test_duplicate_id_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(path, [_record(0), _record(1, id="d0"), _record(2)])
        docs = load_documents(path)
        assert [d.id for d in docs.documents] == ["d0", "d2"]
        assert docs.rejections[0].reason == "duplicate id"

    def test_empty_text_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(path, [_record(0, text="   "), _record(1), _record(2)])
        docs = load_documents(path)
        assert len(docs) == 2
        assert docs.rejections[0].reason == "empty text"

    def test_invalid_json_rejected_not_fatal(self, tmp_path):
        path = tmp_path / "c.jsonl"
        with open(path, "w") as fh:
            fh.write(json.dumps(_record(0)) + "\n")
            fh.write("{not json\n")
            fh.write(json.dumps(_record(1)) + "\n")
        docs = load_documents(path)
        assert len(docs) == 2
        assert "invalid JSON" in docs.rejections[0].reason

    def test_majority_rejected_is_fatal(self, tmp_path):
        path = tmp_path / "c.jsonl"
        recs = [_record(0)] + [{"wrong": "schema"} for _ in range(5)]
        _write_jsonl(path, recs)
        with pytest.raises(DataError, match="rejected"):
            load_documents(path)

    def test_unreadable_file_is_fatal(self, tmp_path):
        with pytest.raises(DataError, match="cannot read"):
            load_documents(tmp_path / "missing.jsonl")

    def test_unknown_format_is_config_error(self, tmp_path):
        with pytest.raises(ConfigError):
            load_documents(tmp_path / "x.csv", format="csv")

    def test_iso_timestamps_accepted(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(path, [_record(0, created_utc="2016-03-01T12:00:00Z"),
                            _record(1, created_utc="2016-03-01 12:00:00+02:00")])
        docs = load_documents(path)
        assert docs.documents[0].timestamp == _utc(2016, 3, 1, 12)
        assert docs.documents[1].timestamp == _utc(2016, 3, 1, 10)

    def test_keywords_field_round_trip(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(path, [_record(0, keywords=["cabin air filter"]), _record(1)])
        docs = load_documents(path)
        assert docs.documents[0].keywords == ("cabin air filter",)
        assert docs.documents[1].keywords is None


class TestSlicePolicy:
    def test_rejects_empty_range(self):
        with pytest.raises(ConfigError):
            SlicePolicy(start=_utc(2016, 1, 1), end=_utc(2015, 1, 1))

    def test_rejects_single_slice_range(self):
        with pytest.raises(ConfigError, match="fewer than 2"):
            SlicePolicy(start=_utc(2015, 1, 1), end=_utc(2015, 6, 1))

    def test_yearly_labels(self):
        policy = SlicePolicy(start=_utc(2015, 1, 1), end=_utc(2018, 1, 1))
        assert policy.labels() == ["2015", "2016", "2017"]

    def test_partial_final_year_kept(self):
        policy = SlicePolicy(start=_utc(2015, 1, 1), end=_utc(2016, 10, 1))
        edges = policy.boundaries()
        assert edges[-1] == _utc(2016, 10, 1)
        assert policy.labels() == ["2015", "2016"]

    def test_quarter_and_month_labels(self):
        q = SlicePolicy(start=_utc(2020, 1, 1), end=_utc(2020, 7, 1), granularity="quarter")
        assert q.labels() == ["2020Q1", "2020Q2"]
        m = SlicePolicy(start=_utc(2020, 11, 1), end=_utc(2021, 1, 1), granularity="month")
        assert m.labels() == ["2020-11", "2020-12"]

    def test_fixed_days(self):
        policy = SlicePolicy(start=_utc(2020, 1, 1), end=_utc(2020, 1, 21),
                             granularity="days", width_days=7)
        assert policy.labels() == ["2020-01-01", "2020-01-08", "2020-01-15"]
        with pytest.raises(ConfigError):
            SlicePolicy(start=_utc(2020, 1, 1), end=_utc(2020, 1, 21), granularity="days")


def _docs(*timestamps):
    return DocumentSet(
        documents=[Document(id=f"d{i}", text="body", author="a", timestamp=ts)
                   for i, ts in enumerate(timestamps)],
        rejections=[],
    )


class TestAssignSlices:
    def test_two_yearly_docs(self):
        policy = SlicePolicy(start=_utc(2015, 1, 1), end=_utc(2017, 1, 1))
        sliced = assign_slices(_docs(_utc(2015, 6, 1), _utc(2016, 6, 1)), policy)
        assert sliced.slice_counts() == [("2015", 1), ("2016", 1)]
        assert sliced.out_of_range == 0

    def test_out_of_range_counted(self):
        policy = SlicePolicy(start=_utc(2015, 1, 1), end=_utc(2017, 1, 1))
        sliced = assign_slices(_docs(_utc(2014, 12, 31), _utc(2015, 2, 1)), policy)
        assert sliced.out_of_range == 1
        assert sliced.n_documents == 1

    def test_empty_slices_kept_with_warnings(self, caplog):
        policy = SlicePolicy(start=_utc(2015, 1, 1), end=_utc(2020, 1, 1))
        docs = _docs(*(_utc(2017, 3, 1 + i) for i in range(4)))
        with caplog.at_level("WARNING"):
            sliced = assign_slices(docs, policy)
        assert len(sliced.slices) == 5
        assert [n for _, n in sliced.slice_counts()] == [0, 0, 4, 0, 0]
        assert sum("zero documents" in r.message for r in caplog.records) == 4

    def test_no_docs_in_range_fatal(self):
        policy = SlicePolicy(start=_utc(2015, 1, 1), end=_utc(2017, 1, 1))
        with pytest.raises(DataError, match="no documents"):
            assign_slices(_docs(_utc(2010, 1, 1)), policy)

    def test_boundary_timestamp_goes_to_later_slice(self):
        policy = SlicePolicy(start=_utc(2015, 1, 1), end=_utc(2017, 1, 1))
        sliced = assign_slices(_docs(_utc(2016, 1, 1)), policy)
        assert sliced.slice_counts() == [("2015", 0), ("2016", 1)]

    @settings(max_examples=50, deadline=None)
    @given(
        offsets=st.lists(st.integers(min_value=-400, max_value=1500), min_size=1, max_size=60),
        granularity=st.sampled_from(["year", "quarter", "month"]),
    )
    def test_partition_property(self, offsets, granularity):
        # every input record lands in exactly one of: a slice, out-of-range, rejected
        policy = SlicePolicy(start=_utc(2015, 1, 1), end=_utc(2017, 1, 1),
                             granularity=granularity)
        base = _utc(2015, 1, 1)
        timestamps = [datetime.fromtimestamp(base.timestamp() + off * 86400, tz=timezone.utc)
                      for off in offsets]
        docs = _docs(*timestamps)
        try:
            sliced = assign_slices(docs, policy)
        except DataError:
            assert all(ts < policy.start or ts >= policy.end for ts in timestamps)
            return
        assert sliced.n_documents + sliced.out_of_range + sliced.rejected == len(offsets)
        again = assign_slices(docs, policy)
        assert again.slice_counts() == sliced.slice_counts()


def test_parse_timestamp_rejects_garbage():
    for bad in ("", "not-a-date", None, True):
        with pytest.raises(ValueError):
            parse_timestamp(bad)
