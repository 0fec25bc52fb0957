from __future__ import annotations

import bz2
import gzip
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dumpgen import raw_entity, write_dump, write_synthetic_dump
from wikinames.dump import (
    CompactEntity,
    IngestSummary,
    ingest,
    open_dump,
    parse_entity_line,
    reduce_entity,
)
from wikinames.errors import MalformedLineError, MissingIdError, UnrecognizedCompressionError
from wikinames.store import EntityStore


def three_entities():
    return [
        raw_entity("Q1", {"en": "universe"}),
        raw_entity("Q2", {"en": "Earth", "sw": "Dunia"}),
        raw_entity("Q3", {"en": "life"}),
    ]


class TestOpenDump:
    def test_plain_fixture_yields_all_lines(self, tmp_path):
        path = write_dump(tmp_path / "fixture.json", three_entities())
        with open_dump(path, "none") as stream:
            lines = list(stream)
        assert len(lines) == 5
        assert lines[0] == "[" and lines[-1] == "]"
        assert lines[1].endswith(",") and not lines[3].endswith(",")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            open_dump(tmp_path / "missing.json", "auto")

    @pytest.mark.parametrize("opener,suffix", [(bz2.open, "bz2"), (gzip.open, "gz")])
    def test_autodetects_compression(self, tmp_path, opener, suffix):
        plain = write_dump(tmp_path / "plain.json", three_entities())
        packed = tmp_path / f"dump.json.{suffix}"
        with opener(packed, "wb") as fh:
            fh.write(plain.read_bytes())
        with open_dump(packed) as stream:
            assert stream.compression in ("bz2", "gzip")
            assert list(stream) == plain.read_text("utf-8").splitlines()

    def test_unrecognized_header(self, tmp_path):
        path = tmp_path / "garbage.bin"
        path.write_bytes(b"\x00\x01\x02garbage")
        with pytest.raises(UnrecognizedCompressionError):
            open_dump(path, "auto")

    def test_explicit_none_skips_detection(self, tmp_path):
        path = tmp_path / "garbage.bin"
        path.write_bytes(b"not json\n")
        with open_dump(path, "none") as stream:
            assert list(stream) == ["not json"]


class TestParseEntityLine:
    @pytest.mark.parametrize("line", ["[", "]", "  [  "])
    def test_delimiters(self, line):
        assert parse_entity_line(line) is None

    def test_trailing_comma(self):
        assert parse_entity_line('{"id":"Q33","labels":{}},')["id"] == "Q33"

    def test_only_one_trailing_comma_stripped(self):
        with pytest.raises(MalformedLineError):
            parse_entity_line('{"id":"Q33"},,')

    def test_truncated(self):
        with pytest.raises(MalformedLineError) as info:
            parse_entity_line('{"id":', lineno=7)
        assert info.value.lineno == 7

    def test_non_object(self):
        with pytest.raises(MalformedLineError):
            parse_entity_line("[1, 2]")


class TestReduceEntity:
    def test_african_union_labels(self):
        raw = raw_entity(
            "Q7159",
            {"en": "African Union", "ha": "Taraiyar Afirka", "mg": "Vondrona Afrikana", "sw": "Umoja wa Afrika"},
        )
        entity = reduce_entity(raw)
        assert entity.labels == {
            "en": "African Union",
            "ha": "Taraiyar Afirka",
            "mg": "Vondrona Afrikana",
            "sw": "Umoja wa Afrika",
        }
        assert set(entity.languages) == {"en", "ha", "mg", "sw"}
        assert entity.english_label == "African Union"

    def test_no_labels(self):
        entity = reduce_entity(raw_entity("Q9", p31=["Q5"]))
        assert entity.labels == {} and entity.languages == []
        assert entity.english_label is None
        assert entity.instance_of == ["Q5"]

    def test_finland_instance_of(self):
        entity = reduce_entity(raw_entity("Q33", {"en": "Finland"}, p31=["Q6256"]))
        assert entity.qid == "Q33"
        assert entity.instance_of == ["Q6256"]

    def test_keeps_only_p31_p279(self):
        raw = raw_entity("Q6256", {"en": "country"}, p31=["Q1"], p279=["Q82794", "Q82794"], extra_claims=50)
        entity = reduce_entity(raw)
        assert entity.subclass_of == ["Q82794"]
        assert entity.instance_of == ["Q1"]
        assert set(entity.to_dict()) == {
            "qid", "english_label", "labels", "aliases", "instance_of", "subclass_of", "languages",
        }
        assert entity == reduce_entity(raw_entity("Q6256", {"en": "country"}, p31=["Q1"], p279=["Q82794"]))

    def test_aliases(self):
        entity = reduce_entity(raw_entity("Q1", {"en": "x"}, aliases={"sw": ["a", "b"]}))
        assert entity.aliases == {"sw": ["a", "b"]}

    def test_novalue_snak_ignored(self):
        raw = raw_entity("Q1")
        raw["claims"]["P31"] = [{"mainsnak": {"snaktype": "novalue", "property": "P31"}}]
        assert reduce_entity(raw).instance_of == []

    def test_missing_id(self):
        with pytest.raises(MissingIdError):
            reduce_entity({"labels": {}})

    def test_empty_claims_list(self):
        raw = raw_entity("Q1")
        raw["claims"] = []
        assert reduce_entity(raw).instance_of == []


qids = st.integers(min_value=1, max_value=10**9).map(lambda n: f"Q{n}")
langs = st.text(alphabet="abcdefghijklmnopqrstuvwxyz-", min_size=1, max_size=8)


@st.composite
def compact_entities(draw):
    return CompactEntity(
        qid=draw(qids),
        labels=draw(st.dictionaries(langs, st.text(max_size=20), max_size=6)),
        aliases=draw(st.dictionaries(langs, st.lists(st.text(max_size=10), min_size=1, max_size=3), max_size=3)),
        instance_of=draw(st.lists(qids, max_size=4)),
        subclass_of=draw(st.lists(qids, max_size=4)),
    )


@given(compact_entities())
def test_compact_entity_round_trip(entity):
    assert CompactEntity.from_json(entity.to_json()) == entity
    assert CompactEntity.from_json(entity.to_json()).to_json() == entity.to_json()


@given(compact_entities())
def test_compact_entity_invariants(entity):
    assert set(entity.languages) == set(entity.labels)
    assert (entity.english_label is not None) == ("en" in entity.languages)
    assert len(set(entity.instance_of)) == len(entity.instance_of)
    assert len(set(entity.subclass_of)) == len(entity.subclass_of)


class TestIngest:
    def test_three_entities(self, tmp_path):
        path = write_dump(tmp_path / "d.json", three_entities())
        with open_dump(path) as stream, EntityStore(tmp_path / "s") as store:
            summary = ingest(stream, store)
            assert len(store) == 3
        assert (summary.entities, summary.skipped) == (3, 0)

    def test_malformed_line_counted(self, tmp_path):
        records = three_entities()
        records.insert(1, '{"id":')
        path = write_dump(tmp_path / "d.json", records)
        with open_dump(path) as stream, EntityStore(tmp_path / "s") as store:
            summary = ingest(stream, store)
        assert (summary.entities, summary.skipped) == (3, 1)
        assert summary.skip_reasons == {"malformed_json": 1}
        assert summary.total_lines == 6

    def test_missing_id_and_properties_skipped(self, tmp_path):
        records = three_entities() + [{"type": "item", "labels": {}}, {"type": "property", "id": "P31"}]
        path = write_dump(tmp_path / "d.json", records)
        with open_dump(path) as stream, EntityStore(tmp_path / "s") as store:
            summary = ingest(stream, store)
        assert summary.entities == 3
        assert summary.skip_reasons == {"missing_id": 1, "non_item": 1}

    @pytest.mark.parametrize("threads", [1, 3])
    def test_conservation(self, tmp_path, threads):
        path = write_synthetic_dump(tmp_path / "d.json", 300, seed=4)
        lines = path.read_text("utf-8").splitlines()
        lines[10] = lines[10][:20]
        lines[50] = "garbage"
        path.write_text("\n".join(lines) + "\n", "utf-8")
        with open_dump(path) as stream, EntityStore(tmp_path / f"s{threads}") as store:
            summary = ingest(stream, store, threads=threads, chunk_size=37)
        assert summary.entities + summary.skipped + 2 == len(lines)
        assert summary.skipped == 2

    def test_parallel_matches_sequential(self, tmp_path):
        path = write_synthetic_dump(tmp_path / "d.json", 400, seed=2)
        exports = []
        for threads in (1, 4):
            with open_dump(path) as stream, EntityStore(tmp_path / f"s{threads}") as store:
                ingest(stream, store, threads=threads, chunk_size=25)
                out = tmp_path / f"e{threads}.jsonl"
                with open(out, "w", encoding="utf-8") as fh:
                    store.export_jsonl(fh)
                exports.append(out.read_bytes())
        assert exports[0] == exports[1]

    def test_reingest_into_fresh_store_is_identical(self, tmp_path):
        path = write_synthetic_dump(tmp_path / "d.json", 200, seed=9)
        exports = []
        for name in ("a", "b"):
            with open_dump(path) as stream, EntityStore(tmp_path / name) as store:
                ingest(stream, store)
                out = tmp_path / f"{name}.jsonl"
                with open(out, "w", encoding="utf-8") as fh:
                    store.export_jsonl(fh)
                exports.append(out.read_bytes())
        assert exports[0] == exports[1]


def test_summary_merge_is_associative():
    a = IngestSummary(1, 2, 0)
    a.skip_reasons["x"] = 2
    b = IngestSummary(3, 0, 1)
    c = IngestSummary(5, 1, 1)
    c.skip_reasons["y"] = 1
    left = a.merge(b).merge(c).to_dict(include_timing=False)
    right = a.merge(b.merge(c)).to_dict(include_timing=False)
    assert left == right == {"entities": 9, "skipped": 3, "delimiters": 2, "skip_reasons": {"x": 2, "y": 1}}


def test_summary_is_json_serialisable():
    json.dumps(IngestSummary(1, 0, 2).to_dict())
