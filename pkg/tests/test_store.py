from __future__ import annotations

import io
import tempfile
from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from dumpgen import raw_entity
from wikinames.dump import CompactEntity, reduce_entity
from wikinames.store import DB_NAME, EntityStore


def entity(qid, labels=(), instance_of=()):
    return CompactEntity(qid, {lang: f"{qid}-{lang}" for lang in labels}, {}, list(instance_of), [])


def qids(entities):
    return [e.qid for e in entities]


def test_put_get_round_trip(tmp_path):
    e = CompactEntity("Q42", {"en": "Douglas Adams", "sw": "Douglas Adams"}, {"en": ["DNA"]}, ["Q5"], [])
    with EntityStore(tmp_path) as store:
        store.put(e)
        assert store.get("Q42") == e
        assert store.get("Q43") is None


def test_language_index(tmp_path):
    with EntityStore(tmp_path) as store:
        store.put(entity("Q1", ["ha"]))
        assert qids(store.query_by_language("ha")) == ["Q1"]


def test_replace_repairs_indexes(tmp_path):
    with EntityStore(tmp_path) as store:
        store.put(entity("Q1", ["ha"], ["Q5"]))
        store.flush()
        store.put(entity("Q1", ["sw"], ["Q6256"]))
        assert qids(store.query_by_language("ha")) == []
        assert qids(store.query_by_language("sw")) == ["Q1"]
        assert qids(store.query_by_instance_of({"Q5"})) == []
        assert len(store) == 1


def test_replace_within_one_batch(tmp_path):
    with EntityStore(tmp_path) as store:
        store.put(entity("Q1", ["ha"]))
        store.put(entity("Q1", ["sw"]))
        assert qids(store.query_by_language("ha")) == []
        assert qids(store.query_by_language("sw")) == ["Q1"]


def test_query_by_language_fixture(tmp_path):
    with EntityStore(tmp_path) as store:
        store.put_many([entity("Q3", ["sw"]), entity("Q1", ["en"]), entity("Q2", ["sw", "en"])])
        assert qids(store.query_by_language("sw")) == ["Q2", "Q3"]
        assert list(store.query_by_language("xx")) == []


def test_query_by_instance_of(finland_store):
    assert qids(finland_store.query_by_instance_of({"Q6256"})) == ["Q33"]
    assert list(finland_store.query_by_instance_of(set())) == []


def test_instance_of_dedup(tmp_path):
    with EntityStore(tmp_path) as store:
        store.put(entity("Q7", [], ["QA1", "QB1"]))
        store.put(entity("Q8", [], ["QB1"]))
        assert qids(store.query_by_instance_of({"QA1", "QB1"})) == ["Q7", "Q8"]


def test_iteration_order_is_numeric(tmp_path):
    with EntityStore(tmp_path) as store:
        store.put_many([entity(q, ["en"]) for q in ("Q100", "Q9", "Q20")])
        assert qids(store.iter_entities()) == ["Q9", "Q20", "Q100"]
        assert qids(store.query_by_language("en")) == ["Q9", "Q20", "Q100"]


def test_batched_writes(tmp_path):
    with EntityStore(tmp_path, batch_size=7) as store:
        store.put_many(entity(f"Q{i}", ["en"]) for i in range(1, 51))
        assert len(store) == 50


def test_reopen(tmp_path):
    with EntityStore(tmp_path) as store:
        store.put_many([entity("Q1", ["sw"], ["Q5"]), entity("Q2", ["en"], ["Q5"])])
        before = (qids(store.query_by_language("sw")), qids(store.query_by_instance_of({"Q5"})))
    with EntityStore(tmp_path, readonly=True) as store:
        after = (qids(store.query_by_language("sw")), qids(store.query_by_instance_of({"Q5"})))
    assert before == after == (["Q1"], ["Q1", "Q2"])


def test_readonly_missing(tmp_path):
    with pytest.raises(FileNotFoundError):
        EntityStore(tmp_path / "nope", readonly=True)


def test_rejects_non_item(tmp_path):
    with EntityStore(tmp_path) as store, pytest.raises(ValueError):
        store.put(entity("P31"))


def test_export_jsonl(tmp_path):
    with EntityStore(tmp_path) as store:
        store.put_many([entity("Q2", ["en"]), entity("Q1", ["sw"])])
        buf = io.StringIO()
        assert store.export_jsonl(buf) == 2
    lines = buf.getvalue().splitlines()
    assert [CompactEntity.from_json(line).qid for line in lines] == ["Q1", "Q2"]
    assert lines[0].startswith('{"qid":"Q1","english_label":null,"labels":')


def test_discarded_claims_take_no_space(tmp_path):
    lean = reduce_entity(raw_entity("Q1", {"en": "x"}, p31=["Q5"]))
    bulky = reduce_entity(raw_entity("Q1", {"en": "x"}, p31=["Q5"], extra_claims=50))
    assert lean.to_json() == bulky.to_json()


def test_closure_collection(tmp_path):
    with EntityStore(tmp_path) as store:
        assert store.read_closure() is None
        store.write_closure({"Q5": {"Q5", "Q15632617"}, "Q43229": ["Q43229"]})
        assert store.read_closure() == {"Q5": frozenset({"Q5", "Q15632617"}), "Q43229": frozenset({"Q43229"})}
        store.write_closure({"Q5": {"Q5"}})
        assert store.read_closure() == {"Q5": frozenset({"Q5"})}


LANGS = ["en", "sw", "ha", "yo", "am"]
CLASSES = [f"Q{n}" for n in range(1, 12)]


@st.composite
def small_stores(draw):
    nums = draw(st.lists(st.integers(100, 5000), unique=True, max_size=500))
    return [
        entity(
            f"Q{n}",
            draw(st.lists(st.sampled_from(LANGS), unique=True, max_size=3)),
            draw(st.lists(st.sampled_from(CLASSES), unique=True, max_size=3)),
        )
        for n in nums
    ]


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
@given(small_stores(), st.sampled_from(LANGS + ["xx"]), st.sets(st.sampled_from(CLASSES + ["Q99"]), max_size=4))
def test_index_scan_equivalence(entities, lang, classes):
    with tempfile.TemporaryDirectory() as tmp:
        with EntityStore(Path(tmp)) as store:
            store.put_many(entities)
            scan = sorted(entities, key=lambda e: int(e.qid[1:]))
            assert qids(store.query_by_language(lang)) == [e.qid for e in scan if lang in e.labels]
            assert qids(store.query_by_instance_of(classes)) == [
                e.qid for e in scan if set(e.instance_of) & classes
            ]
            # every secondary index entry resolves in the primary index
            db = store._db
            orphans = db.execute(
                "SELECT COUNT(*) FROM label_index WHERE num NOT IN (SELECT num FROM entities)"
            ).fetchone()[0] + db.execute(
                "SELECT COUNT(*) FROM instance_index WHERE num NOT IN (SELECT num FROM entities)"
            ).fetchone()[0]
            assert orphans == 0
        assert (Path(tmp) / DB_NAME).is_file()
