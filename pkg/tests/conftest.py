from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dumpgen import raw_entity, write_dump  # noqa: E402
from wikinames.closure import RootConfig, build_subclass_graph, compute_closure  # noqa: E402
from wikinames.dump import reduce_entity  # noqa: E402
from wikinames.store import EntityStore  # noqa: E402


def finland_records() -> list[dict]:
    return [
        raw_entity("Q33", {"en": "Finland", "sw": "Ufini", "fi": "Suomi"}, p31=["Q6256"]),
        raw_entity("Q6256", {"en": "country"}, p279=["Q82794"]),
        raw_entity("Q82794", {"en": "geographic region"}),
    ]


@pytest.fixture
def finland_store(tmp_path):
    with EntityStore(tmp_path / "store") as store:
        store.put_many(reduce_entity(r) for r in finland_records())
        store.flush()
        yield store


@pytest.fixture
def finland_closure(finland_store):
    return compute_closure(build_subclass_graph(finland_store), RootConfig())


@pytest.fixture
def finland_dump(tmp_path):
    return write_dump(tmp_path / "finland.json", finland_records())


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[number])
