"""Embedded entity store backed by SQLite.

Layout inside the store directory is a single ``entities.sqlite`` file with

* ``entities``      qid number -> CompactEntity JSON (primary index)
* ``label_index``   language code -> qid number
* ``instance_index`` P31 class -> qid number
* ``subclass_edges`` qid number -> P279 parent
* ``closure``       root qid -> member qid (rebuilt by the closure stage)

Rows are keyed by the numeric part of the qid so every query iterates in
ascending qid order.
"""

from __future__ import annotations

import logging
import sqlite3
import uuid
from pathlib import Path
from typing import IO, Iterable, Iterator

from .dump import CompactEntity, is_qid, qid_number
from .errors import StoreIOError

logger = logging.getLogger(__name__)

DB_NAME = "entities.sqlite"
DEFAULT_BATCH_SIZE = 10_000

_SCHEMA = """
CREATE TABLE IF NOT EXISTS entities (
    num INTEGER PRIMARY KEY,
    doc TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS label_index (
    lang TEXT NOT NULL,
    num INTEGER NOT NULL,
    PRIMARY KEY (lang, num)
) WITHOUT ROWID;
CREATE TABLE IF NOT EXISTS instance_index (
    cls TEXT NOT NULL,
    num INTEGER NOT NULL,
    PRIMARY KEY (cls, num)
) WITHOUT ROWID;
CREATE INDEX IF NOT EXISTS instance_by_num ON instance_index (num);
CREATE INDEX IF NOT EXISTS label_by_num ON label_index (num);
CREATE TABLE IF NOT EXISTS subclass_edges (
    num INTEGER NOT NULL,
    parent TEXT NOT NULL,
    PRIMARY KEY (num, parent)
) WITHOUT ROWID;
CREATE TABLE IF NOT EXISTS closure (
    root TEXT NOT NULL,
    qid TEXT NOT NULL,
    PRIMARY KEY (root, qid)
) WITHOUT ROWID;
CREATE TABLE IF NOT EXISTS closure_roots (
    root TEXT PRIMARY KEY
);
"""


class EntityStore:
    """Single-writer, multi-reader store of :class:`CompactEntity` records.

    Writes are buffered and committed in batches of ``batch_size``; call
    :meth:`flush` (or close the store) to make them visible.
    """

    def __init__(self, root: str | Path, readonly: bool = False, batch_size: int = DEFAULT_BATCH_SIZE):
        self.root = Path(root)
        self.readonly = readonly
        self.batch_size = batch_size
        self._pending: dict[int, CompactEntity] = {}
        path = self.root / DB_NAME
        try:
            if readonly:
                if not path.is_file():
                    raise FileNotFoundError(f"no entity store at {self.root}")
                self._db = sqlite3.connect(f"file:{path}?mode=ro", uri=True)
            else:
                self.root.mkdir(parents=True, exist_ok=True)
                self._db = sqlite3.connect(path)
                self._db.executescript(_SCHEMA)
                self._db.commit()
        except sqlite3.Error as exc:
            raise StoreIOError(f"cannot open store {self.root}: {exc}") from exc

    @classmethod
    def exists(cls, root: str | Path) -> bool:
        return (Path(root) / DB_NAME).is_file()

    def __enter__(self) -> EntityStore:
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()

    def close(self) -> None:
        if self._db is None:
            return
        if not self.readonly:
            self.flush()
        self._db.close()
        self._db = None

    # -- writes ---------------------------------------------------------

    def put(self, entity: CompactEntity) -> None:
        if self.readonly:
            raise StoreIOError("store opened read-only")
        if not is_qid(entity.qid):
            raise ValueError(f"not an item id: {entity.qid!r}")
        self._pending[qid_number(entity.qid)] = entity
        if len(self._pending) >= self.batch_size:
            self.flush()

    def put_many(self, entities: Iterable[CompactEntity]) -> None:
        for entity in entities:
            self.put(entity)

    def flush(self) -> None:
        if not self._pending:
            return
        batch = sorted(self._pending.items())
        self._pending = {}
        nums = [(num,) for num, _ in batch]
        try:
            with self._db:
                for table in ("label_index", "instance_index", "subclass_edges"):
                    self._db.executemany(f"DELETE FROM {table} WHERE num = ?", nums)
                self._db.executemany(
                    "INSERT OR REPLACE INTO entities (num, doc) VALUES (?, ?)",
                    [(num, e.to_json()) for num, e in batch],
                )
                self._db.executemany(
                    "INSERT INTO label_index (lang, num) VALUES (?, ?)",
                    [(lang, num) for num, e in batch for lang in e.labels],
                )
                self._db.executemany(
                    "INSERT INTO instance_index (cls, num) VALUES (?, ?)",
                    [(cls, num) for num, e in batch for cls in e.instance_of],
                )
                self._db.executemany(
                    "INSERT INTO subclass_edges (num, parent) VALUES (?, ?)",
                    [(num, parent) for num, e in batch for parent in e.subclass_of],
                )
        except sqlite3.Error as exc:
            raise StoreIOError(f"write to {self.root} failed: {exc}") from exc
        logger.debug("committed %d entities", len(batch))

    # -- reads ----------------------------------------------------------

    def _sync(self) -> None:
        if self._pending:
            self.flush()

    def get(self, qid: str) -> CompactEntity | None:
        self._sync()
        if not is_qid(qid):
            return None
        row = self._db.execute("SELECT doc FROM entities WHERE num = ?", (qid_number(qid),)).fetchone()
        return CompactEntity.from_json(row[0]) if row else None

    def __len__(self) -> int:
        self._sync()
        return self._db.execute("SELECT COUNT(*) FROM entities").fetchone()[0]

    def _docs(self, sql: str, params: tuple = ()) -> Iterator[CompactEntity]:
        self._sync()
        cursor = self._db.execute(sql, params)
        while True:
            rows = cursor.fetchmany(1000)
            if not rows:
                return
            for (doc,) in rows:
                yield CompactEntity.from_json(doc)

    def iter_entities(self) -> Iterator[CompactEntity]:
        return self._docs("SELECT doc FROM entities ORDER BY num")

    def query_by_language(self, lang: str) -> Iterator[CompactEntity]:
        return self._docs(
            "SELECT e.doc FROM label_index l JOIN entities e ON e.num = l.num "
            "WHERE l.lang = ? ORDER BY l.num",
            (lang,),
        )

    def query_by_instance_of(self, classes: Iterable[str]) -> Iterator[CompactEntity]:
        classes = sorted(set(classes))
        if not classes:
            return
        self._sync()
        # Class sets can have tens of thousands of members; stage them in a
        # temp table instead of binding them as parameters.
        table = f"q_{uuid.uuid4().hex}"
        self._db.execute(f"CREATE TEMP TABLE {table} (cls TEXT PRIMARY KEY)")
        try:
            self._db.executemany(f"INSERT INTO {table} (cls) VALUES (?)", [(c,) for c in classes])
            yield from self._docs(
                "SELECT doc FROM entities WHERE num IN ("
                f"SELECT i.num FROM instance_index i JOIN {table} q ON q.cls = i.cls"
                ") ORDER BY num"
            )
        finally:
            self._db.execute(f"DROP TABLE {table}")

    def subclass_edges(self) -> Iterator[tuple[str, str]]:
        self._sync()
        for num, parent in self._db.execute("SELECT num, parent FROM subclass_edges ORDER BY num, parent"):
            yield f"Q{num}", parent

    def export_jsonl(self, out: IO[str]) -> int:
        count = 0
        for entity in self.iter_entities():
            out.write(entity.to_json())
            out.write("\n")
            count += 1
        return count

    # -- closure collection ---------------------------------------------

    def write_closure(self, closure: dict[str, Iterable[str]]) -> None:
        try:
            with self._db:
                self._db.execute("DELETE FROM closure")
                self._db.execute("DELETE FROM closure_roots")
                for root in sorted(closure):
                    self._db.execute("INSERT INTO closure_roots (root) VALUES (?)", (root,))
                    self._db.executemany(
                        "INSERT INTO closure (root, qid) VALUES (?, ?)",
                        [(root, q) for q in sorted(set(closure[root]))],
                    )
        except sqlite3.Error as exc:
            raise StoreIOError(f"writing closure to {self.root} failed: {exc}") from exc

    def read_closure(self) -> dict[str, frozenset[str]] | None:
        roots = [r for (r,) in self._db.execute("SELECT root FROM closure_roots ORDER BY root")]
        if not roots:
            return None
        closure: dict[str, set[str]] = {root: set() for root in roots}
        for root, qid in self._db.execute("SELECT root, qid FROM closure"):
            closure[root].add(qid)
        return {root: frozenset(members) for root, members in closure.items()}
