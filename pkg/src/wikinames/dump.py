"""Streaming reader for Wikidata JSON entity dumps.

The dump is a JSON array written one entity per line::

    [
    {"type":"item","id":"Q1",...},
    {"type":"item","id":"Q2",...}
    ]

Lines are read one at a time from a (possibly bzip2/gzip compressed) file and
each entity is reduced to a :class:`CompactEntity` holding only labels,
aliases, instance-of (P31) and subclass-of (P279) targets.
"""

from __future__ import annotations

import bz2
import gzip
import io
import json
import logging
import re
import time
from concurrent.futures import ProcessPoolExecutor
from collections import Counter, deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, TYPE_CHECKING, Any, Iterable, Iterator

from .errors import MalformedLineError, MissingIdError, StoreIOError, UnrecognizedCompressionError

if TYPE_CHECKING:
    from .store import EntityStore

logger = logging.getLogger(__name__)

INSTANCE_OF = "P31"
SUBCLASS_OF = "P279"

COMPRESSIONS = ("auto", "none", "bz2", "gzip")

_MAGIC = {b"BZh": "bz2", b"\x1f\x8b": "gzip"}
_QID_RE = re.compile(r"Q[1-9][0-9]*\Z")


def is_qid(value: str) -> bool:
    return bool(_QID_RE.match(value))


def qid_number(qid: str) -> int:
    return int(qid[1:])


@dataclass
class CompactEntity:
    """Reduced Wikidata record.

    ``english_label`` and ``languages`` are derived from ``labels`` so the
    two can never disagree with it.
    """

    qid: str
    labels: dict[str, str] = field(default_factory=dict)
    aliases: dict[str, list[str]] = field(default_factory=dict)
    instance_of: list[str] = field(default_factory=list)
    subclass_of: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.instance_of = _unique(self.instance_of)
        self.subclass_of = _unique(self.subclass_of)

    @property
    def english_label(self) -> str | None:
        return self.labels.get("en")

    @property
    def languages(self) -> list[str]:
        return sorted(self.labels)

    def to_dict(self) -> dict[str, Any]:
        # Field order is part of the export format; keep it stable.
        return {
            "qid": self.qid,
            "english_label": self.english_label,
            "labels": {lang: self.labels[lang] for lang in sorted(self.labels)},
            "aliases": {lang: list(self.aliases[lang]) for lang in sorted(self.aliases)},
            "instance_of": list(self.instance_of),
            "subclass_of": list(self.subclass_of),
            "languages": self.languages,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> CompactEntity:
        return cls(
            qid=data["qid"],
            labels=dict(data.get("labels", {})),
            aliases={k: list(v) for k, v in data.get("aliases", {}).items()},
            instance_of=list(data.get("instance_of", [])),
            subclass_of=list(data.get("subclass_of", [])),
        )

    @classmethod
    def from_json(cls, text: str) -> CompactEntity:
        return cls.from_dict(json.loads(text))


def _unique(values: Iterable[str]) -> list[str]:
    return list(dict.fromkeys(values))


class RawDumpStream:
    """Iterator over the logical lines of a dump file.

    Lines are yielded without their line terminator. Reading is delegated to
    buffered (de)compressing file objects, so memory use depends only on the
    longest line.
    """

    def __init__(self, path: Path, fileobj: IO[str], compression: str):
        self.path = path
        self.compression = compression
        self._fh = fileobj
        self.lines_read = 0

    def __iter__(self) -> Iterator[str]:
        for line in self._fh:
            self.lines_read += 1
            yield line.rstrip("\r\n")

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> RawDumpStream:
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


def detect_compression(path: Path) -> str:
    with open(path, "rb") as fh:
        head = fh.read(64)
    for magic, name in _MAGIC.items():
        if head.startswith(magic):
            return name
    stripped = head.lstrip(b"\xef\xbb\xbf \t\r\n")
    if not stripped or stripped[:1] in (b"[", b"{"):
        return "none"
    raise UnrecognizedCompressionError(f"{path}: unrecognized header {head[:8]!r}")


def open_dump(path: str | Path, compression: str = "auto") -> RawDumpStream:
    path = Path(path)
    if compression not in COMPRESSIONS:
        raise ValueError(f"unknown compression {compression!r}; expected one of {COMPRESSIONS}")
    if not path.is_file():
        raise FileNotFoundError(f"dump not found: {path}")
    if compression == "auto":
        compression = detect_compression(path)
    if compression == "bz2":
        fh: IO[str] = bz2.open(path, "rt", encoding="utf-8")
    elif compression == "gzip":
        fh = gzip.open(path, "rt", encoding="utf-8")
    else:
        fh = io.open(path, "r", encoding="utf-8")
    return RawDumpStream(path, fh, compression)


def parse_entity_line(line: str, lineno: int | None = None) -> dict[str, Any] | None:
    """Parse one dump line.

    Returns ``None`` for the array delimiters and raises
    :class:`MalformedLineError` for anything that is not a JSON object.
    """
    text = line.strip()
    if text in ("[", "]"):
        return None
    if text.endswith(","):
        text = text[:-1]
    try:
        record = json.loads(text)
    except ValueError as exc:
        raise MalformedLineError(lineno, f"invalid JSON ({exc.msg})") from None
    if not isinstance(record, dict):
        raise MalformedLineError(lineno, "not a JSON object")
    return record


def _claim_targets(claims: dict[str, Any], prop: str) -> list[str]:
    targets = []
    for statement in claims.get(prop) or ():
        snak = statement.get("mainsnak") or {}
        value = (snak.get("datavalue") or {}).get("value")
        # somevalue/novalue snaks carry no datavalue
        if isinstance(value, dict):
            if "id" in value:
                targets.append(value["id"])
            elif "numeric-id" in value:
                targets.append(f"Q{value['numeric-id']}")
    return targets


def reduce_entity(raw: dict[str, Any]) -> CompactEntity:
    qid = raw.get("id")
    if not qid:
        raise MissingIdError("record has no id")
    labels = {
        lang: entry["value"]
        for lang, entry in (raw.get("labels") or {}).items()
        if isinstance(entry, dict) and "value" in entry
    }
    aliases = {}
    for lang, entries in (raw.get("aliases") or {}).items():
        values = [e["value"] for e in entries if isinstance(e, dict) and "value" in e]
        if values:
            aliases[lang] = values
    claims = raw.get("claims") or {}
    if not isinstance(claims, dict):
        # Some dumps serialise an empty claims map as []
        claims = {}
    return CompactEntity(
        qid=qid,
        labels=labels,
        aliases=aliases,
        instance_of=_claim_targets(claims, INSTANCE_OF),
        subclass_of=_claim_targets(claims, SUBCLASS_OF),
    )


@dataclass
class IngestSummary:
    entities: int = 0
    skipped: int = 0
    delimiters: int = 0
    skip_reasons: Counter = field(default_factory=Counter)
    duration: float = 0.0

    @property
    def total_lines(self) -> int:
        return self.entities + self.skipped + self.delimiters

    def merge(self, other: IngestSummary) -> IngestSummary:
        return IngestSummary(
            entities=self.entities + other.entities,
            skipped=self.skipped + other.skipped,
            delimiters=self.delimiters + other.delimiters,
            skip_reasons=self.skip_reasons + other.skip_reasons,
            duration=self.duration + other.duration,
        )

    def to_dict(self, include_timing: bool = True) -> dict[str, Any]:
        out: dict[str, Any] = {
            "entities": self.entities,
            "skipped": self.skipped,
            "delimiters": self.delimiters,
            "skip_reasons": dict(sorted(self.skip_reasons.items())),
        }
        if include_timing:
            out["duration_seconds"] = round(self.duration, 3)
        return out


# Outcome tags produced by _reduce_line
_ENTITY, _DELIMITER, _SKIP = "entity", "delimiter", "skip"


def _reduce_line(lineno: int, line: str) -> tuple[str, Any]:
    try:
        raw = parse_entity_line(line, lineno)
    except MalformedLineError as exc:
        return _SKIP, ("malformed_json", str(exc))
    if raw is None:
        return _DELIMITER, None
    try:
        entity = reduce_entity(raw)
    except MissingIdError:
        return _SKIP, ("missing_id", f"line {lineno}: record has no id")
    if not is_qid(entity.qid):
        # properties (P...) and lexemes (L...) are not name-list candidates
        return _SKIP, ("non_item", None)
    return _ENTITY, entity


def _reduce_chunk(chunk: list[tuple[int, str]]) -> list[tuple[str, Any]]:
    return [_reduce_line(lineno, line) for lineno, line in chunk]


def _chunks(lines: Iterable[str], size: int) -> Iterator[list[tuple[int, str]]]:
    chunk = []
    for lineno, line in enumerate(lines, start=1):
        chunk.append((lineno, line))
        if len(chunk) >= size:
            yield chunk
            chunk = []
    if chunk:
        yield chunk


def _reduced(lines: Iterable[str], threads: int, chunk_size: int) -> Iterator[tuple[str, Any]]:
    if threads <= 1:
        for lineno, line in enumerate(lines, start=1):
            yield _reduce_line(lineno, line)
        return
    # Bounded window of in-flight chunks; results are consumed in submission
    # order so output does not depend on worker scheduling.
    with ProcessPoolExecutor(max_workers=threads) as pool:
        pending: deque = deque()
        for chunk in _chunks(lines, chunk_size):
            pending.append(pool.submit(_reduce_chunk, chunk))
            if len(pending) >= 2 * threads:
                yield from pending.popleft().result()
        while pending:
            yield from pending.popleft().result()


def ingest(
    stream: Iterable[str],
    store: EntityStore,
    threads: int = 1,
    chunk_size: int = 2000,
) -> IngestSummary:
    summary = IngestSummary()
    started = time.monotonic()
    try:
        for kind, payload in _reduced(stream, threads, chunk_size):
            if kind == _ENTITY:
                store.put(payload)
                summary.entities += 1
            elif kind == _DELIMITER:
                summary.delimiters += 1
            else:
                reason, message = payload
                summary.skipped += 1
                summary.skip_reasons[reason] += 1
                if message:
                    logger.warning("skipping %s", message)
        store.flush()
    except StoreIOError as exc:
        summary.duration = time.monotonic() - started
        raise StoreIOError(f"{exc}; progress before failure: {summary.to_dict()}") from exc
    summary.duration = time.monotonic() - started
    return summary
