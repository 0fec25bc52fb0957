"""How many entity mentions in an annotated NER corpus appear in a name list."""

from __future__ import annotations

import logging
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .errors import ConfigError
from .extract import NameRecord
from .stats import percentage

logger = logging.getLogger(__name__)

MENTION_TYPES = ("PER", "LOC", "ORG", "MISC")
COUNTED_TYPES = ("PER", "LOC", "ORG")
DEFAULT_MAX_PREFIX = 3

_TYPE_ALIASES = {"PERS": "PER", "PERSON": "PER", "ORGANIZATION": "ORG", "LOCATION": "LOC"}


@dataclass(frozen=True)
class Mention:
    text: str
    entity_type: str

    @property
    def is_misc(self) -> bool:
        return self.entity_type == "MISC"


@dataclass
class ConllDocument:
    """Mentions of a CoNLL file plus the counters needed to account for every line.

    ``token_lines == o_tokens + mention_tokens + bad_tags`` and
    ``len(mentions) == begin_tags + repairs``.
    """

    mentions: list[Mention] = field(default_factory=list)
    lines: int = 0
    token_lines: int = 0
    blank_lines: int = 0
    docstart_lines: int = 0
    o_tokens: int = 0
    mention_tokens: int = 0
    begin_tags: int = 0
    repairs: int = 0
    bad_tags: int = 0
    unknown_types: Counter = field(default_factory=Counter)


def _normalize_type(raw: str, doc: ConllDocument) -> str:
    name = _TYPE_ALIASES.get(raw.upper(), raw.upper())
    if name not in MENTION_TYPES:
        doc.unknown_types[raw] += 1
        return "MISC"
    return name


def read_conll(path: str | Path) -> ConllDocument:
    doc = ConllDocument()
    tokens: list[str] = []
    span_type: str | None = None

    def close_span() -> None:
        nonlocal tokens, span_type
        if tokens:
            doc.mentions.append(Mention(" ".join(tokens), span_type))
        tokens, span_type = [], None

    with open(path, encoding="utf-8") as fh:
        for line in fh:
            doc.lines += 1
            parts = line.split()
            if not parts:
                doc.blank_lines += 1
                close_span()
                continue
            if parts[0] == "-DOCSTART-":
                doc.docstart_lines += 1
                close_span()
                continue
            doc.token_lines += 1
            token, tag = parts[0], parts[-1]
            if tag == "O":
                close_span()
                doc.o_tokens += 1
                continue
            prefix, _, raw_type = tag.partition("-")
            if prefix not in ("B", "I") or not raw_type:
                close_span()
                doc.bad_tags += 1
                logger.warning("%s:%d: unrecognised tag %r", path, doc.lines, tag)
                continue
            entity_type = _normalize_type(raw_type, doc)
            if prefix == "B":
                close_span()
                doc.begin_tags += 1
                span_type = entity_type
            elif span_type != entity_type:
                # I- without a preceding B- of the same type starts a new span
                close_span()
                doc.repairs += 1
                span_type = entity_type
            tokens.append(token)
            doc.mention_tokens += 1
    close_span()
    return doc


def normalize_name(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def build_name_index(names: Iterable[str]) -> frozenset[str]:
    return frozenset(normalize_name(n) for n in names)


def match_mention(mention: str, names: frozenset[str], max_prefix: int = DEFAULT_MAX_PREFIX) -> bool:
    """Exact lookup, then lookup after stripping 1..max_prefix leading characters.

    ``names`` must come from :func:`build_name_index`.
    """
    text = normalize_name(mention)
    if text in names:
        return True
    for k in range(1, min(max_prefix, len(text) - 1) + 1):
        if text[k:] in names:
            return True
    return False


@dataclass
class TypeCoverage:
    mentions_total: int = 0
    mentions_matched: int = 0
    matched_exact: int = 0

    @property
    def match_percentage(self) -> float | None:
        pct = percentage(self.mentions_matched, self.mentions_total, 1)
        return None if pct is None else float(pct)

    @property
    def exact_percentage(self) -> float | None:
        pct = percentage(self.matched_exact, self.mentions_total, 1)
        return None if pct is None else float(pct)

    def to_dict(self) -> dict[str, Any]:
        return {
            "mentions_total": self.mentions_total,
            "mentions_matched": self.mentions_matched,
            "matched_exact": self.matched_exact,
            "match_percentage": self.match_percentage,
            "exact_percentage": self.exact_percentage,
        }


@dataclass
class CoverageReport:
    language: str
    max_prefix: int
    unique: bool
    by_type: dict[str, TypeCoverage]
    overall: TypeCoverage
    misc_excluded: int = 0

    @property
    def mode(self) -> str:
        return "exact" if self.max_prefix == 0 else "prefix"

    @property
    def match_percentage(self) -> float | None:
        return self.overall.match_percentage

    def to_dict(self) -> dict[str, Any]:
        return {
            "language": self.language,
            "mode": self.mode,
            "max_prefix": self.max_prefix,
            "unique": self.unique,
            "misc_excluded": self.misc_excluded,
            "overall": self.overall.to_dict(),
            "by_type": {t: self.by_type[t].to_dict() for t in COUNTED_TYPES},
        }


def evaluate_coverage(
    conll_path: str | Path,
    name_records: Iterable[NameRecord] | None,
    max_prefix: int = DEFAULT_MAX_PREFIX,
    unique: bool = False,
    language: str = "",
) -> CoverageReport:
    """Match every non-MISC mention against all names of the language, regardless of type."""
    if name_records is None:
        raise ConfigError(f"no extracted name list for language {language!r}")
    if max_prefix < 0:
        raise ConfigError("max_prefix must be >= 0")
    names = build_name_index(r.name for r in name_records)
    doc = read_conll(conll_path)

    mentions = [m for m in doc.mentions if not m.is_misc]
    misc = len(doc.mentions) - len(mentions)
    if unique:
        mentions = list(dict.fromkeys(mentions))

    by_type = {t: TypeCoverage() for t in COUNTED_TYPES}
    overall = TypeCoverage()
    for mention in mentions:
        exact = match_mention(mention.text, names, 0)
        matched = exact or match_mention(mention.text, names, max_prefix)
        for bucket in (by_type[mention.entity_type], overall):
            bucket.mentions_total += 1
            bucket.mentions_matched += matched
            bucket.matched_exact += exact
    return CoverageReport(language, max_prefix, unique, by_type, overall, misc)
