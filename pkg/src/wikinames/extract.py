"""Turn classified entities into per-language name lists."""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

import regex

from .closure import ClosureTable, EntityType, RootConfig, classify
from .dump import CompactEntity, qid_number
from .errors import ConfigError, DataError, PrerequisiteError
from .languages import LanguageSpec, ScriptPolicy

logger = logging.getLogger(__name__)

TSV_HEADER = ("qid", "type", "name", "english_match")

_NEUTRAL = regex.compile(r"[\p{Script=Common}\p{Script=Inherited}]+")
_LATIN = regex.compile(r"\p{Script=Latin}")
_NON_LATIN = regex.compile(r"\P{Script=Latin}")
_TSV_UNSAFE = regex.compile(r"[\t\r\n]")

PER, LOC, ORG = EntityType.PER, EntityType.LOC, EntityType.ORG

# Multi-type entities: all three are mostly geographically specific groups,
# ORG+PER are companies and bands, ORG+LOC are countries and other GPEs.
_RESOLUTION = {
    frozenset({PER, LOC, ORG}): ORG,
    frozenset({ORG, PER}): ORG,
    frozenset({ORG, LOC}): LOC,
    frozenset({LOC, PER}): PER,
}


def resolve_type(types: Iterable[EntityType], qid: str | None = None) -> EntityType:
    key = frozenset(types)
    if len(key) == 1:
        return next(iter(key))
    try:
        return _RESOLUTION[key]
    except KeyError:
        raise ValueError(f"cannot resolve type set {sorted(key)} for {qid}") from None


def is_latin_only(name: str) -> bool:
    letters = _NEUTRAL.sub("", name)
    return bool(letters) and not _NON_LATIN.search(letters)


def passes_script_policy(name: str, policy: ScriptPolicy) -> bool:
    if policy.required_script is None:
        return True
    if _LATIN.search(name):
        return False
    return regex.search(rf"\p{{Script={policy.required_script}}}", name) is not None


def compute_english_match(entity: CompactEntity, name: str) -> bool:
    english = entity.english_label
    return english is not None and english == name


@dataclass(frozen=True, order=True)
class NameRecord:
    qid: str
    language: str
    entity_type: EntityType
    name: str
    english_match: bool

    def sort_key(self) -> tuple:
        return (self.language, self.entity_type.value, qid_number(self.qid))


def _type_counts() -> dict[str, int]:
    return {t.value: 0 for t in (LOC, ORG, PER)}


@dataclass
class ExtractionSummary:
    """Counters collected during extraction, keyed by language code.

    ``candidates`` and ``latin_only`` count typed labels before script
    filtering; ``records`` counts what was kept.
    """

    languages: list[str] = field(default_factory=list)
    language_specs: list[dict[str, str]] = field(default_factory=list)
    records: dict[str, dict[str, int]] = field(default_factory=dict)
    candidates: dict[str, dict[str, int]] = field(default_factory=dict)
    latin_only: dict[str, dict[str, int]] = field(default_factory=dict)
    excluded_by_script: dict[str, int] = field(default_factory=dict)
    empty_labels_dropped: dict[str, int] = field(default_factory=dict)
    alias_records: dict[str, int] = field(default_factory=dict)
    resolutions: Counter = field(default_factory=Counter)
    loc_per_entities: list[str] = field(default_factory=list)
    tabs_replaced: int = 0

    @property
    def empty_languages(self) -> list[str]:
        return [code for code in self.languages if sum(self.records[code].values()) == 0]

    def init_language(self, code: str) -> None:
        self.languages.append(code)
        self.records[code] = _type_counts()
        self.candidates[code] = _type_counts()
        self.latin_only[code] = _type_counts()
        self.excluded_by_script[code] = 0
        self.empty_labels_dropped[code] = 0
        self.alias_records[code] = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "languages": list(self.languages),
            "language_specs": list(self.language_specs),
            "records": self.records,
            "candidates": self.candidates,
            "latin_only": self.latin_only,
            "excluded_by_script": self.excluded_by_script,
            "empty_labels_dropped": self.empty_labels_dropped,
            "alias_records": self.alias_records,
            "resolutions": dict(sorted(self.resolutions.items())),
            "loc_per_entities": list(self.loc_per_entities),
            "empty_languages": self.empty_languages,
            "tabs_replaced": self.tabs_replaced,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExtractionSummary:
        return cls(
            languages=list(data["languages"]),
            language_specs=list(data.get("language_specs", [])),
            records=data["records"],
            candidates=data["candidates"],
            latin_only=data["latin_only"],
            excluded_by_script=data["excluded_by_script"],
            empty_labels_dropped=data["empty_labels_dropped"],
            alias_records=data.get("alias_records", {}),
            resolutions=Counter(data.get("resolutions", {})),
            loc_per_entities=list(data.get("loc_per_entities", [])),
            tabs_replaced=data.get("tabs_replaced", 0),
        )


@dataclass
class ExtractionResult:
    records: list[NameRecord]
    summary: ExtractionSummary
    aliases: list[NameRecord] = field(default_factory=list)


def _type_key(types: set[EntityType]) -> str:
    return "+".join(t.value for t in (LOC, ORG, PER) if t in types)


def extract(
    store,
    table: ClosureTable | None,
    roots: RootConfig,
    languages: list[LanguageSpec],
    include_aliases: bool = False,
) -> ExtractionResult:
    if table is None:
        raise PrerequisiteError("no closure table; run the closure stage first")
    missing = [r for r in roots.roots if r not in table.closure]
    if missing:
        raise ConfigError(f"closure table lacks roots {missing}; rebuild it with the current root config")

    summary = ExtractionSummary()
    records: list[NameRecord] = []
    aliases: list[NameRecord] = []
    loc_per: set[str] = set()

    for spec in languages:
        code = spec.wikimedia_code
        policy = spec.script_policy
        summary.init_language(code)
        summary.language_specs.append(spec.to_dict())
        for entity in store.query_by_language(code):
            types = classify(entity, table, roots)
            if not types:
                continue
            entity_type = resolve_type(types, entity.qid)
            summary.resolutions[_type_key(types)] += 1
            if types == {LOC, PER} and entity.qid not in loc_per:
                loc_per.add(entity.qid)
                logger.info("%s typed LOC and PER; resolved to PER", entity.qid)

            name = entity.labels[code]
            if not name.strip():
                summary.empty_labels_dropped[code] += 1
                continue
            summary.candidates[code][entity_type.value] += 1
            if is_latin_only(name):
                summary.latin_only[code][entity_type.value] += 1
            if not passes_script_policy(name, policy):
                summary.excluded_by_script[code] += 1
            else:
                records.append(
                    NameRecord(entity.qid, code, entity_type, name, compute_english_match(entity, name))
                )
                summary.records[code][entity_type.value] += 1

            if include_aliases:
                for alias in entity.aliases.get(code, ()):
                    if alias.strip() and passes_script_policy(alias, policy):
                        aliases.append(
                            NameRecord(entity.qid, code, entity_type, alias, compute_english_match(entity, alias))
                        )
                        summary.alias_records[code] += 1

    summary.loc_per_entities = sorted(loc_per, key=qid_number)
    records.sort(key=NameRecord.sort_key)
    aliases.sort(key=lambda r: (*r.sort_key(), r.name))
    return ExtractionResult(records, summary, aliases)


def _tsv_safe(name: str) -> tuple[str, int]:
    return _TSV_UNSAFE.subn(" ", name)


def write_name_list(records: Iterable[NameRecord], path: Path) -> int:
    """Write one language's records as TSV; return the number of replaced tab/newline characters."""
    replaced = 0
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        out.write("\t".join(TSV_HEADER) + "\n")
        for record in records:
            name, n = _tsv_safe(record.name)
            replaced += n
            flag = "true" if record.english_match else "false"
            out.write(f"{record.qid}\t{record.entity_type.value}\t{name}\t{flag}\n")
    return replaced


def write_name_lists(result: ExtractionResult, out_dir: str | Path) -> list[Path]:
    """Write ``<code>.tsv`` for every extracted language (and ``<code>.aliases.tsv`` when aliases were extracted)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    by_lang: dict[str, list[NameRecord]] = defaultdict(list)
    for record in result.records:
        by_lang[record.language].append(record)
    alias_by_lang: dict[str, list[NameRecord]] = defaultdict(list)
    for record in result.aliases:
        alias_by_lang[record.language].append(record)

    written = []
    replaced = 0
    for code in result.summary.languages:
        path = out_dir / f"{code}.tsv"
        replaced += write_name_list(by_lang[code], path)
        written.append(path)
        if result.aliases:
            alias_path = out_dir / f"{code}.aliases.tsv"
            write_name_list(alias_by_lang[code], alias_path)
            written.append(alias_path)
    result.summary.tabs_replaced = replaced
    return written


def read_name_list(path: str | Path, language: str | None = None) -> list[NameRecord]:
    path = Path(path)
    language = language or path.name.split(".")[0]
    records = []
    with open(path, encoding="utf-8", newline="\n") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if tuple(header) != TSV_HEADER:
            raise DataError(f"{path}: unexpected header {header}")
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 4:
                raise DataError(f"{path}:{lineno}: expected 4 columns, got {len(parts)}")
            qid, type_name, name, flag = parts
            records.append(NameRecord(qid, language, EntityType(type_name), name, flag == "true"))
    return records
