"""Per-language PER/LOC/ORG name lists from Wikidata JSON dumps."""

from .closure import ClosureTable, EntityType, RootConfig, classify, compute_closure
from .dump import CompactEntity, ingest, open_dump, parse_entity_line, reduce_entity
from .extract import NameRecord, extract, is_latin_only, passes_script_policy, resolve_type
from .languages import LanguageSpec, ScriptPolicy, load_languages
from .store import EntityStore

__all__ = [
    "ClosureTable",
    "CompactEntity",
    "EntityStore",
    "EntityType",
    "LanguageSpec",
    "NameRecord",
    "RootConfig",
    "ScriptPolicy",
    "classify",
    "compute_closure",
    "extract",
    "ingest",
    "is_latin_only",
    "load_languages",
    "open_dump",
    "parse_entity_line",
    "passes_script_policy",
    "reduce_entity",
    "resolve_type",
]
