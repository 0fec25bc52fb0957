"""Stage runners and the end-to-end pipeline.

Output directory layout::

    <out>/<code>.tsv              name list per configured language
    <out>/extract_summary.json    counters from the extract stage
    <out>/stats.tsv, ...          statistics tables
    <out>/summaries/<stage>.json  machine-readable stage summaries
    <out>/logs/timings.jsonl      wall-clock timings (not deterministic)
"""

from __future__ import annotations

import json
import logging
import sqlite3
import time
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable

from .closure import ClosureTable, RootConfig, build_subclass_graph, compute_closure
from .coverage import CoverageReport, evaluate_coverage
from .dump import COMPRESSIONS, ingest, open_dump
from .errors import ConfigError, PrerequisiteError, StoreIOError, WikinamesError
from .extract import ExtractionSummary, extract, read_name_list, write_name_lists
from .languages import LanguageSpec, load_languages
from .stats import compute_stats, write_stats_json, write_stats_tsv
from .store import EntityStore

logger = logging.getLogger(__name__)

STAGES = ("ingest", "closure", "extract", "stats")
EXTRACT_SUMMARY = "extract_summary.json"


@dataclass
class PipelineConfig:
    store: Path
    out: Path
    dump: Path | None = None
    languages: Path | None = None  # None selects the bundled default set
    roots: RootConfig = field(default_factory=RootConfig)
    threads: int = 1
    compression: str = "auto"
    max_prefix: int = 3
    include_aliases: bool = False
    stats_format: str = "tsv"

    def __post_init__(self) -> None:
        self.store = Path(self.store)
        self.out = Path(self.out)
        self.dump = Path(self.dump) if self.dump is not None else None
        self.languages = Path(self.languages) if self.languages is not None else None
        if self.compression not in COMPRESSIONS:
            raise ConfigError(f"compression must be one of {COMPRESSIONS}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.max_prefix < 0:
            raise ConfigError("max_prefix must be >= 0")
        if self.stats_format not in ("tsv", "json"):
            raise ConfigError("stats format must be tsv or json")

    def to_dict(self) -> dict[str, Any]:
        return {
            "store": str(self.store),
            "out": str(self.out),
            "dump": None if self.dump is None else str(self.dump),
            "languages": None if self.languages is None else str(self.languages),
            "roots": self.roots.to_dict(),
            "threads": self.threads,
            "compression": self.compression,
            "max_prefix": self.max_prefix,
            "include_aliases": self.include_aliases,
            "stats_format": self.stats_format,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> PipelineConfig:
        data = dict(data)
        try:
            if "roots" in data:
                data["roots"] = RootConfig.from_dict(data["roots"])
            return cls(**data)
        except (TypeError, KeyError) as exc:
            raise ConfigError(f"invalid pipeline config: {exc}") from None

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> PipelineConfig:
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except FileNotFoundError:
            raise ConfigError(f"config not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None

    def language_specs(self) -> list[LanguageSpec]:
        return load_languages(self.languages)


def run_ingest(config: PipelineConfig) -> dict[str, Any]:
    if config.dump is None:
        raise ConfigError("ingest needs a dump path")
    with open_dump(config.dump, config.compression) as stream, EntityStore(config.store) as store:
        summary = ingest(stream, store, threads=config.threads)
    logger.info("ingested %d entities (%d lines skipped)", summary.entities, summary.skipped)
    return summary.to_dict(include_timing=False) | {"_duration": summary.duration}


def _open_existing(store_path: Path, readonly: bool = True) -> EntityStore:
    if not EntityStore.exists(store_path):
        raise PrerequisiteError(f"no entity store at {store_path}; run ingest first")
    return EntityStore(store_path, readonly=readonly)


def run_closure(config: PipelineConfig) -> dict[str, Any]:
    with _open_existing(config.store, readonly=False) as store:
        graph = build_subclass_graph(store)
        table = compute_closure(graph, config.roots)
        table.save(store)
    sizes = table.sizes()
    logger.info("closure sizes: %s", sizes)
    return {
        "roots": config.roots.to_dict(),
        "sizes": sizes,
        "graph": {"nodes": len(graph), "edges": graph.edge_count()},
    }


def run_extract(config: PipelineConfig) -> dict[str, Any]:
    languages = config.language_specs()
    with _open_existing(config.store) as store:
        result = extract(store, ClosureTable.load(store), config.roots, languages, config.include_aliases)
    write_name_lists(result, config.out)
    summary = result.summary.to_dict()
    (config.out / EXTRACT_SUMMARY).write_text(json.dumps(summary, ensure_ascii=False, indent=2) + "\n", "utf-8")
    return summary


def load_extraction(
    out: Path, languages: list[LanguageSpec] | None = None
) -> tuple[list, ExtractionSummary, list[LanguageSpec]]:
    """Read back name lists and counters; ``languages=None`` uses the set recorded by extract."""
    summary_path = out / EXTRACT_SUMMARY
    if not summary_path.is_file():
        raise PrerequisiteError(f"no extraction output in {out}; run extract first")
    summary = ExtractionSummary.from_dict(json.loads(summary_path.read_text("utf-8")))
    if languages is None:
        languages = [LanguageSpec.from_dict(d) for d in summary.language_specs]
    records = []
    for spec in languages:
        path = out / f"{spec.wikimedia_code}.tsv"
        if not path.is_file():
            raise PrerequisiteError(f"missing name list {path}")
        records.extend(read_name_list(path, spec.wikimedia_code))
    return records, summary, languages


def run_stats(config: PipelineConfig) -> dict[str, Any]:
    languages = config.language_specs() if config.languages is not None else None
    records, summary, languages = load_extraction(config.out, languages)
    report = compute_stats(records, summary, languages)
    if config.stats_format == "json":
        files = [write_stats_json(report, config.out)]
    else:
        files = write_stats_tsv(report, config.out)
    return {
        "files": [p.name for p in files],
        "populated_languages": len(report.rows),
        "empty_languages": [s.wikimedia_code for s in report.empty_languages],
        "mean": report.mean,
        "median": report.median,
    }


def run_coverage(
    config: PipelineConfig, conll: Path, language: str, unique: bool = False
) -> CoverageReport:
    path = config.out / f"{language}.tsv"
    records = read_name_list(path, language) if path.is_file() else None
    report = evaluate_coverage(conll, records, config.max_prefix, unique, language)
    cov_dir = config.out / "coverage"
    cov_dir.mkdir(parents=True, exist_ok=True)
    (cov_dir / f"{language}.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n", "utf-8")
    return report


_RUNNERS = {"ingest": run_ingest, "closure": run_closure, "extract": run_extract, "stats": run_stats}


def validate(config: PipelineConfig, stages: Iterable[str]) -> list[str]:
    """Check paths and prerequisites; return the stages in dependency order."""
    requested = set(stages)
    unknown = requested - set(STAGES)
    if unknown:
        raise ConfigError(f"unknown stages: {sorted(unknown)}")
    ordered = [s for s in STAGES if s in requested]
    if "ingest" in requested:
        if config.dump is None:
            raise ConfigError("ingest needs a dump path")
        if not config.dump.is_file():
            raise ConfigError(f"dump not found: {config.dump}")
    if config.languages is not None and not config.languages.is_file():
        raise ConfigError(f"language config not found: {config.languages}")
    if "ingest" not in requested and requested & {"closure", "extract"}:
        if not EntityStore.exists(config.store):
            raise PrerequisiteError(f"no entity store at {config.store}; run ingest first")
    if "extract" in requested and not requested & {"ingest", "closure"}:
        with _open_existing(config.store) as store:
            if store.read_closure() is None:
                raise PrerequisiteError("no closure table in store; run the closure stage first")
    if "stats" in requested and "extract" not in requested:
        if not (config.out / EXTRACT_SUMMARY).is_file():
            raise PrerequisiteError(f"no extraction output in {config.out}; run extract first")
    return ordered


@dataclass
class PipelineResult:
    exit_code: int
    summaries: dict[str, dict[str, Any]]
    error: dict[str, Any] | None = None


def _error_payload(exc: BaseException, stage: str | None) -> dict[str, Any]:
    return {"error": type(exc).__name__, "message": str(exc), "stage": stage}


def run_pipeline(config: PipelineConfig, stages: Iterable[str] = STAGES) -> PipelineResult:
    summaries: dict[str, dict[str, Any]] = {}
    try:
        ordered = validate(config, stages)
    except WikinamesError as exc:
        return PipelineResult(exc.exit_code, summaries, _error_payload(exc, None))

    summary_dir = config.out / "summaries"
    log_dir = config.out / "logs"
    summary_dir.mkdir(parents=True, exist_ok=True)
    log_dir.mkdir(parents=True, exist_ok=True)

    for stage in ordered:
        started = time.monotonic()
        try:
            summary = _RUNNERS[stage](config)
        except WikinamesError as exc:
            logger.error("stage %s failed: %s", stage, exc)
            return PipelineResult(exc.exit_code, summaries, _error_payload(exc, stage))
        except (OSError, sqlite3.Error) as exc:
            logger.error("stage %s failed: %s", stage, exc)
            return PipelineResult(StoreIOError.exit_code, summaries, _error_payload(exc, stage))
        duration = summary.pop("_duration", time.monotonic() - started)
        summaries[stage] = summary
        (summary_dir / f"{stage}.json").write_text(
            json.dumps(summary, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        with open(log_dir / "timings.jsonl", "a", encoding="utf-8") as log:
            entry = {
                "stage": stage,
                "finished_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
                "duration_seconds": round(duration, 3),
            }
            log.write(json.dumps(entry) + "\n")
    return PipelineResult(0, summaries)


def with_overrides(config: PipelineConfig, **overrides: Any) -> PipelineConfig:
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})
