"""Command-line interface.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 I/O error.
"""

from __future__ import annotations

import json
import logging
import sqlite3
import sys
from pathlib import Path
from typing import Any

import click

from . import pipeline
from .closure import RootConfig
from .errors import ConfigError, StoreIOError, WikinamesError
from .store import EntityStore

logger = logging.getLogger("wikinames")


def _emit(payload: Any) -> None:
    click.echo(json.dumps(payload, ensure_ascii=False, sort_keys=True))


def _config(ctx: click.Context, **overrides: Any) -> pipeline.PipelineConfig:
    base: pipeline.PipelineConfig | None = ctx.obj.get("config")
    merged = {k: v for k, v in overrides.items() if v is not None}
    for key in ("store", "threads"):
        if key not in merged and ctx.obj.get(key) is not None:
            merged[key] = ctx.obj[key]
    if base is not None:
        return pipeline.with_overrides(base, **merged)
    merged.setdefault("store", None)
    merged.setdefault("out", Path("."))
    if merged["store"] is None:
        raise ConfigError("--store is required (globally, per command, or in --config)")
    return pipeline.PipelineConfig(**merged)


@click.group()
@click.option("--store", type=click.Path(path_type=Path), help="Entity store directory.")
@click.option("--config", "config_path", type=click.Path(path_type=Path), help="Pipeline config (JSON).")
@click.option("--threads", type=int, help="Worker processes for dump parsing.")
@click.option("--log-level", default="WARNING", show_default=True,
              type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False))
@click.pass_context
def cli(ctx: click.Context, store, config_path, threads, log_level) -> None:
    """Build per-language PER/LOC/ORG name lists from a Wikidata JSON dump."""
    logging.basicConfig(level=log_level.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)
    ctx.ensure_object(dict)
    ctx.obj["store"] = store
    ctx.obj["threads"] = threads
    ctx.obj["config"] = pipeline.PipelineConfig.load(config_path) if config_path else None


@cli.command("ingest")
@click.option("--dump", type=click.Path(path_type=Path), required=True)
@click.option("--store", type=click.Path(path_type=Path))
@click.option("--compression", type=click.Choice(["auto", "none", "bz2", "gzip"]))
@click.option("--threads", type=int)
@click.pass_context
def ingest_cmd(ctx, dump, store, compression, threads) -> int:
    """Stream a dump into the entity store."""
    config = _config(ctx, dump=dump, store=store, compression=compression, threads=threads)
    summary = pipeline.run_ingest(config)
    summary["duration_seconds"] = round(summary.pop("_duration"), 3)
    _emit(summary)
    return 0


@cli.command("closure")
@click.option("--store", type=click.Path(path_type=Path))
@click.option("--roots", help="PER,LOC,ORG root classes.  [default: Q5,Q82794,Q43229]")
@click.pass_context
def closure_cmd(ctx, store, roots) -> int:
    """Compute and persist the subclass closure of each root class."""
    config = _config(ctx, store=store, roots=RootConfig.parse(roots) if roots else None)
    _emit(pipeline.run_closure(config))
    return 0


@cli.command("extract")
@click.option("--store", type=click.Path(path_type=Path))
@click.option("--languages", type=click.Path(path_type=Path), help="Language config (TOML); default set if omitted.")
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--roots", help="PER,LOC,ORG root classes used when the closure was built.")
@click.option("--include-aliases", is_flag=True, default=None, help="Also write <code>.aliases.tsv files.")
@click.pass_context
def extract_cmd(ctx, store, languages, out, roots, include_aliases) -> int:
    """Write one name list per configured language."""
    config = _config(ctx, store=store, languages=languages, out=out,
                     roots=RootConfig.parse(roots) if roots else None, include_aliases=include_aliases)
    summary = pipeline.run_extract(config)
    _emit({k: summary[k] for k in ("records", "excluded_by_script", "empty_languages")})
    return 0


@cli.command("stats")
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--format", "fmt", type=click.Choice(["tsv", "json"]), default="tsv", show_default=True)
@click.option("--languages", type=click.Path(path_type=Path))
@click.pass_context
def stats_cmd(ctx, out, fmt, languages) -> int:
    """Summarise the name lists in OUT."""
    config = _config(ctx, out=out, stats_format=fmt, languages=languages, store=ctx.obj.get("store") or out)
    _emit(pipeline.run_stats(config))
    return 0


@cli.command("coverage")
@click.option("--conll", type=click.Path(path_type=Path, exists=True, dir_okay=False), required=True)
@click.option("--language", required=True, help="Wikimedia code of the name list to match against.")
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--max-prefix", type=int, default=3, show_default=True)
@click.option("--unique", is_flag=True, help="Count each distinct mention once.")
@click.pass_context
def coverage_cmd(ctx, conll, language, out, max_prefix, unique) -> int:
    """Share of non-MISC mentions in a CoNLL file found in a name list."""
    config = _config(ctx, out=out, max_prefix=max_prefix, store=ctx.obj.get("store") or out)
    report = pipeline.run_coverage(config, conll, language, unique)
    _emit(report.to_dict())
    return 0


@cli.command("export")
@click.option("--store", type=click.Path(path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["jsonl"]), default="jsonl", show_default=True)
@click.option("--output", type=click.Path(path_type=Path), help="Write here instead of stdout.")
@click.pass_context
def export_cmd(ctx, store, fmt, output) -> int:
    """Dump every stored entity, one JSON object per line, in qid order."""
    config = _config(ctx, store=store)
    if not EntityStore.exists(config.store):
        raise ConfigError(f"no entity store at {config.store}")
    with EntityStore(config.store, readonly=True) as db:
        if output:
            with open(output, "w", encoding="utf-8", newline="\n") as fh:
                db.export_jsonl(fh)
        else:
            db.export_jsonl(sys.stdout)
    return 0


@cli.command("run")
@click.option("--dump", type=click.Path(path_type=Path))
@click.option("--store", type=click.Path(path_type=Path))
@click.option("--out", type=click.Path(path_type=Path))
@click.option("--languages", type=click.Path(path_type=Path))
@click.option("--roots")
@click.option("--compression", type=click.Choice(["auto", "none", "bz2", "gzip"]))
@click.option("--threads", type=int)
@click.option("--format", "fmt", type=click.Choice(["tsv", "json"]))
@click.option("--stages", default=",".join(pipeline.STAGES), show_default=True)
@click.pass_context
def run_cmd(ctx, dump, store, out, languages, roots, compression, threads, fmt, stages) -> int:
    """Run ingest, closure, extract and stats in order."""
    config = _config(ctx, dump=dump, store=store, out=out, languages=languages,
                     roots=RootConfig.parse(roots) if roots else None,
                     compression=compression, threads=threads, stats_format=fmt)
    result = pipeline.run_pipeline(config, [s.strip() for s in stages.split(",") if s.strip()])
    if result.error:
        click.echo(json.dumps(result.error), err=True)
    _emit({"completed": list(result.summaries), "summaries": str(config.out / "summaries")})
    return result.exit_code


def main(argv: list[str] | None = None) -> int:
    try:
        code = cli.main(args=argv, prog_name="wikinames", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except WikinamesError as exc:
        click.echo(json.dumps({"error": type(exc).__name__, "message": str(exc)}), err=True)
        return exc.exit_code
    except FileNotFoundError as exc:
        click.echo(json.dumps({"error": "FileNotFoundError", "message": str(exc)}), err=True)
        return ConfigError.exit_code
    except (OSError, sqlite3.Error) as exc:
        click.echo(json.dumps({"error": type(exc).__name__, "message": str(exc)}), err=True)
        return StoreIOError.exit_code
    return code if isinstance(code, int) else 0


if __name__ == "__main__":
    sys.exit(main())
