"""Per-language summary statistics of an extraction run."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Any, Iterable, Sequence

from .closure import EntityType
from .extract import ExtractionSummary, NameRecord
from .languages import LanguageSpec

TYPES = ("LOC", "ORG", "PER")
STATS_HEADER = ("language", "code", "LOC", "ORG", "PER", "total", "english_match_pct")


def round_half_up(value: float | Decimal, places: int = 2) -> Decimal:
    return Decimal(str(value)).quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


def percentage(part: int, whole: int, places: int = 2) -> Decimal | None:
    """``100 * part / whole`` rounded half-up; ``None`` when ``whole`` is 0."""
    if whole == 0:
        return None
    exact = Decimal(100 * part) / Decimal(whole)
    return exact.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


def upper_median(values: Sequence[float]) -> float:
    """Middle element of the sorted values; the higher of the two middles for even counts."""
    if not values:
        raise ValueError("median of empty sequence")
    ordered = sorted(values)
    return ordered[len(ordered) // 2]


@dataclass
class LanguageRow:
    code: str
    name: str
    loc: int = 0
    org: int = 0
    per: int = 0
    english_matches: int = 0

    @property
    def total(self) -> int:
        return self.loc + self.org + self.per

    @property
    def english_match_pct(self) -> Decimal | None:
        return percentage(self.english_matches, self.total)

    def count(self, type_name: str) -> int:
        return {"LOC": self.loc, "ORG": self.org, "PER": self.per}[type_name]

    def type_shares(self) -> dict[str, Any]:
        """Share and log10 count per type, the data behind a per-language bar chart."""
        return {
            t: {
                "count": self.count(t),
                "share_pct": _num(percentage(self.count(t), self.total)),
                "log10": round(math.log10(self.count(t)), 4) if self.count(t) else None,
            }
            for t in TYPES
        }


@dataclass
class ScriptFilterRow:
    code: str
    name: str
    script: str
    latin_only_pct: dict[str, Decimal | None]
    excluded: int


@dataclass
class StatsReport:
    rows: list[LanguageRow]
    mean: dict[str, float]
    median: dict[str, float]
    script_filter: list[ScriptFilterRow] = field(default_factory=list)
    empty_languages: list[LanguageSpec] = field(default_factory=list)

    def row(self, code: str) -> LanguageRow:
        for row in self.rows:
            if row.code == code:
                return row
        raise KeyError(code)

    def to_dict(self) -> dict[str, Any]:
        return {
            "languages": [
                {
                    "language": r.name,
                    "code": r.code,
                    "LOC": r.loc,
                    "ORG": r.org,
                    "PER": r.per,
                    "total": r.total,
                    "english_match_pct": _num(r.english_match_pct),
                    "type_shares": r.type_shares(),
                }
                for r in self.rows
            ],
            "mean": self.mean,
            "median": self.median,
            "script_filter": [
                {
                    "language": s.name,
                    "code": s.code,
                    "script": s.script,
                    "latin_only_pct": {t: _num(v) for t, v in s.latin_only_pct.items()},
                    "excluded": s.excluded,
                }
                for s in self.script_filter
            ],
            "empty_languages": [
                {"language": s.display_name, "code": s.wikimedia_code, "iso639_3": s.iso639_3}
                for s in self.empty_languages
            ],
        }


def _num(value: Decimal | None) -> float | None:
    return None if value is None else float(value)


def summarize_rows(rows: Iterable[LanguageRow]) -> tuple[dict[str, float], dict[str, float]]:
    """Mean and (upper) median of each count column and of the English-match percentage.

    Only languages with at least one record take part.
    """
    rows = [r for r in rows if r.total]
    mean: dict[str, float] = {}
    median: dict[str, float] = {}
    if not rows:
        return mean, median
    columns = {t: [r.count(t) for r in rows] for t in TYPES}
    columns["total"] = [r.total for r in rows]
    for name, values in columns.items():
        mean[name] = sum(values) / len(values)
        median[name] = upper_median(values)
    pcts = [float(r.english_match_pct) for r in rows]
    mean["english_match_pct"] = float(round_half_up(sum(pcts) / len(pcts)))
    median["english_match_pct"] = upper_median(pcts)
    return mean, median


def compute_stats(
    records: Iterable[NameRecord],
    summary: ExtractionSummary,
    languages: list[LanguageSpec],
) -> StatsReport:
    rows = {spec.wikimedia_code: LanguageRow(spec.wikimedia_code, spec.display_name) for spec in languages}
    for record in records:
        row = rows[record.language]
        if record.entity_type is EntityType.LOC:
            row.loc += 1
        elif record.entity_type is EntityType.ORG:
            row.org += 1
        else:
            row.per += 1
        row.english_matches += record.english_match

    script_rows = []
    for spec in languages:
        if not spec.filtered:
            continue
        code = spec.wikimedia_code
        candidates = summary.candidates.get(code, {})
        latin = summary.latin_only.get(code, {})
        script_rows.append(
            ScriptFilterRow(
                code=code,
                name=spec.display_name,
                script=spec.script_policy.required_script,
                latin_only_pct={t: percentage(latin.get(t, 0), candidates.get(t, 0), 1) for t in TYPES},
                excluded=summary.excluded_by_script.get(code, 0),
            )
        )

    populated = [rows[s.wikimedia_code] for s in languages if rows[s.wikimedia_code].total]
    empty = [s for s in languages if not rows[s.wikimedia_code].total]
    mean, median = summarize_rows(populated)
    return StatsReport(populated, mean, median, script_rows, empty)


def _fmt_pct(value: Decimal | float | None, places: int = 2) -> str:
    if value is None:
        return ""
    return f"{round_half_up(value, places):.{places}f}"


def _fmt_count(value: float) -> str:
    return str(int(round_half_up(value, 0)))


def write_stats_tsv(report: StatsReport, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    lines = ["\t".join(STATS_HEADER)]
    for r in report.rows:
        lines.append(f"{r.name}\t{r.code}\t{r.loc}\t{r.org}\t{r.per}\t{r.total}\t{_fmt_pct(r.english_match_pct)}")
    for label, agg in (("Mean", report.mean), ("Median", report.median)):
        if agg:
            counts = "\t".join(_fmt_count(agg[c]) for c in (*TYPES, "total"))
            lines.append(f"{label}\t--\t{counts}\t{_fmt_pct(agg['english_match_pct'])}")
    stats_path = out_dir / "stats.tsv"
    stats_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = ["language\tcode\tscript\tLOC\tORG\tPER\texcluded"]
    for s in report.script_filter:
        pcts = "\t".join(_fmt_pct(s.latin_only_pct[t], 1) for t in TYPES)
        lines.append(f"{s.name}\t{s.code}\t{s.script}\t{pcts}\t{s.excluded}")
    filter_path = out_dir / "script_filter.tsv"
    filter_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = ["language\tcode\tiso639_3"]
    lines += [f"{s.display_name}\t{s.wikimedia_code}\t{s.iso639_3}" for s in report.empty_languages]
    empty_path = out_dir / "empty_languages.tsv"
    empty_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = ["code\ttype\tcount\tshare_pct\tlog10_count"]
    for r in report.rows:
        for t, share in r.type_shares().items():
            log10 = "" if share["log10"] is None else f"{share['log10']:.4f}"
            lines.append(f"{r.code}\t{t}\t{share['count']}\t{_fmt_pct(share['share_pct'])}\t{log10}")
    shares_path = out_dir / "type_shares.tsv"
    shares_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return [stats_path, filter_path, empty_path, shares_path]


def write_stats_json(report: StatsReport, out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "stats.json"
    path.write_text(json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    return path
