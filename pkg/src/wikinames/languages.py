"""Language configuration: which label languages to extract and how to filter them."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import regex

from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_CONFIG_RESOURCE = "default_languages.toml"


@dataclass(frozen=True)
class ScriptPolicy:
    """``required_script=None`` accepts any name."""

    required_script: str | None = None

    def __post_init__(self) -> None:
        if self.required_script is not None:
            try:
                regex.compile(rf"\p{{Script={self.required_script}}}")
            except regex.error:
                raise ConfigError(f"unknown Unicode script {self.required_script!r}") from None

    def __str__(self) -> str:
        return "any" if self.required_script is None else f"require-script({self.required_script})"


ANY = ScriptPolicy()


@dataclass(frozen=True)
class LanguageSpec:
    wikimedia_code: str
    iso639_3: str
    display_name: str
    script_policy: ScriptPolicy = ANY

    def __post_init__(self) -> None:
        if not self.wikimedia_code:
            raise ConfigError("language entry with empty code")

    @property
    def filtered(self) -> bool:
        return self.script_policy.required_script is not None

    def to_dict(self) -> dict[str, str]:
        out = {"code": self.wikimedia_code, "iso639_3": self.iso639_3, "name": self.display_name}
        if self.script_policy.required_script:
            out["script"] = self.script_policy.required_script
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> LanguageSpec:
        try:
            return cls(
                wikimedia_code=str(data["code"]),
                iso639_3=str(data.get("iso639_3", "")),
                display_name=str(data.get("name", data["code"])),
                script_policy=ScriptPolicy(data.get("script")),
            )
        except KeyError as exc:
            raise ConfigError(f"language entry missing {exc.args[0]!r}: {data}") from None


def parse_languages(text: str) -> list[LanguageSpec]:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid language config: {exc}") from None
    specs = [LanguageSpec.from_dict(entry) for entry in doc.get("language", [])]
    codes = [s.wikimedia_code for s in specs]
    dupes = sorted({c for c in codes if codes.count(c) > 1})
    if dupes:
        raise ConfigError(f"duplicate language codes: {', '.join(dupes)}")
    return specs


def load_languages(path: str | Path | None = None) -> list[LanguageSpec]:
    """Read a language config; ``None`` loads the bundled default set."""
    if path is None:
        text = resources.files(__package__).joinpath(DEFAULT_CONFIG_RESOURCE).read_text("utf-8")
    else:
        try:
            text = Path(path).read_text("utf-8")
        except FileNotFoundError:
            raise ConfigError(f"language config not found: {path}") from None
    return parse_languages(text)


def dump_languages(specs: list[LanguageSpec]) -> str:
    blocks = []
    for spec in specs:
        lines = ["[[language]]"]
        lines += [f"{key} = {_toml_str(value)}" for key, value in spec.to_dict().items()]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def _toml_str(value: str) -> str:
    escaped = value.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'
