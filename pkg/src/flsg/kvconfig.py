"""Minimal key=value config files: one pair per line, '#' comments, blank lines ignored."""

from __future__ import annotations

from pathlib import Path

from .errors import FlsgError


class ConfigError(FlsgError):
    pass


def parse_kv_text(text: str, source: str = "<string>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected KEY = VALUE, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def parse_kv_file(path: str | Path) -> dict[str, str]:
    path = Path(path)
    return parse_kv_text(path.read_text(), source=str(path))
