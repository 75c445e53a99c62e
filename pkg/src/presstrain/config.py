"""Plain key=value config files, overridable by CLI flags.

Format: one `key = value` per line, `#` comments, blank lines ignored.
Keys are dotted lowercase (e.g. `game.base_speed`); values stay strings
until a consumer coerces them.  Unknown keys are preserved so callers can
validate against their own schema.
"""

from __future__ import annotations

from pathlib import Path


class ConfigError(ValueError):
    pass


def parse_config(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        values[key] = value.strip()
    return values


def load_config(path: str | Path) -> dict[str, str]:
    return parse_config(Path(path).read_text())


def get_float(cfg: dict[str, str], key: str, default: float) -> float:
    if key not in cfg:
        return default
    try:
        return float(cfg[key])
    except ValueError as e:
        raise ConfigError(f"{key}: expected a number, got {cfg[key]!r}") from e


def get_int(cfg: dict[str, str], key: str, default: int) -> int:
    if key not in cfg:
        return default
    try:
        return int(cfg[key])
    except ValueError as e:
        raise ConfigError(f"{key}: expected an integer, got {cfg[key]!r}") from e


def get_str(cfg: dict[str, str], key: str, default: str) -> str:
    return cfg.get(key, default)


def get_bool(cfg: dict[str, str], key: str, default: bool) -> bool:
    if key not in cfg:
        return default
    v = cfg[key].lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {cfg[key]!r}")
