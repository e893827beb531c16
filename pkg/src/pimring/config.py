"""Plain key=value configuration files.

Lines look like ``key=value``; ``#`` starts a comment and blank lines are
ignored. Keys may carry a section prefix (``dpu.``, ``cost.``, ``platform.``)
so one file can configure several models.
"""

from __future__ import annotations

import dataclasses
import logging
from pathlib import Path
from typing import Any, TypeVar

from .errors import ConfigError

logger = logging.getLogger(__name__)

T = TypeVar("T")


def parse_key_value(text: str, source: str = "<config>") -> dict[str, str]:
    """
    Parse key=value text into a dictionary.

    Args:
        text: Configuration text
        source: Name used in error messages

    Returns:
        Mapping of keys to raw string values, in file order
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def load_config(path: str | Path) -> dict[str, str]:
    """Read and parse a key=value file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    logger.debug(f"Loaded config {path}")
    return parse_key_value(text, source=str(path))


def format_key_value(values: dict[str, Any], header: str | None = None) -> str:
    """Render a mapping as key=value lines."""
    lines = [f"# {header}"] if header else []
    lines.extend(f"{key}={value}" for key, value in values.items())
    return "\n".join(lines) + "\n"


def _coerce(raw: str, current: Any, key: str) -> Any:
    try:
        if isinstance(current, bool):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(current, int):
            try:
                return int(raw, 0)
            except ValueError:
                as_float = float(raw)
                if not as_float.is_integer():
                    raise
                return int(as_float)
        if isinstance(current, float):
            return float(raw)
    except ValueError as e:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {type(current).__name__}") from e
    return raw


def apply_overrides(instance: T, values: dict[str, str], prefix: str) -> T:
    """
    Return a copy of a dataclass instance with the prefixed keys applied.

    Keys without a dot are matched against the field names as well, so a
    file dedicated to one model may omit the prefix.

    Args:
        instance: Frozen dataclass instance providing defaults
        values: Parsed key=value mapping
        prefix: Section prefix such as ``"cost"``

    Returns:
        New instance with overrides applied
    """
    names = {f.name for f in dataclasses.fields(instance)}
    changes: dict[str, Any] = {}
    for key, raw in values.items():
        section, _, name = key.rpartition(".")
        if section and section != prefix:
            continue
        if name not in names:
            if section:
                raise ConfigError(f"unknown key {key!r} for section {prefix!r}")
            continue
        changes[name] = _coerce(raw, getattr(instance, name), key)
    return dataclasses.replace(instance, **changes) if changes else instance


def check_known_keys(values: dict[str, str], sections: dict[str, object]) -> None:
    """Reject keys that match no section prefix or field name."""
    for key in values:
        section, _, name = key.rpartition(".")
        candidates = [sections[section]] if section in sections else []
        if section and not candidates:
            raise ConfigError(f"unknown config section in {key!r}")
        if not section:
            candidates = list(sections.values())
        if not any(name in {f.name for f in dataclasses.fields(c)} for c in candidates):
            raise ConfigError(f"unknown config key {key!r}")
