from __future__ import annotations

import os
from typing import Any, Dict, Iterable, List, Tuple

from .config import SECTIONS, Config, parse_config_text
from .errors import ConfigError

LEDGER_FILE = "ledger.txt"


def _text(value: Any) -> str:
    text = str(value)
    if "\n" in text:
        raise ValueError(f"ledger values are single-line, got {text!r}")
    return text


class RunLedger(object):
    """Ordered ``key=value`` block describing one run: datasets, seeds, every
    config field and the chosen checkpoint. The config entries alone rebuild
    the run's :class:`Config`."""

    def __init__(self, entries: Iterable[Tuple[str, Any]] = ()):
        self._entries: Dict[str, str] = {}
        self.update(entries)

    def set(self, key: str, value: Any):
        if not key or "=" in key:
            raise ValueError(f"invalid ledger key {key!r}")
        self._entries[key] = _text(value)

    def update(self, entries: Iterable[Tuple[str, Any]]):
        for key, value in entries:
            self.set(key, value)

    def get(self, key: str, default: str | None = None) -> str | None:
        return self._entries.get(key, default)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def items(self) -> List[Tuple[str, str]]:
        return list(self._entries.items())

    def to_text(self) -> str:
        return "".join(f"{key}={value}\n" for key, value in self._entries.items())

    @classmethod
    def from_text(cls, text: str) -> "RunLedger":
        ledger = cls()
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"malformed ledger line {raw!r}")
            ledger.set(key.strip(), value.strip())
        return ledger

    def config(self) -> Config:
        lines = [
            f"{key}={value}" for key, value in self._entries.items() if key.split(".", 1)[0] in SECTIONS
        ]
        return Config().update(parse_config_text("\n".join(lines)))

    def save(self, path: str) -> str:
        if os.path.isdir(path):
            path = os.path.join(path, LEDGER_FILE)
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_text())
        return path

    @classmethod
    def load(cls, path: str) -> "RunLedger":
        if os.path.isdir(path):
            path = os.path.join(path, LEDGER_FILE)
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_text(f.read())
