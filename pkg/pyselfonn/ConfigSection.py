from __future__ import annotations

import dataclasses
import typing
from typing import Any, ClassVar, Dict, List, Mapping, Tuple, Union

from . import utils
from .errors import ConfigError


def _coerce(value: Any, hint: Any, name: str) -> Any:
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    if origin is Union:
        inner = [a for a in args if a is not type(None)]
        if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none", "null")):
            return None
        return _coerce(value, inner[0], name)
    if origin in (tuple, Tuple):
        item = args[0] if args else str
        if isinstance(value, str):
            parts = [p.strip() for p in value.split(",") if p.strip()]
        elif isinstance(value, (list, tuple)):
            parts = list(value)
        else:
            raise ConfigError(f"{name}: expected a list, got {value!r}")
        return tuple(_coerce(p, item, name) for p in parts)
    if hint is bool:
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {value!r}")
    if hint is int:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
        try:
            return int(value) if not isinstance(value, str) else int(value.strip())
        except ValueError as e:
            raise ConfigError(f"{name}: expected an integer, got {value!r}") from e
    if hint is float:
        try:
            return float(value)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"{name}: expected a number, got {value!r}") from e
    return str(value).strip() if isinstance(value, str) else value


def _format(value: Any) -> str:
    if isinstance(value, tuple):
        return ",".join(_format(v) for v in value)
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclasses.dataclass(frozen=True)
class ConfigSection(object):
    """Base of the config dataclasses: typed coercion from flat key/value
    pairs, a ledger dump and built-in defaults."""

    SECTION: ClassVar[str] = ""
    _defaults: ClassVar[Dict[type, Any]] = {}

    def __post_init__(self):
        self.validate()

    def validate(self):
        pass

    @classmethod
    def field_names(cls) -> List[str]:
        return [f.name for f in dataclasses.fields(cls)]

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any], base: "ConfigSection" | None = None):
        hints = typing.get_type_hints(cls)
        names = set(cls.field_names())
        unknown = sorted(set(values) - names)
        if unknown:
            raise ConfigError(f"unknown {cls.SECTION} config key(s): {', '.join(unknown)}")
        changes = {k: _coerce(v, hints[k], f"{cls.SECTION}.{k}") for k, v in values.items()}
        try:
            if base is None:
                return cls(**changes)
            return dataclasses.replace(base, **changes)
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"invalid {cls.SECTION} config: {e}") from e

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def items(self) -> List[Tuple[str, str]]:
        return [
            (f"{self.SECTION}.{name}", _format(getattr(self, name)))
            for name in self.field_names()
        ]

    @classmethod
    def defaults(cls):
        """Defaults from the built-in ``default`` config resource (cached)."""
        if cls not in ConfigSection._defaults:
            data = utils.load_builtin_config("default") or {}
            ConfigSection._defaults[cls] = cls.from_mapping(data.get(cls.SECTION, {}))
        return ConfigSection._defaults[cls]
