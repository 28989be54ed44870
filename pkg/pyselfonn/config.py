from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, List, Optional, Tuple

from . import utils
from .ConfigSection import ConfigSection
from .detection.DetectorConfig import DetectorConfig
from .errors import ConfigError
from .gan.GanConfig import GanConfig

SELECTION_MODES = ("loss", "detection")


@dataclass(frozen=True)
class PipelineConfig(ConfigSection):
    SECTION: ClassVar[str] = "pipeline"

    seed: int = 0
    train_fraction: float = 0.71
    selection_mode: str = "loss"
    selection_epochs: int = 5
    selection_far: float = 0.05
    val_speed: Optional[float] = None
    deterministic: bool = False
    workers: int = 1
    local_baseline: bool = False
    exclude_sensors: Tuple[int, ...] = ()

    def validate(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("pipeline.train_fraction must lie in (0, 1)")
        if self.selection_mode not in SELECTION_MODES:
            raise ConfigError(f"pipeline.selection_mode must be one of {SELECTION_MODES}")
        if self.selection_epochs < 0:
            raise ConfigError("pipeline.selection_epochs must be >= 0")
        if not 0.0 <= self.selection_far < 1.0:
            raise ConfigError("pipeline.selection_far must lie in [0, 1)")
        if self.workers < 1:
            raise ConfigError("pipeline.workers must be >= 1")

    @property
    def effective_workers(self) -> int:
        return 1 if self.deterministic else self.workers


SECTIONS = {cls.SECTION: cls for cls in (GanConfig, DetectorConfig, PipelineConfig)}


@dataclass(frozen=True)
class Config(object):
    gan: GanConfig = field(default_factory=GanConfig.defaults)
    detector: DetectorConfig = field(default_factory=DetectorConfig.defaults)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig.defaults)

    def section(self, name: str) -> ConfigSection:
        return getattr(self, name)

    def update(self, values: Dict[str, Dict[str, Any]]) -> "Config":
        """Overlay ``{section: {field: value}}`` on this config."""
        unknown = sorted(set(values) - set(SECTIONS))
        if unknown:
            raise ConfigError(f"unknown config section(s): {', '.join(unknown)}")
        changes = {
            name: SECTIONS[name].from_mapping(fields, base=self.section(name))
            for name, fields in values.items()
        }
        return Config(**{name: changes.get(name, self.section(name)) for name in SECTIONS})

    def with_seed(self, seed: int) -> "Config":
        return Config(
            self.gan.replace(seed=seed),
            self.detector.replace(seed=seed),
            self.pipeline.replace(seed=seed),
        )

    def items(self) -> List[Tuple[str, str]]:
        return self.gan.items() + self.detector.items() + self.pipeline.items()

    def to_text(self) -> str:
        return "".join(f"{key}={value}\n" for key, value in self.items())


def parse_config_text(text: str) -> Dict[str, Dict[str, str]]:
    """Flat ``section.field=value`` lines; ``#`` starts a comment."""
    values: Dict[str, Dict[str, str]] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {number}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        section, dot, name = key.partition(".")
        if not dot or not name:
            raise ConfigError(f"line {number}: key {key!r} needs a section prefix (gan., detector., pipeline.)")
        values.setdefault(section, {})[name] = value
    return values


def _read_json(text: str, source: str) -> Dict[str, Dict[str, Any]]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}: malformed JSON config: {e}") from e
    if not isinstance(data, dict) or not all(isinstance(v, dict) for v in data.values()):
        raise ConfigError(f"{source}: a JSON config maps section names to objects")
    return data


def load_config(source: str | None = None, base: Config | None = None) -> Config:
    """Config from a built-in name (``default``, ``desk``), a ``.json`` file or
    a flat key=value file, overlaid on ``base`` (the defaults when omitted)."""
    base = base or Config()
    if source is None:
        return base
    if not os.path.isfile(source):
        if utils.get_config_file(source) is None:
            raise ConfigError(f"config {source!r} is neither a file nor a built-in config")
        return base.update(utils.load_builtin_config(source) or {})
    with open(source, "r", encoding="utf-8") as f:
        text = f.read()
    if source.lower().endswith(".json"):
        return base.update(_read_json(text, source))
    return base.update(parse_config_text(text))
