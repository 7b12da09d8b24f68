"""Run configuration shared by the CLI and the experiment drivers."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

DEPTH_CAP = 12


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    experiment: str = ""
    depth: int = 8
    depths: list | None = None
    trials: int = 100
    seed: int = 1
    p: float = 2.0
    weight: dict | None = None
    symbols: dict | None = None
    out: str | None = None
    format: str = "json"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self):
        for d in [self.depth] + list(self.depths or []):
            if not isinstance(d, int) or not 1 <= d <= DEPTH_CAP:
                raise ConfigError(f"depth must be an integer in [1, {DEPTH_CAP}], got {d!r}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if not self.p > 1:
            raise ConfigError(f"p must exceed 1, got {self.p!r}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.format!r}")
        for name in ("weight", "symbols"):
            value = getattr(self, name)
            if value is not None and not isinstance(value, dict):
                raise ConfigError(f"{name} must be a JSON object")

    @property
    def depth_list(self) -> list[int]:
        return list(self.depths) if self.depths else [self.depth]

    def echo(self) -> dict:
        """Fields that determine the records (output location excluded)."""
        data = asdict(self)
        for key in ("out", "format"):
            data.pop(key)
        return data

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        data.update(overrides or {})
        return cls.from_mapping(data)
