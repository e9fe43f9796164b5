"""Service configuration: defaults <- YAML file <- XFR_* environment."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

import yaml

from . import backends as backend_registry
from . import qa as qa_registry
from .errors import ConfigError

ENV_PREFIX = "XFR_"


@dataclass
class ServiceConfig:
    detector: str = "mock"
    embedder: str = "mock"
    qa: str = "keyword"
    sentence_embedder: str = "bow"
    threshold: float = 0.5
    pic_model_path: str | None = None
    tau: float = 0.3
    top_k: int = 5
    window: int = 16
    stride: int = 8
    greedy_steps: int = 10
    symmetric_maps: bool = False
    ttl_s: int = 3600
    host: str = "127.0.0.1"
    port: int = 8080
    system_name: str = "FaceXplain"
    model_description: str = (
        "The system compares two aligned face images using the cosine "
        "similarity of their feature embeddings"
    )

    def validate(self) -> "ServiceConfig":
        if not -1.0 <= self.threshold <= 1.0:
            raise ConfigError("threshold must be in [-1, 1]")
        if not 0.0 < self.tau < 1.0:
            raise ConfigError("tau must be in (0, 1)")
        if self.detector not in backend_registry.detector_names():
            raise ConfigError(f"unknown detector backend {self.detector!r}")
        if self.embedder not in backend_registry.embedder_names():
            raise ConfigError(f"unknown embedder backend {self.embedder!r}")
        # Resolving eagerly surfaces broken registrations at startup.
        qa_registry.get_qa_backend(self.qa)
        qa_registry.get_sentence_embedder(self.sentence_embedder)
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(ServiceConfig)}

# YAML files may nest backend names under a `backends:` block, matching the
# documented backends.detector / backends.embedder keys.
_BACKEND_KEYS = {"detector", "embedder", "qa", "sentence_embedder"}


def _coerce(name: str, value):
    if value is None:
        return None
    kind = _FIELD_TYPES[name]
    if kind in ("int", int):
        return int(value)
    if kind in ("float", float):
        return float(value)
    if kind in ("bool", bool):
        if isinstance(value, str):
            return value.strip().lower() in ("1", "true", "yes", "on")
        return bool(value)
    return str(value)


def load_config(path: str | Path | None = None, env: dict | None = None) -> ServiceConfig:
    """Precedence: environment > file > defaults."""
    values: dict = {}
    if path is not None:
        data = yaml.safe_load(Path(path).read_text()) or {}
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a mapping")
        nested = data.pop("backends", {}) or {}
        for key, value in nested.items():
            if key not in _BACKEND_KEYS:
                raise ConfigError(f"unknown backends key {key!r}")
            values[key] = value
        for key, value in data.items():
            if key not in _FIELD_TYPES:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = value

    env = os.environ if env is None else env
    for name in _FIELD_TYPES:
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            values[name] = env[env_key]
        # backends.* keys are also reachable as XFR_BACKENDS_<NAME>
        alt_key = f"{ENV_PREFIX}BACKENDS_{name.upper()}"
        if name in _BACKEND_KEYS and alt_key in env:
            values[name] = env[alt_key]

    coerced = {name: _coerce(name, value) for name, value in values.items()}
    return ServiceConfig(**coerced).validate()
