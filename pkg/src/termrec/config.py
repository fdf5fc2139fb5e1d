"""Service configuration: a plain key-value file plus environment overrides.

File format: one ``key = value`` per line, blank lines and ``#`` comments
ignored. Every key has a matching environment variable (``TERMREC_`` prefix,
upper-cased) that wins over the file.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields

from .errors import ConfigError

ENV_PREFIX = "TERMREC_"


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8356
    store_path: str = "termrec.db"
    job_parallelism: int = 2
    retry_attempts: int = 5
    retry_base_delay: float = 1.0
    retry_max_delay: float = 60.0

    def __post_init__(self):
        if not 1 <= self.port <= 65535:
            raise ConfigError(f"port out of range: {self.port}", key="port")
        if self.job_parallelism < 1:
            raise ConfigError("job_parallelism must be >= 1", key="job_parallelism")
        if self.retry_attempts < 1:
            raise ConfigError("retry_attempts must be >= 1", key="retry_attempts")
        if self.retry_base_delay <= 0 or self.retry_max_delay < self.retry_base_delay:
            raise ConfigError(
                "retry delays must satisfy 0 < base <= max", key="retry_base_delay"
            )


_FIELD_TYPES = {f.name: f.type for f in fields(ServiceConfig)}
_CONVERTERS = {"int": int, "float": float, "str": str}


def _convert(key: str, raw: str):
    type_name = _FIELD_TYPES[key]
    try:
        return _CONVERTERS[type_name](raw)
    except ValueError as exc:
        raise ConfigError(f"invalid value for {key}: {raw!r}", key=key) from exc


def parse_config_text(text: str, source: str = "config") -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source} line {lineno}: expected key = value", key=None)
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{source} line {lineno}: unknown key {key!r}", key=key)
        values[key] = _convert(key, raw)
    return values


def load_config(
    path: str | None = None,
    env: dict[str, str] | None = None,
    overrides: dict | None = None,
) -> ServiceConfig:
    """Resolve configuration: defaults < file < environment < overrides."""
    env = os.environ if env is None else env
    values: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}", key=None) from exc
        values.update(parse_config_text(text, source=path))
    for key in _FIELD_TYPES:
        env_name = ENV_PREFIX + key.upper()
        if env_name in env:
            values[key] = _convert(key, env[env_name])
    if overrides:
        for key, value in overrides.items():
            if value is not None:
                if key not in _FIELD_TYPES:
                    raise ConfigError(f"unknown config key {key!r}", key=key)
                values[key] = value
    return ServiceConfig(**values)
