"""Run configuration shared by the library and the CLI."""

from __future__ import annotations

import contextlib
import os
from dataclasses import dataclass, replace
from typing import Optional

DEFAULT_MAX_ENUMERATE = 2_000_000
DEFAULT_MAX_RELATION_PAIRS = 4_000_000


def _env_cap():
    raw = os.environ.get("ENDOATLAS_MAX_ENUM")
    if raw is None:
        return DEFAULT_MAX_ENUMERATE
    value = int(raw)
    if value <= 0:
        raise ValueError("ENDOATLAS_MAX_ENUM must be positive")
    return value


@dataclass(frozen=True)
class RunConfig:
    max_enumerate: int = DEFAULT_MAX_ENUMERATE
    max_relation_pairs: int = DEFAULT_MAX_RELATION_PAIRS
    workers: int = 1
    seed: int = 0
    output: str = "json"
    cache_dir: Optional[str] = None

    def __post_init__(self):
        if self.max_enumerate <= 0 or self.max_relation_pairs <= 0 or self.workers <= 0:
            raise ValueError("caps and worker count must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.output not in ("json", "text"):
            raise ValueError(f"unknown output format {self.output!r}")

    @classmethod
    def from_env(cls, **overrides):
        return cls(**{"max_enumerate": _env_cap(), **overrides})


_current = RunConfig.from_env()


def get_config() -> RunConfig:
    return _current


def set_config(cfg: RunConfig) -> None:
    global _current
    _current = cfg


@contextlib.contextmanager
def using(**changes):
    """Temporarily override fields of the active configuration."""
    global _current
    old = _current
    _current = replace(old, **changes)
    try:
        yield _current
    finally:
        _current = old


def cap_or_default(cap):
    return get_config().max_enumerate if cap is None else cap
