"""Global run configuration shared by every CLI subcommand."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from pathlib import Path

from .priors import FOCAL_CHANNEL_MODES

THREADS_ENV_VAR = "CAMPRIOR_THREADS"

_LOG_LEVELS = ("debug", "info", "warning", "error")


@dataclass(frozen=True)
class GlobalConfig:
    threads: int = 0  # 0 = auto
    seed: int = 0
    max_depth: float = 100.0
    focal_channel_mode: str = "normalized500"
    log_level: str = "info"

    def __post_init__(self) -> None:
        if self.threads < 0:
            raise ValueError(f"threads must be >= 0, got {self.threads}")
        if self.max_depth <= 0:
            raise ValueError(f"max_depth must be > 0, got {self.max_depth}")
        if self.focal_channel_mode not in FOCAL_CHANNEL_MODES:
            raise ValueError(
                f"focal_channel_mode must be one of {FOCAL_CHANNEL_MODES}, "
                f"got {self.focal_channel_mode!r}"
            )
        if self.log_level not in _LOG_LEVELS:
            raise ValueError(f"log_level must be one of {_LOG_LEVELS}, got {self.log_level!r}")


def _coerce(key: str, value: str):
    value = value.strip().strip('"').strip("'")
    if key in ("threads", "seed"):
        return int(value)
    if key == "max_depth":
        return float(value)
    return value


def load_config(path: str | Path) -> GlobalConfig:
    """Flat key = value file; '#' starts a comment; unknown keys rejected."""
    cfg = GlobalConfig()
    known = set(cfg.__dataclass_fields__)
    overrides = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in known:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        overrides[key] = _coerce(key, value)
    return replace(cfg, **overrides)


def resolve_threads(cfg: GlobalConfig, flag_value: int | None) -> int:
    """Precedence: explicit --threads flag, then CAMPRIOR_THREADS, then config."""
    if flag_value is not None:
        return flag_value
    env = os.environ.get(THREADS_ENV_VAR)
    if env is not None and env != "":
        return int(env)
    return cfg.threads
