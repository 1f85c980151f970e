"""Service configuration: JSON file with environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8750
    storage_root: str = "./pupilclean-data"
    cache_budget_bytes: int = 1 << 30
    max_workers: Optional[int] = None  # None: cores - 1
    default_sample_rate_hz: float = 300.0

    @staticmethod
    def load(path: str | os.PathLike | None = None,
             env: Optional[dict] = None) -> "ServiceConfig":
        env = os.environ if env is None else env
        doc: dict = {}
        if path is None:
            path = env.get("PUPILCLEAN_CONFIG")
        if path is not None:
            doc = json.loads(Path(path).read_text())

        def override(key: str, env_name: str, cast):
            if env_name in env:
                doc[key] = cast(env[env_name])

        override("host", "PUPILCLEAN_HOST", str)
        override("port", "PUPILCLEAN_PORT", int)
        override("storage_root", "PUPILCLEAN_STORAGE_ROOT", str)
        override("cache_budget_bytes", "PUPILCLEAN_CACHE_BUDGET_BYTES", int)
        override("max_workers", "PUPILCLEAN_MAX_WORKERS", int)
        override("default_sample_rate_hz", "PUPILCLEAN_SAMPLE_RATE_HZ", float)
        return ServiceConfig(**doc)
