from __future__ import annotations

import os
from dataclasses import dataclass

from .dirichlet_constants import DEFAULT_PRIME_CUTOFF, DEFAULT_SERIES_CUTOFF


@dataclass(frozen=True)
class RunConfig:
    x_max: int = 10**4
    q_max: int = 200
    prime_cutoff: int = DEFAULT_PRIME_CUTOFF
    series_cutoff: int = DEFAULT_SERIES_CUTOFF
    tolerance: float = 1e-9
    cache_path: str = "r3.cache"
    output_format: str = "json"
    threads: int = 1  # 0 = one per CPU

    def __post_init__(self) -> None:
        for name in ("x_max", "q_max", "prime_cutoff", "series_cutoff"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.output_format not in ("json", "csv"):
            raise ValueError(f"output_format must be json or csv, got {self.output_format!r}")
        if self.threads < 0:
            raise ValueError("threads must be >= 0")

    @property
    def workers(self) -> int:
        return self.threads or (os.cpu_count() or 1)
