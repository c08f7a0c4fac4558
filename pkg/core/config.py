"""
Toolkit defaults.

Single source of truth for the CLI and the Streamlit app; callers override
single fields with ``dataclasses.replace``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

STRATEGIES = ("naive", "greedy", "oracle")
LABEL_MODES = ("full", "coarse")


@dataclass(frozen=True)
class ToolkitConfig:
    threshold: float = 0.5            # edge prediction threshold (strict >)
    oracle_max_nodes: int = 16        # exhaustive repair gives up beyond this
    root_label: str = "root"          # label of edges added by the connectors
    strategy: str = "greedy"
    ensemble_sizes: Tuple[int, ...] = (3, 5, 7)
    label_mode: str = "full"

    def __post_init__(self):
        if not 0.0 < float(self.threshold) < 1.0:
            raise ValueError(f"threshold must lie in (0, 1), got {self.threshold}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.label_mode not in LABEL_MODES:
            raise ValueError(f"unknown label mode {self.label_mode!r}")
        if int(self.oracle_max_nodes) < 0:
            raise ValueError("oracle_max_nodes must be non-negative")


def get_default_config() -> ToolkitConfig:
    return ToolkitConfig()
