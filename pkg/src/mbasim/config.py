"""Shared configuration for the simplification engines."""

from __future__ import annotations

from dataclasses import dataclass

from .expr import DEFAULT_METRIC_ORDER, Metric


@dataclass(frozen=True)
class SimplifyConfig:
    """Budgets and conventions shared by the linear core and the pipeline.

    width is the word size n; all other fields bound search effort and must
    stay positive.  The metric order is compared lexicographically.
    """

    width: int = 64
    metric_order: tuple[Metric, ...] = DEFAULT_METRIC_ORDER
    max_outer_iterations: int = 20
    max_substitution_size: int = 3
    max_substitution_subsets: int = 64
    expansion_budget: int = 512
    time_budget_ms: int = 10_000
    decompose_budget: int = 4096
    equal_term_budget: int = 10_000
    check_width: int = 4
    check_samples: int = 10_000
    sample_seed: int = 2023

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("width must be positive")
        for name in (
            "max_outer_iterations",
            "max_substitution_size",
            "max_substitution_subsets",
            "expansion_budget",
            "time_budget_ms",
            "decompose_budget",
            "equal_term_budget",
            "check_width",
            "check_samples",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


DEFAULT_CONFIG = SimplifyConfig()


def config_for_width(width: int, base: SimplifyConfig = DEFAULT_CONFIG) -> SimplifyConfig:
    from dataclasses import replace

    return base if width == base.width else replace(base, width=width)
