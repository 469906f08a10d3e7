"""Cost-benefit calculators for replication.

Break-even benefit is the latency saving per KB of added utilization at
which the dollar value of saved time equals the resource cost.  Unit
convention, fixed by regression against the published price table:
1 GB = 2**20 KB and 1 hour = 3.6e6 ms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

__all__ = [
    "CostPlan",
    "ValueEstimate",
    "CostEffectiveness",
    "break_even",
    "value_from_study",
    "cost_effectiveness",
    "table",
    "DEFAULT_PLANS",
    "DEFAULT_VALUES",
    "DEFAULT_BENCHMARK_MS_PER_KB",
    "load_plans",
    "load_values",
]

KB_PER_GB = 1 << 20
MS_PER_HOUR = 3.6e6

#: Most conservative break-even band across the bundled plans (ms/KB).
DEFAULT_BENCHMARK_MS_PER_KB = 16.0


@dataclass(frozen=True)
class CostPlan:
    name: str
    cost_per_gb: float  # dollars per GB of added utilization

    def __post_init__(self):
        if self.cost_per_gb < 0.0:
            raise ValueError("cost_per_gb must be nonnegative")


@dataclass(frozen=True)
class ValueEstimate:
    name: str
    dollars_per_hour: float  # value of one hour of saved latency

    def __post_init__(self):
        if self.dollars_per_hour < 0.0:
            raise ValueError("dollars_per_hour must be nonnegative")

    @property
    def dollars_per_ms(self) -> float:
        return self.dollars_per_hour / MS_PER_HOUR


def break_even(plan: CostPlan, value: ValueEstimate) -> float:
    """Break-even latency saving in ms per KB of added traffic."""
    if value.dollars_per_hour <= 0.0:
        raise ValueError("value of time must be positive to compute a break-even point")
    return (plan.cost_per_gb / KB_PER_GB) / value.dollars_per_ms


def value_from_study(revenue_per_event: float, fraction_change: float, delay_ms: float, name: str = "study") -> ValueEstimate:
    """Value of time implied by an A/B delay study.

    A study that adds ``delay_ms`` of latency and observes a relative
    revenue change of ``fraction_change`` on ``revenue_per_event`` dollars
    implies a dollars-per-hour value of saved latency.
    """
    if delay_ms <= 0.0:
        raise ValueError("delay_ms must be positive")
    return ValueEstimate(name, revenue_per_event * fraction_change / delay_ms * MS_PER_HOUR)


@dataclass(frozen=True)
class CostEffectiveness:
    ms_per_kb: float
    benchmark_ms_per_kb: float
    worthwhile: bool


def cost_effectiveness(
    savings_ms: float, extra_bytes: float, benchmark_ms_per_kb: float = DEFAULT_BENCHMARK_MS_PER_KB
) -> CostEffectiveness:
    """Latency saved per KB of extra traffic, judged against a benchmark."""
    if extra_bytes <= 0.0:
        raise ValueError("extra_bytes must be positive")
    ms_per_kb = savings_ms * 1024.0 / extra_bytes
    return CostEffectiveness(ms_per_kb, benchmark_ms_per_kb, ms_per_kb >= benchmark_ms_per_kb)


def table(plans, values) -> list[tuple[CostPlan, list[float]]]:
    """Break-even matrix: one row per plan, one column per value estimate."""
    return [(plan, [break_even(plan, value) for value in values]) for plan in plans]


# Bundled price table (providers' advertised prices, December 2012).
DEFAULT_PLANS = (
    CostPlan("AWS 3-tier web app, common customer profile", 3.68),
    CostPlan("Amazon Route 53 DNS, 0.5 KB/query", 1.05),
    CostPlan("NearlyFreeSpeech.net small-volume hosting", 1.00),
    CostPlan("Amazon CloudFront US, 1 KB/object", 0.91),
    CostPlan("NearlyFreeSpeech.net large-volume hosting", 0.20),
    CostPlan("Amazon CloudFront US, 10 KB/object", 0.20),
    CostPlan("Amazon EC2 / Microsoft Azure bandwidth only", 0.12),
    CostPlan("MaxCDN starter-plan overage", 0.07),
    CostPlan("DreamHost cloud storage object delivery", 0.07),
    CostPlan("AT&T low-volume cell plan overage", 61.40),
    CostPlan("AT&T high-volume cell plan overage", 10.00),
    CostPlan("O2 mobile broadband 1GB->2GB increment", 5.10),
    CostPlan("AT&T DSL", 0.20),
)

DEFAULT_VALUES = (
    ValueEstimate("server_side", 0.76),
    ValueEstimate("client_side", 23.73),
)


def load_plans(path) -> tuple[CostPlan, ...]:
    """Plans from a JSON file: [{"name": ..., "cost_per_gb": ...}, ...]."""
    with open(path) as fh:
        raw = json.load(fh)
    return tuple(CostPlan(entry["name"], float(entry["cost_per_gb"])) for entry in raw)


def load_values(path) -> tuple[ValueEstimate, ...]:
    """Value estimates from a JSON file: [{"name": ..., "dollars_per_hour": ...}, ...]."""
    with open(path) as fh:
        raw = json.load(fh)
    return tuple(ValueEstimate(entry["name"], float(entry["dollars_per_hour"])) for entry in raw)
