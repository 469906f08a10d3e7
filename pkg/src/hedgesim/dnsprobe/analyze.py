"""First-response statistics and marginal cost-effectiveness of a trial log.

The analyzer is a pure function of the persisted trials, so any report can
be reproduced from the CSV alone.  Strategies with no trials are reported
as absent rather than zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..econ import DEFAULT_BENCHMARK_MS_PER_KB

__all__ = ["StrategyStats", "MarginalStep", "DnsReport", "analyze"]

#: Default bytes of added traffic per extra query copy.
DEFAULT_BYTES_PER_COPY = 500.0


@dataclass(frozen=True)
class StrategyStats:
    strategy: str
    n: int
    mean_ms: float
    frac_over_500: float
    frac_over_1500: float


@dataclass(frozen=True)
class MarginalStep:
    m: int  # going from m-1 to m resolvers
    saving_ms: float
    ms_per_kb: float
    worthwhile: bool


def _ratio(base: float, other: float) -> float:
    """Reduction factor base/other with 0/0 -> 1 and x/0 -> inf."""
    if other == 0.0:
        return 1.0 if base == 0.0 else math.inf
    return base / other


@dataclass(frozen=True)
class DnsReport:
    strategies: dict[str, StrategyStats]
    best_single_fixed: str | None  # stage-1 winner: "single:0"
    best_single_retrospect: str | None  # lowest-mean single in this log
    reduction_vs_fixed_pct: dict[int, float]  # parallel m -> % mean reduction
    reduction_vs_retrospect_pct: dict[int, float]
    frac_500_reduction: float | None  # best single vs widest parallel
    frac_1500_reduction: float | None
    marginal: tuple[MarginalStep, ...]
    bytes_per_extra_copy: float
    benchmark_ms_per_kb: float

    def to_dict(self) -> dict:
        def _num(x):
            return None if x is None or math.isinf(x) else x

        return {
            "strategies": {
                k: {
                    "n": s.n,
                    "mean_ms": s.mean_ms,
                    "frac_over_500": s.frac_over_500,
                    "frac_over_1500": s.frac_over_1500,
                }
                for k, s in sorted(self.strategies.items())
            },
            "best_single_fixed": self.best_single_fixed,
            "best_single_retrospect": self.best_single_retrospect,
            "reduction_vs_fixed_pct": {str(m): v for m, v in self.reduction_vs_fixed_pct.items()},
            "reduction_vs_retrospect_pct": {
                str(m): v for m, v in self.reduction_vs_retrospect_pct.items()
            },
            "frac_500_reduction": _num(self.frac_500_reduction),
            "frac_1500_reduction": _num(self.frac_1500_reduction),
            "marginal": [
                {
                    "m": step.m,
                    "saving_ms": step.saving_ms,
                    "ms_per_kb": step.ms_per_kb,
                    "worthwhile": step.worthwhile,
                }
                for step in self.marginal
            ],
            "bytes_per_extra_copy": self.bytes_per_extra_copy,
            "benchmark_ms_per_kb": self.benchmark_ms_per_kb,
        }


def analyze(
    trials,
    bytes_per_extra_copy: float = DEFAULT_BYTES_PER_COPY,
    benchmark_ms_per_kb: float = DEFAULT_BENCHMARK_MS_PER_KB,
) -> DnsReport:
    """Per-strategy statistics, reductions vs the best single server, and
    the marginal saving (and ms/KB) of each extra resolver."""
    if not trials:
        raise ValueError("trial log is empty")

    by_strategy: dict[str, list[float]] = {}
    for t in trials:
        by_strategy.setdefault(t.strategy, []).append(t.latency_ms)

    stats = {
        key: StrategyStats(
            strategy=key,
            n=len(vals),
            mean_ms=sum(vals) / len(vals),
            frac_over_500=sum(v > 500.0 for v in vals) / len(vals),
            frac_over_1500=sum(v > 1500.0 for v in vals) / len(vals),
        )
        for key, vals in by_strategy.items()
    }

    singles = {k: s for k, s in stats.items() if k.startswith("single:")}
    parallels = {
        int(k.split(":", 1)[1]): s for k, s in stats.items() if k.startswith("parallel:")
    }

    best_fixed = "single:0" if "single:0" in singles else None
    best_retro = min(singles, key=lambda k: singles[k].mean_ms) if singles else None

    def reductions(baseline_key):
        if baseline_key is None:
            return {}
        base = stats[baseline_key].mean_ms
        if base == 0.0:
            return {m: 0.0 for m in sorted(parallels)}
        return {m: (base - s.mean_ms) / base * 100.0 for m, s in sorted(parallels.items())}

    frac_500 = frac_1500 = None
    if best_fixed is not None and parallels:
        widest = parallels[max(parallels)]
        frac_500 = _ratio(stats[best_fixed].frac_over_500, widest.frac_over_500)
        frac_1500 = _ratio(stats[best_fixed].frac_over_1500, widest.frac_over_1500)

    marginal = []
    for m in sorted(parallels):
        if m - 1 in parallels:
            saving = parallels[m - 1].mean_ms - parallels[m].mean_ms
            ms_per_kb = saving * 1024.0 / bytes_per_extra_copy
            marginal.append(MarginalStep(m, saving, ms_per_kb, ms_per_kb >= benchmark_ms_per_kb))

    return DnsReport(
        strategies=stats,
        best_single_fixed=best_fixed,
        best_single_retrospect=best_retro,
        reduction_vs_fixed_pct=reductions(best_fixed),
        reduction_vs_retrospect_pct=reductions(best_retro),
        frac_500_reduction=frac_500,
        frac_1500_reduction=frac_1500,
        marginal=tuple(marginal),
        bytes_per_extra_copy=bytes_per_extra_copy,
        benchmark_ms_per_kb=benchmark_ms_per_kb,
    )
