"""Threshold-load estimation and the sweep studies built on it.

The threshold load is the largest per-server base utilization below which
k-way replication still reduces mean response time.  It is located by
bisection on the sign of the paired mean difference; each probe adds
replications until the sign is resolved at the requested confidence or a
budget is hit, and the bracketing evidence is returned alongside the
estimate rather than discarded.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .distributions import Scheme, ServiceDistribution, sample_random_unit_mean
from .queueing import SimConfig, paired_delta_batch

__all__ = [
    "SearchSettings",
    "ProbeRecord",
    "ThresholdEstimate",
    "find_threshold",
    "variance_sweep",
    "random_distribution_study",
    "threshold_vs_n",
    "tail_improvement_check",
    "overhead_sweep",
]


@dataclass(frozen=True)
class SearchSettings:
    """Simulation budgets and stopping rules for one threshold search."""

    n_requests: int = 100_000
    warmup_fraction: float = 0.2
    n_replications: int = 12  # initial batch per probe
    max_replications: int = 48
    confidence: float = 0.95
    tol: float = 0.01  # final bracket width
    lo: float = 0.02  # smallest probed load
    max_probes: int = 16

    def scaled(self, **overrides) -> "SearchSettings":
        return replace(self, **overrides)


#: Cheaper budget used for large studies (hundreds of searches).
STUDY_SETTINGS = SearchSettings(
    n_requests=40_000, n_replications=8, max_replications=32, tol=0.008
)


@dataclass(frozen=True)
class ProbeRecord:
    load: float
    delta_mean: float
    half_width: float
    n_replications: int
    resolved: bool


@dataclass(frozen=True)
class ThresholdEstimate:
    threshold: float
    half_width: float
    n_probes: int
    evidence: tuple[ProbeRecord, ...]
    converged: bool

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "half_width": self.half_width,
            "n_probes": self.n_probes,
            "converged": self.converged,
            "evidence": [
                {
                    "load": p.load,
                    "delta_mean": p.delta_mean,
                    "half_width": p.half_width,
                    "n_replications": p.n_replications,
                    "resolved": p.resolved,
                }
                for p in self.evidence
            ],
        }


def _probe(
    service: ServiceDistribution,
    k: int,
    n_servers: int,
    overhead: float,
    load: float,
    settings: SearchSettings,
    seed: int,
    probe_index: int,
) -> ProbeRecord:
    """Estimate sign(delta mean) at one load, adding replications as needed."""
    base = SimConfig(
        n_servers=n_servers,
        replication=1,
        base_load=load,
        service=service,
        n_requests=settings.n_requests,
        warmup_fraction=settings.warmup_fraction,
        seed=seed,
    )
    rep = replace(base, replication=k, client_overhead=overhead)
    entropy = (seed, probe_index)
    deltas = paired_delta_batch(base, rep, range(settings.n_replications), entropy)
    while True:
        mean = float(deltas.mean())
        crit = stats.t.ppf(0.5 + settings.confidence / 2.0, deltas.size - 1)
        half_width = float(crit * deltas.std(ddof=1) / math.sqrt(deltas.size))
        if abs(mean) > half_width or deltas.size >= settings.max_replications:
            break
        batch = range(deltas.size, min(deltas.size + settings.n_replications, settings.max_replications))
        deltas = np.concatenate([deltas, paired_delta_batch(base, rep, batch, entropy)])
    return ProbeRecord(load, mean, half_width, deltas.size, resolved=abs(mean) > half_width)


def find_threshold(
    service: ServiceDistribution,
    k: int = 2,
    n_servers: int = 20,
    overhead: float = 0.0,
    settings: SearchSettings = SearchSettings(),
    seed: int = 0,
) -> ThresholdEstimate:
    """Bisect on the sign of the paired mean difference over load.

    Returns threshold 0 (with the probe as evidence) when replication
    already hurts at the smallest probed load.  The estimate is the final
    bracket midpoint and the half-width is half the bracket, so
    threshold + half_width never exceeds the 1/k stability bound.
    """
    if k < 2:
        raise ValueError("threshold search compares k-way replication against none; k must be >= 2")
    evidence: list[ProbeRecord] = []
    probes = 0

    def probe(load: float) -> ProbeRecord:
        nonlocal probes
        rec = _probe(service, k, n_servers, overhead, load, settings, seed, probes)
        probes += 1
        evidence.append(rec)
        return rec

    lo = settings.lo
    hi = (1.0 / k) * (1.0 - 1e-3)
    if k == 2:
        hi = min(hi, 0.499)

    first = probe(lo)
    if first.delta_mean > 0.0:
        return ThresholdEstimate(0.0, lo, probes, tuple(evidence), converged=first.resolved)

    top = probe(hi)
    if top.delta_mean < 0.0:
        # Replication still helps at the edge of the stability region; the
        # crossing is pinned between hi and the 1/k bound.
        limit = 1.0 / k
        return ThresholdEstimate(
            0.5 * (hi + limit), 0.5 * (limit - hi), probes, tuple(evidence), converged=False
        )

    while hi - lo > settings.tol and probes < settings.max_probes:
        mid = 0.5 * (lo + hi)
        rec = probe(mid)
        if rec.delta_mean < 0.0:
            lo = mid
        else:
            hi = mid

    return ThresholdEstimate(
        threshold=0.5 * (lo + hi),
        half_width=0.5 * (hi - lo),
        n_probes=probes,
        evidence=tuple(evidence),
        converged=hi - lo <= settings.tol,
    )


# -- sweep studies ----------------------------------------------------------


_FAMILY_BUILDERS = {
    "pareto": "make_pareto",
    "weibull": "make_weibull",
    "twopoint": "make_two_point",
}

DEFAULT_GRIDS = {
    "pareto": (8.0, 4.0, 3.0, 2.5, 2.1),
    "weibull": (4.0, 2.0, 1.0, 0.6, 0.45),
    "twopoint": (0.0, 0.3, 0.5, 0.7, 0.9),
}


@dataclass(frozen=True)
class SweepPoint:
    param: float
    variance: float
    estimate: ThresholdEstimate


def _build_family_member(family: str, param: float) -> ServiceDistribution:
    from . import distributions

    try:
        builder = getattr(distributions, _FAMILY_BUILDERS[family])
    except KeyError:
        raise ValueError(f"unknown sweep family {family!r} (expected pareto, weibull or twopoint)") from None
    return builder(param)


def _cell_seed(seed: int, *indices: int) -> int:
    """Derive a child seed for a study cell; deterministic in the indices."""
    ss = np.random.SeedSequence([seed & ((1 << 64) - 1), *indices])
    return int(ss.generate_state(1, np.uint64)[0])


def _sweep_cell(args):
    family, param, k, n_servers, settings, seed, index = args
    service = _build_family_member(family, param)
    estimate = find_threshold(service, k, n_servers, 0.0, settings, _cell_seed(seed, index))
    return SweepPoint(param, service.moments().variance, estimate)


def variance_sweep(
    family: str,
    grid=None,
    k: int = 2,
    n_servers: int = 20,
    settings: SearchSettings = SearchSettings(),
    seed: int = 0,
    jobs: int = 1,
) -> list[SweepPoint]:
    """Threshold estimates across one family's parameter grid.

    Grid points with infinite variance are allowed; the variance column
    records inf for them.
    """
    grid = DEFAULT_GRIDS[family] if grid is None else tuple(grid)
    tasks = [(family, p, k, n_servers, settings, seed, i) for i, p in enumerate(grid)]
    return _run_tasks(_sweep_cell, tasks, jobs)


@dataclass(frozen=True)
class StudyCell:
    support_size: int
    scheme: Scheme
    thresholds: tuple[float, ...]
    half_widths: tuple[float, ...]

    @property
    def min_threshold(self) -> float:
        return min(self.thresholds)

    @property
    def max_threshold(self) -> float:
        return max(self.thresholds)


def _study_sample(args):
    support_size, scheme, k, n_servers, settings, seed, cell_idx, sample_idx = args
    dist_rng = np.random.default_rng(np.random.SeedSequence([seed, cell_idx, sample_idx, 0xD15]))
    service = sample_random_unit_mean(support_size, scheme, dist_rng)
    est = find_threshold(
        service, k, n_servers, 0.0, settings, _cell_seed(seed, cell_idx, sample_idx)
    )
    return est.threshold, est.half_width


def random_distribution_study(
    support_sizes=(2, 5, 10),
    schemes=(Scheme.UNIFORM_SIMPLEX, Scheme.DIRICHLET01),
    n_samples: int = 200,
    k: int = 2,
    n_servers: int = 20,
    settings: SearchSettings = STUDY_SETTINGS,
    seed: int = 0,
    jobs: int = 1,
) -> list[StudyCell]:
    """Thresholds of randomly sampled discrete unit-mean distributions.

    For each (support size, scheme) cell, ``n_samples`` distributions are
    drawn and searched; the cell records all thresholds plus the min/max.
    Fully reproducible from the master seed regardless of worker order.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    schemes = [Scheme(s) for s in schemes]
    cells = []
    for cell_idx, (n_sup, scheme) in enumerate(
        (n_sup, scheme) for n_sup in support_sizes for scheme in schemes
    ):
        tasks = [
            (n_sup, scheme, k, n_servers, settings, seed, cell_idx, j) for j in range(n_samples)
        ]
        results = _run_tasks(_study_sample, tasks, jobs)
        cells.append(
            StudyCell(
                support_size=n_sup,
                scheme=scheme,
                thresholds=tuple(r[0] for r in results),
                half_widths=tuple(r[1] for r in results),
            )
        )
    return cells


@dataclass(frozen=True)
class ScalingPoint:
    n_servers: int
    estimate: ThresholdEstimate
    reference: float
    relative_deviation: float


def threshold_vs_n(
    service: ServiceDistribution,
    k: int = 2,
    n_list=(4, 10, 20, 40),
    settings: SearchSettings = SearchSettings(),
    seed: int = 0,
    jobs: int = 1,
    reference: float | None = None,
) -> list[ScalingPoint]:
    """Threshold estimates across pool sizes, with deviation from a reference.

    The reference is the exact 1/3 for exponential service; otherwise the
    estimate at the largest N (40 by default) stands in for the large-N
    limit.
    """
    n_list = sorted(set(int(n) for n in n_list))
    if any(n < k for n in n_list):
        raise ValueError("every pool size must be at least the replication factor")

    ref_n = max(n_list + [40]) if reference is None else None
    run_ns = list(n_list)
    if reference is None and ref_n not in run_ns:
        run_ns.append(ref_n)

    tasks = [
        (service, k, n, settings, seed, i) for i, n in enumerate(run_ns)
    ]
    estimates = dict(zip(run_ns, _run_tasks(_scaling_cell, tasks, jobs)))

    if reference is None:
        from .distributions import Family

        if service.family is Family.EXPONENTIAL:
            reference = 1.0 / 3.0
        else:
            reference = estimates[ref_n].threshold
    return [
        ScalingPoint(n, estimates[n], reference, (estimates[n].threshold - reference) / reference)
        for n in n_list
    ]


def _scaling_cell(args):
    service, k, n, settings, seed, index = args
    return find_threshold(service, k, n, 0.0, settings, _cell_seed(seed, index))


@dataclass(frozen=True)
class QuantileComparison:
    level: float
    base: float
    base_lo: float
    base_hi: float
    replicated: float
    replicated_lo: float
    replicated_hi: float

    @property
    def improved(self) -> bool:
        """Replicated quantile below baseline beyond the interval overlap."""
        return self.replicated_hi < self.base_lo


@dataclass(frozen=True)
class TailCheckResult:
    ok: bool
    levels: tuple[QuantileComparison, ...]


def _quantile_interval(sorted_sample: np.ndarray, level: float, alpha: float = 0.02):
    """Order-statistic confidence interval for one quantile."""
    n = sorted_sample.size
    point = float(np.quantile(sorted_sample, level, method="inverted_cdf"))
    lo_idx = int(stats.binom.ppf(alpha / 2.0, n, level))
    hi_idx = int(stats.binom.ppf(1.0 - alpha / 2.0, n, level))
    lo = float(sorted_sample[max(lo_idx - 1, 0)])
    hi = float(sorted_sample[min(hi_idx, n - 1)])
    return point, lo, hi


def tail_improvement_check(
    service: ServiceDistribution,
    load: float,
    percentile: float,
    k: int = 2,
    n_servers: int = 20,
    settings: SearchSettings = SearchSettings(),
    seed: int = 0,
) -> TailCheckResult:
    """True iff the replicated system improves every checked tail quantile.

    Quantiles are compared at {q, (1+q)/2, 0.99, 0.999} with order-statistic
    confidence intervals; "improved" requires the intervals not to overlap.
    """
    if not 0.0 < percentile < 1.0:
        raise ValueError("percentile must lie in (0, 1)")
    from .queueing import paired_comparison

    base = SimConfig(
        n_servers=n_servers,
        replication=1,
        base_load=load,
        service=service,
        n_requests=settings.n_requests,
        warmup_fraction=settings.warmup_fraction,
        seed=seed,
        n_replications=settings.n_replications,
    )
    rep = replace(base, replication=k)
    pair = paired_comparison(base, rep)

    levels = sorted({percentile, (1.0 + percentile) / 2.0, 0.99, 0.999})
    comparisons = []
    for level in levels:
        b, b_lo, b_hi = _quantile_interval(pair.base.responses, level)
        r, r_lo, r_hi = _quantile_interval(pair.replicated.responses, level)
        comparisons.append(QuantileComparison(level, b, b_lo, b_hi, r, r_lo, r_hi))
    return TailCheckResult(ok=all(c.improved for c in comparisons), levels=tuple(comparisons))


@dataclass(frozen=True)
class OverheadCell:
    overhead: float
    load: float
    delta_mean: float
    half_width: float
    n_replications: int


def _overhead_cell(args):
    service, k, n_servers, overhead, load, settings, seed, index = args
    rec = _probe(service, k, n_servers, overhead, load, settings, _cell_seed(seed, index), 0)
    return OverheadCell(overhead, load, rec.delta_mean, rec.half_width, rec.n_replications)


def overhead_sweep(
    service: ServiceDistribution,
    overheads,
    loads,
    k: int = 2,
    n_servers: int = 20,
    settings: SearchSettings = SearchSettings(),
    seed: int = 0,
    jobs: int = 1,
) -> list[OverheadCell]:
    """Paired mean difference per (client overhead, load) cell.

    Overheads are in service units, i.e. fractions of the mean service time.
    """
    overheads = [float(c) for c in overheads]
    loads = [float(r) for r in loads]
    if any(c < 0.0 for c in overheads):
        raise ValueError("overheads must be nonnegative")
    tasks = [
        (service, k, n_servers, c, rho, settings, seed, i)
        for i, (c, rho) in enumerate((c, rho) for c in overheads for rho in loads)
    ]
    return _run_tasks(_overhead_cell, tasks, jobs)


def _run_tasks(fn, tasks, jobs: int):
    """Run cells serially or in a process pool; order of results is fixed."""
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
