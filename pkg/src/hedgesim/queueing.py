"""Simulation of N FIFO servers with Poisson arrivals and k-way replication.

Model: requests arrive system-wide as a Poisson process with rate
N * base_load per service unit.  Each request is copied to k distinct
servers chosen uniformly at random; every copy enqueues FIFO and runs to
completion (no cancellation), with an independent service draw per copy.
The request's response time is the earliest copy completion minus the
arrival epoch, plus a fixed client-side overhead when k >= 2.

Because queues are FIFO and copies are never cancelled, each server's
completion times follow the Lindley recursion
    finish_j = max(arrival_j, finish_{j-1}) + service_j,
which this module evaluates vectorized per server (cumsum + running max)
rather than with an event heap.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from .distributions import ServiceDistribution

__all__ = [
    "SimConfig",
    "SimResult",
    "PairedResult",
    "run_simulation",
    "paired_comparison",
    "paired_delta_batch",
    "response_cdf",
]

DEFAULT_QUANTILES = (0.5, 0.9, 0.99, 0.999)

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class SimConfig:
    """One replicated-queueing experiment.

    base_load is the per-server utilization contributed by unreplicated
    arrivals; replication multiplies the per-server arrival rate by k.
    """

    n_servers: int
    replication: int
    base_load: float
    service: ServiceDistribution
    client_overhead: float = 0.0
    n_requests: int = 100_000
    warmup_fraction: float = 0.2
    seed: int = 0
    n_replications: int = 10
    quantile_levels: tuple[float, ...] = DEFAULT_QUANTILES

    def __post_init__(self):
        if self.n_servers < 1:
            raise ValueError(f"n_servers must be at least 1, got {self.n_servers}")
        if not 1 <= self.replication <= self.n_servers:
            raise ValueError(
                f"replication factor {self.replication} must lie in [1, n_servers={self.n_servers}]"
            )
        if not self.base_load > 0.0:
            raise ValueError(f"base_load must be positive, got {self.base_load}")
        if self.replication * self.base_load >= 1.0:
            raise ValueError(
                f"unstable configuration: k * load = {self.replication * self.base_load:g} >= 1"
            )
        if self.client_overhead < 0.0:
            raise ValueError("client_overhead must be nonnegative")
        if self.n_requests < 1:
            raise ValueError("n_requests must be at least 1")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ValueError("warmup_fraction must lie in [0, 1)")
        if self.n_replications < 1:
            raise ValueError("n_replications must be at least 1")

    @property
    def warmup_requests(self) -> int:
        return int(self.warmup_fraction * self.n_requests)


@dataclass(frozen=True)
class SimResult:
    """Response-time statistics plus the pooled post-warmup sample."""

    mean: float
    half_width: float
    quantiles: dict[float, float]
    n_measured: int
    n_arrivals: int
    n_replica_completions: int
    responses: np.ndarray = field(repr=False, compare=False)  # sorted

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "half_width": None if math.isinf(self.half_width) else self.half_width,
            "quantiles": {str(q): v for q, v in self.quantiles.items()},
            "n_measured": self.n_measured,
            "n_arrivals": self.n_arrivals,
            "n_replica_completions": self.n_replica_completions,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class PairedResult:
    """Common-random-number comparison of a base and a replicated system."""

    base: SimResult
    replicated: SimResult
    delta_mean: float
    delta_half_width: float
    deltas: tuple[float, ...]


def _streams(entropy: tuple[int, ...], rep_index: int):
    """Child RNG streams (arrival, primary system, secondary system).

    Derivation is a pure function of (entropy, rep_index), so replications
    can run in any order or in parallel with identical results.
    """
    ss = np.random.SeedSequence([e & _SEED_MASK for e in entropy] + [rep_index])
    return tuple(np.random.default_rng(child) for child in ss.spawn(3))


def _draw_arrivals(rng: np.random.Generator, config: SimConfig) -> np.ndarray:
    rate = config.n_servers * config.base_load
    return np.cumsum(rng.exponential(1.0 / rate, size=config.n_requests))


def _choose_servers(rng: np.random.Generator, n: int, n_servers: int, k: int) -> np.ndarray:
    """k distinct servers per request, uniform without replacement."""
    choices = np.empty((n, k), dtype=np.int64)
    for j in range(k):
        r = rng.integers(0, n_servers - j, size=n)
        # Shift past already-chosen indices, in ascending order.
        prev = np.sort(choices[:, :j], axis=1)
        for jj in range(j):
            r += r >= prev[:, jj]
        choices[:, j] = r
    return choices


def _simulate_responses(
    arrivals: np.ndarray,
    n_servers: int,
    k: int,
    service: ServiceDistribution,
    rng: np.random.Generator,
) -> np.ndarray:
    """Response times (earliest copy completion - arrival), no overhead."""
    n = arrivals.size
    choices = _choose_servers(rng, n, n_servers, k)
    services = np.asarray(service.sample(rng, size=(n, k)), dtype=float)

    flat_server = choices.ravel()
    flat_arrival = np.repeat(arrivals, k)
    flat_service = services.ravel()

    # Stable sort groups copies by server while preserving arrival order.
    order = np.argsort(flat_server, kind="stable")
    srv_sorted = flat_server[order]
    arr_sorted = flat_arrival[order]
    svc_sorted = flat_service[order]

    fin_sorted = np.empty_like(arr_sorted)
    bounds = np.flatnonzero(np.diff(srv_sorted)) + 1
    starts = np.concatenate(([0], bounds))
    ends = np.concatenate((bounds, [srv_sorted.size]))
    for s, e in zip(starts, ends):
        svc = svc_sorted[s:e]
        cum = np.cumsum(svc)
        # finish_j = cum_j + max_{i<=j} (arrival_i - cum_{i-1})
        fin_sorted[s:e] = cum + np.maximum.accumulate(arr_sorted[s:e] - (cum - svc))

    finish = np.empty_like(fin_sorted)
    finish[order] = fin_sorted
    return finish.reshape(n, k).min(axis=1) - arrivals


def _measured_responses(config: SimConfig, arrivals: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    responses = _simulate_responses(
        arrivals, config.n_servers, config.replication, config.service, rng
    )
    if config.replication >= 2 and config.client_overhead > 0.0:
        responses = responses + config.client_overhead
    return responses[config.warmup_requests :]


def _t_half_width(values: np.ndarray, confidence: float = 0.95) -> float:
    if values.size < 2:
        return math.inf
    sd = float(values.std(ddof=1))
    crit = stats.t.ppf(0.5 + confidence / 2.0, values.size - 1)
    return float(crit * sd / math.sqrt(values.size))


def run_simulation(config: SimConfig, arrival_times=None) -> SimResult:
    """Run ``n_replications`` independent replications and pool statistics.

    ``arrival_times`` (test mode) overrides the Poisson arrival epochs with
    an explicit sorted array, used identically in every replication.
    """
    if arrival_times is not None:
        arrival_times = np.asarray(arrival_times, dtype=float)
        if arrival_times.ndim != 1 or arrival_times.size != config.n_requests:
            raise ValueError("arrival_times must be a 1-d array of length n_requests")
        if np.any(np.diff(arrival_times) < 0.0) or arrival_times[0] < 0.0:
            raise ValueError("arrival_times must be nonnegative and sorted")

    rep_means = np.empty(config.n_replications)
    pooled = []
    for i in range(config.n_replications):
        arrival_rng, system_rng, _ = _streams((config.seed,), i)
        arrivals = arrival_times if arrival_times is not None else _draw_arrivals(arrival_rng, config)
        measured = _measured_responses(config, arrivals, system_rng)
        rep_means[i] = measured.mean()
        pooled.append(measured)

    sample = np.sort(np.concatenate(pooled))
    quantiles = {
        q: float(np.quantile(sample, q, method="inverted_cdf")) for q in config.quantile_levels
    }
    n_arrivals = config.n_requests * config.n_replications
    return SimResult(
        mean=float(rep_means.mean()),
        half_width=_t_half_width(rep_means),
        quantiles=quantiles,
        n_measured=sample.size,
        n_arrivals=n_arrivals,
        n_replica_completions=n_arrivals * config.replication,
        responses=sample,
    )


def _check_paired_configs(base: SimConfig, replicated: SimConfig):
    if base.replication != 1:
        raise ValueError("base configuration must have replication factor 1")
    if replicated.replication < 2:
        raise ValueError("replicated configuration must have replication factor >= 2")
    for attr in ("n_servers", "base_load", "service", "n_requests", "warmup_fraction", "seed", "n_replications"):
        if getattr(base, attr) != getattr(replicated, attr):
            raise ValueError(f"paired configurations must agree on {attr}")


def paired_delta_batch(
    base: SimConfig,
    replicated: SimConfig,
    rep_indices,
    entropy: tuple[int, ...] | None = None,
) -> np.ndarray:
    """Per-replication (mean_rep - mean_base) on shared arrival streams.

    Replication ``i`` is a pure function of (entropy, i): batches extend an
    earlier run without recomputing it.
    """
    _check_paired_configs(base, replicated)
    entropy = entropy if entropy is not None else (base.seed,)
    deltas = np.empty(len(rep_indices))
    for pos, i in enumerate(rep_indices):
        arrival_rng, base_rng, rep_rng = _streams(entropy, i)
        arrivals = _draw_arrivals(arrival_rng, base)
        mean_base = _measured_responses(base, arrivals, base_rng).mean()
        mean_rep = _measured_responses(replicated, arrivals, rep_rng).mean()
        deltas[pos] = mean_rep - mean_base
    return deltas


def paired_comparison(base: SimConfig, replicated: SimConfig) -> PairedResult:
    """Run both systems on common arrival epochs (service draws independent).

    The base side reuses the primary system stream, so it is bit-identical
    to ``run_simulation(base)``.
    """
    _check_paired_configs(base, replicated)
    n_rep = base.n_replications
    base_means = np.empty(n_rep)
    rep_means = np.empty(n_rep)
    base_pool, rep_pool = [], []
    for i in range(n_rep):
        arrival_rng, base_rng, rep_rng = _streams((base.seed,), i)
        arrivals = _draw_arrivals(arrival_rng, base)
        mb = _measured_responses(base, arrivals, base_rng)
        mr = _measured_responses(replicated, arrivals, rep_rng)
        base_means[i] = mb.mean()
        rep_means[i] = mr.mean()
        base_pool.append(mb)
        rep_pool.append(mr)

    def _assemble(config: SimConfig, means: np.ndarray, pool) -> SimResult:
        sample = np.sort(np.concatenate(pool))
        n_arr = config.n_requests * config.n_replications
        return SimResult(
            mean=float(means.mean()),
            half_width=_t_half_width(means),
            quantiles={
                q: float(np.quantile(sample, q, method="inverted_cdf"))
                for q in config.quantile_levels
            },
            n_measured=sample.size,
            n_arrivals=n_arr,
            n_replica_completions=n_arr * config.replication,
            responses=sample,
        )

    deltas = rep_means - base_means
    return PairedResult(
        base=_assemble(base, base_means, base_pool),
        replicated=_assemble(replicated, rep_means, rep_pool),
        delta_mean=float(deltas.mean()),
        delta_half_width=_t_half_width(deltas),
        deltas=tuple(float(d) for d in deltas),
    )


def response_cdf(result: SimResult, grid) -> np.ndarray:
    """Empirical P(response <= t) at each grid point (grid sorted ascending)."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) < 0.0):
        raise ValueError("grid must be a 1-d ascending sequence of times")
    return np.searchsorted(result.responses, grid, side="right") / result.n_measured


def make_replicated(base: SimConfig, k: int, overhead: float = 0.0) -> SimConfig:
    """The k-way counterpart of a base (k=1) configuration."""
    return replace(base, replication=k, client_overhead=overhead)
