"""Idealized 3-packet connection handshake with losses and duplication.

Each packet is delivered after RTT/2 with probability 1-p and lost with
probability p, independently; a lost packet is retransmitted after a
timeout that doubles on every retry (3 s initial for the first two
packets, 3*RTT for the final one).  Sending every packet twice lowers the
effective loss probability from p_single to the measured pair-loss
probability p_dup.  Completion-time distributions are enumerated exactly
up to a per-packet retry cap, with the truncated residual mass reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "HandshakeParams",
    "CompletionDistribution",
    "handshake_distribution",
    "first_order_saving",
    "mean_saving",
    "quantile_saving",
    "simulate_completions",
    "report",
]

DEFAULT_P_SINGLE = 0.0048
DEFAULT_P_DUP = 0.0007


@dataclass(frozen=True)
class HandshakeParams:
    rtt_ms: float
    p_single: float = DEFAULT_P_SINGLE
    p_dup: float = DEFAULT_P_DUP
    syn_rto_ms: float = 3000.0
    synack_rto_ms: float = 3000.0
    backoff_factor: float = 2.0
    max_retries: int = 6

    def __post_init__(self):
        if not self.rtt_ms > 0.0:
            raise ValueError("rtt_ms must be positive")
        if not 0.0 <= self.p_dup <= self.p_single < 1.0:
            raise ValueError("loss probabilities must satisfy 0 <= p_dup <= p_single < 1")
        if self.max_retries < 1:
            raise ValueError("max_retries must be at least 1")
        if self.backoff_factor < 1.0:
            raise ValueError("backoff_factor must be at least 1")

    @property
    def ack_rto_ms(self) -> float:
        return 3.0 * self.rtt_ms

    @property
    def rtos_ms(self) -> tuple[float, float, float]:
        return (self.syn_rto_ms, self.synack_rto_ms, self.ack_rto_ms)

    def loss_probability(self, duplicated: bool) -> float:
        return self.p_dup if duplicated else self.p_single


@dataclass(frozen=True)
class CompletionDistribution:
    """Discrete completion-time law (ms) plus the truncated residual mass."""

    times_ms: np.ndarray  # sorted ascending
    probs: np.ndarray
    residual_mass: float

    @property
    def mean_ms(self) -> float:
        return float(self.times_ms @ self.probs)

    def quantile_ms(self, q: float) -> float:
        if not 0.0 < q < 1.0:
            raise ValueError("quantile level must lie in (0, 1)")
        covered = 1.0 - self.residual_mass
        if q > covered:
            raise ValueError(
                f"quantile {q} falls inside the truncated residual mass "
                f"(resolvable up to {covered}); raise max_retries"
            )
        cum = np.cumsum(self.probs)
        return float(self.times_ms[np.searchsorted(cum, q, side="left")])

    def cdf(self, t_ms) -> np.ndarray:
        t_ms = np.asarray(t_ms, dtype=float)
        cum = np.concatenate(([0.0], np.cumsum(self.probs)))
        return cum[np.searchsorted(self.times_ms, t_ms, side="right")]


def _timeout_sum(rto_ms: float, retries: np.ndarray, backoff: float) -> np.ndarray:
    """Total backed-off timeout before the successful attempt."""
    if backoff == 1.0:
        return rto_ms * retries
    return rto_ms * (backoff**retries - 1.0) / (backoff - 1.0)


def handshake_distribution(params: HandshakeParams, duplicated: bool) -> CompletionDistribution:
    """Exact completion-time law by enumerating per-packet retry counts."""
    p = params.loss_probability(duplicated)
    m = params.max_retries
    retries = np.arange(m + 1)
    masses = p**retries * (1.0 - p)

    per_packet = [
        params.rtt_ms / 2.0 + _timeout_sum(rto, retries, params.backoff_factor)
        for rto in params.rtos_ms
    ]
    total = (
        per_packet[0][:, None, None] + per_packet[1][None, :, None] + per_packet[2][None, None, :]
    ).ravel()
    prob = (masses[:, None, None] * masses[None, :, None] * masses[None, None, :]).ravel()

    times, inverse = np.unique(total, return_inverse=True)
    agg = np.zeros_like(times)
    np.add.at(agg, inverse, prob)
    residual = 1.0 - (1.0 - p ** (m + 1)) ** 3
    return CompletionDistribution(times, agg, residual)


def first_order_saving(params: HandshakeParams) -> float:
    """Leading-order mean saving (ms): sum of initial timeouts times the loss-rate drop."""
    return sum(params.rtos_ms) * (params.p_single - params.p_dup)


def mean_saving(params: HandshakeParams) -> float:
    """Exact-enumeration mean completion-time saving from duplication (ms)."""
    return (
        handshake_distribution(params, duplicated=False).mean_ms
        - handshake_distribution(params, duplicated=True).mean_ms
    )


def quantile_saving(params: HandshakeParams, q: float) -> float:
    """Saving at one completion-time quantile (ms)."""
    undup = handshake_distribution(params, duplicated=False)
    dup = handshake_distribution(params, duplicated=True)
    return undup.quantile_ms(q) - dup.quantile_ms(q)


def simulate_completions(
    params: HandshakeParams, duplicated: bool, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Monte-Carlo completion times (ms), untruncated retry counts."""
    p = params.loss_probability(duplicated)
    out = np.full(n, 1.5 * params.rtt_ms)
    for rto in params.rtos_ms:
        retries = rng.geometric(1.0 - p, size=n) - 1
        out += _timeout_sum(rto, retries, params.backoff_factor)
    return out


def report(params: HandshakeParams, quantiles=(0.5, 0.99, 0.999), reference_tail_saving_ms: float | None = None) -> dict:
    """Summary dict used by the CLI.

    ``reference_tail_saving_ms`` is echoed untouched so an externally
    published tail estimate can be shown side by side with the exact model,
    which resolves tail quantiles differently (see quantile_savings).
    """
    undup = handshake_distribution(params, duplicated=False)
    dup = handshake_distribution(params, duplicated=True)
    out = {
        "rtt_ms": params.rtt_ms,
        "p_single": params.p_single,
        "p_dup": params.p_dup,
        "mean_undup_ms": undup.mean_ms,
        "mean_dup_ms": dup.mean_ms,
        "mean_saving_ms": undup.mean_ms - dup.mean_ms,
        "first_order_saving_ms": first_order_saving(params),
        "quantile_savings_ms": {
            str(q): undup.quantile_ms(q) - dup.quantile_ms(q) for q in quantiles
        },
        "residual_mass_undup": undup.residual_mass,
        "residual_mass_dup": dup.residual_mass,
    }
    if reference_tail_saving_ms is not None:
        out["reference_tail_saving_ms"] = reference_tail_saving_ms
    return out
