"""Replicated DNS probing client: single trials, ranking, and campaigns.

A trial sends identical queries to k resolvers concurrently and records the
latency of the first response that parses as a valid answer.  Queries with
no valid response within the timeout are treated as lost and recorded at
the 2000 ms cap.
"""

from __future__ import annotations

import csv
import ipaddress
import selectors
import socket
import time
from dataclasses import dataclass

import numpy as np

from . import wire

__all__ = [
    "LOSS_MS",
    "ResolverSpec",
    "TrialRecord",
    "ProbeError",
    "probe_once",
    "rank_resolvers",
    "RankingResult",
    "run_campaign",
    "save_trials",
    "load_trials",
    "parse_resolver_line",
    "load_resolvers",
]

LOSS_MS = 2000.0
DEFAULT_TIMEOUT_MS = 2000.0
DEFAULT_GAP_S = 5.0


class ProbeError(OSError):
    """Socket setup or send failure: an operational error, not query loss."""


@dataclass(frozen=True)
class ResolverSpec:
    label: str
    host: str
    port: int = 53

    def __post_init__(self):
        ipaddress.ip_address(self.host)  # raises ValueError on malformed address
        if not 0 < self.port < 65536:
            raise ValueError(f"port out of range: {self.port}")

    @property
    def address(self) -> tuple[str, int]:
        return (self.host, self.port)


@dataclass(frozen=True)
class TrialRecord:
    timestamp: float
    name: str
    strategy: str  # "single:<rank index>" or "parallel:<m>"
    latency_ms: float
    lost: bool


def parse_resolver_line(line: str) -> ResolverSpec:
    """One resolver per line: ``label,ip:port`` (port optional, default 53)."""
    label, sep, addr = line.strip().partition(",")
    if not sep:
        raise ValueError(f"malformed resolver line {line!r} (expected 'label,ip:port')")
    host, sep, port = addr.partition(":")
    return ResolverSpec(label.strip(), host.strip(), int(port) if sep else 53)


def load_resolvers(path) -> list[ResolverSpec]:
    with open(path) as fh:
        return [parse_resolver_line(line) for line in fh if line.strip() and not line.startswith("#")]


def probe_once(
    name: str,
    resolvers,
    timeout_ms: float = DEFAULT_TIMEOUT_MS,
    rng: np.random.Generator | None = None,
    strategy: str | None = None,
    diagnostics: dict | None = None,
) -> TrialRecord:
    """Query all resolvers concurrently; first valid answer wins.

    Late responses never affect the latency; when ``diagnostics`` is given,
    extra valid answers already queued at win time are counted under
    ``late_valid``.
    """
    if not resolvers:
        raise ValueError("at least one resolver is required")
    if not wire.is_valid_name(name):
        raise ValueError(f"syntactically invalid domain name {name!r}")
    rng = rng if rng is not None else np.random.default_rng()
    strategy = strategy if strategy is not None else f"parallel:{len(resolvers)}"

    txids = [int(t) for t in rng.integers(0, 1 << 16, size=len(resolvers))]
    sel = selectors.DefaultSelector()
    socks: list[socket.socket] = []
    timestamp = time.time()
    try:
        try:
            for spec, txid in zip(resolvers, txids):
                s = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
                socks.append(s)
                s.setblocking(False)
                s.connect(spec.address)
                sel.register(s, selectors.EVENT_READ, data=txid)
            start = time.monotonic()
            for s, (spec, txid) in zip(socks, zip(resolvers, txids)):
                s.send(wire.build_query(txid, name))
        except OSError as exc:
            raise ProbeError(f"socket setup failed: {exc}") from exc

        deadline = start + timeout_ms / 1000.0
        latency_ms = None
        alive = len(socks)
        while latency_ms is None and alive > 0:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                break
            for key, _ in sel.select(remaining):
                try:
                    data = key.fileobj.recv(4096)
                except ConnectionRefusedError:
                    sel.unregister(key.fileobj)
                    alive -= 1
                    continue
                except BlockingIOError:
                    continue
                if wire.is_valid_answer(data, key.data):
                    if latency_ms is None:
                        latency_ms = (time.monotonic() - start) * 1000.0
                    elif diagnostics is not None:
                        diagnostics["late_valid"] = diagnostics.get("late_valid", 0) + 1
        if latency_ms is None or latency_ms >= timeout_ms:
            return TrialRecord(timestamp, name, strategy, LOSS_MS, True)
        return TrialRecord(timestamp, name, strategy, min(latency_ms, LOSS_MS), False)
    finally:
        sel.close()
        for s in socks:
            s.close()


@dataclass(frozen=True)
class RankingResult:
    order: tuple[ResolverSpec, ...]  # best (lowest mean latency) first
    mean_ms: dict[str, float]  # by resolver label; losses counted at 2000 ms
    trials: tuple[TrialRecord, ...]


def rank_resolvers(
    resolvers,
    names,
    n_trials: int,
    gap_s: float = DEFAULT_GAP_S,
    timeout_ms: float = DEFAULT_TIMEOUT_MS,
    rng: np.random.Generator | None = None,
    sleeper=time.sleep,
) -> RankingResult:
    """Stage 1: rank resolvers by mean latency from random single-server probes."""
    if not resolvers:
        raise ValueError("at least one resolver is required")
    if not names:
        raise ValueError("name corpus must be nonempty")
    rng = rng if rng is not None else np.random.default_rng()

    trials: list[TrialRecord] = []
    latencies: dict[str, list[float]] = {spec.label: [] for spec in resolvers}
    for t in range(n_trials):
        idx = int(rng.integers(len(resolvers)))
        name = names[int(rng.integers(len(names)))]
        rec = probe_once(name, [resolvers[idx]], timeout_ms, rng, strategy=f"single:{idx}")
        trials.append(rec)
        latencies[resolvers[idx].label].append(rec.latency_ms)
        if gap_s > 0 and t + 1 < n_trials:
            sleeper(gap_s)

    # Never-probed resolvers rank last.
    means = {
        label: (sum(v) / len(v) if v else float("inf")) for label, v in latencies.items()
    }
    order = tuple(sorted(resolvers, key=lambda spec: means[spec.label]))
    return RankingResult(order, means, tuple(trials))


def run_campaign(
    ranked_resolvers,
    names,
    n_trials: int,
    gap_s: float = DEFAULT_GAP_S,
    timeout_ms: float = DEFAULT_TIMEOUT_MS,
    rng: np.random.Generator | None = None,
    sleeper=time.sleep,
    diagnostics: dict | None = None,
) -> list[TrialRecord]:
    """Stage 2: uniform choice among 2R strategies per trial.

    With R ranked resolvers the strategies are the R individual resolvers
    plus parallel(m) over the top m for m = 1..R.
    """
    ranked = list(ranked_resolvers)
    if not ranked:
        raise ValueError("at least one ranked resolver is required")
    rng = rng if rng is not None else np.random.default_rng()
    r = len(ranked)

    trials: list[TrialRecord] = []
    for t in range(n_trials):
        name = names[int(rng.integers(len(names)))]
        pick = int(rng.integers(2 * r))
        if pick < r:
            targets, strategy = [ranked[pick]], f"single:{pick}"
        else:
            m = pick - r + 1
            targets, strategy = ranked[:m], f"parallel:{m}"
        trials.append(probe_once(name, targets, timeout_ms, rng, strategy, diagnostics))
        if gap_s > 0 and t + 1 < n_trials:
            sleeper(gap_s)
    return trials


_CSV_HEADER = ["timestamp", "name", "strategy", "latency_ms", "lost"]


def save_trials(path, trials):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for t in trials:
            writer.writerow([f"{t.timestamp:.6f}", t.name, t.strategy, f"{t.latency_ms:.3f}", int(t.lost)])


def load_trials(path) -> list[TrialRecord]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.append(
                TrialRecord(
                    float(row["timestamp"]),
                    row["name"],
                    row["strategy"],
                    float(row["latency_ms"]),
                    bool(int(row["lost"])),
                )
            )
    return out
