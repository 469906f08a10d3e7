"""Mock DNS resolvers for deterministic offline testing.

One process hosts any number of scripted resolvers, each a UDP socket on
loopback with its own seeded delay law, drop probability, and rcode.
Every incoming query is logged (including the delay that was scheduled or
the drop decision), which lets tests compare the client's first-response
latency against each resolver's would-be latency.
"""

from __future__ import annotations

import heapq
import json
import selectors
import socket
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from . import wire
from .client import ResolverSpec

__all__ = ["DelayLaw", "MockResolverConfig", "RequestEvent", "MockResolverFarm", "load_mock_config"]


@dataclass(frozen=True)
class DelayLaw:
    """Scripted response-delay distribution (milliseconds)."""

    kind: str  # "fixed" | "exponential" | "uniform"
    a: float  # fixed value / mean / lower bound
    b: float = 0.0  # upper bound (uniform only)

    def sample(self, rng: np.random.Generator) -> float:
        if self.kind == "fixed":
            return self.a
        if self.kind == "exponential":
            return float(rng.exponential(self.a))
        if self.kind == "uniform":
            return float(rng.uniform(self.a, self.b))
        raise ValueError(f"unknown delay law {self.kind!r}")

    def cdf(self, t_ms) -> np.ndarray:
        """Analytic CDF, used by tests to check first-response min laws."""
        t = np.asarray(t_ms, dtype=float)
        if self.kind == "fixed":
            return (t >= self.a).astype(float)
        if self.kind == "exponential":
            return np.where(t > 0, -np.expm1(-np.maximum(t, 0.0) / self.a), 0.0)
        if self.kind == "uniform":
            return np.clip((t - self.a) / (self.b - self.a), 0.0, 1.0)
        raise ValueError(f"unknown delay law {self.kind!r}")

    @staticmethod
    def parse(text: str) -> "DelayLaw":
        """Parse e.g. ``fixed:ms=30``, ``exp:mean_ms=10``, ``uniform:lo_ms=5;hi_ms=20``."""
        kind, _, body = text.strip().partition(":")
        kv = {}
        for part in body.split(";"):
            if part:
                key, _, value = part.partition("=")
                kv[key.strip()] = float(value)
        try:
            if kind == "fixed":
                return DelayLaw("fixed", kv["ms"])
            if kind in ("exp", "exponential"):
                return DelayLaw("exponential", kv["mean_ms"])
            if kind == "uniform":
                return DelayLaw("uniform", kv["lo_ms"], kv["hi_ms"])
        except KeyError as exc:
            raise ValueError(f"delay spec {text!r} is missing parameter {exc.args[0]!r}") from None
        raise ValueError(f"unknown delay law {kind!r}")


@dataclass(frozen=True)
class MockResolverConfig:
    label: str
    delay: DelayLaw
    drop_prob: float = 0.0
    rcode: int = wire.RCODE_OK
    port: int = 0  # 0 picks an ephemeral port


@dataclass(frozen=True)
class RequestEvent:
    label: str
    txid: int
    scheduled_delay_ms: float | None  # None when the query was dropped


@dataclass(order=True)
class _Pending:
    due: float
    seq: int
    sock: socket.socket = field(compare=False)
    payload: bytes = field(compare=False)
    addr: tuple = field(compare=False)


class MockResolverFarm:
    """Context manager hosting scripted resolvers on loopback UDP ports."""

    def __init__(self, configs, seed: int = 0):
        self.configs = list(configs)
        self.seed = seed
        self._socks: list[socket.socket] = []
        self._rngs: list[np.random.Generator] = []
        self._log: list[RequestEvent] = []
        self._log_lock = threading.Lock()
        self._pending: list[_Pending] = []
        self._pending_cv = threading.Condition()
        self._seq = 0
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> "MockResolverFarm":
        for i, cfg in enumerate(self.configs):
            s = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            s.bind(("127.0.0.1", cfg.port))
            s.setblocking(False)
            self._socks.append(s)
            self._rngs.append(np.random.default_rng(np.random.SeedSequence([self.seed, i])))
        self._threads = [
            threading.Thread(target=self._receive_loop, daemon=True),
            threading.Thread(target=self._send_loop, daemon=True),
        ]
        for t in self._threads:
            t.start()
        return self

    def stop(self):
        self._stop.set()
        with self._pending_cv:
            self._pending_cv.notify_all()
        for t in self._threads:
            t.join(timeout=5.0)
        for s in self._socks:
            s.close()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()

    # -- client-facing view --------------------------------------------------

    def specs(self) -> list[ResolverSpec]:
        return [
            ResolverSpec(cfg.label, "127.0.0.1", s.getsockname()[1])
            for cfg, s in zip(self.configs, self._socks)
        ]

    def request_log(self) -> list[RequestEvent]:
        with self._log_lock:
            return list(self._log)

    # -- internals ---------------------------------------------------------

    def _receive_loop(self):
        sel = selectors.DefaultSelector()
        for i, s in enumerate(self._socks):
            sel.register(s, selectors.EVENT_READ, data=i)
        try:
            while not self._stop.is_set():
                for key, _ in sel.select(timeout=0.05):
                    try:
                        data, addr = key.fileobj.recvfrom(4096)
                    except (BlockingIOError, OSError):
                        continue
                    self._handle(key.data, key.fileobj, data, addr)
        finally:
            sel.close()

    def _handle(self, index: int, sock: socket.socket, data: bytes, addr):
        msg = wire.parse_message(data)
        if msg is None:
            return
        cfg = self.configs[index]
        rng = self._rngs[index]
        if cfg.drop_prob > 0.0 and rng.random() < cfg.drop_prob:
            event = RequestEvent(cfg.label, msg.txid, None)
        else:
            delay_ms = cfg.delay.sample(rng)
            event = RequestEvent(cfg.label, msg.txid, delay_ms)
            payload = wire.build_response(data, cfg.rcode)
            with self._pending_cv:
                self._seq += 1
                heapq.heappush(
                    self._pending,
                    _Pending(time.monotonic() + delay_ms / 1000.0, self._seq, sock, payload, addr),
                )
                self._pending_cv.notify()
        with self._log_lock:
            self._log.append(event)

    def _send_loop(self):
        while not self._stop.is_set():
            with self._pending_cv:
                if not self._pending:
                    self._pending_cv.wait(timeout=0.05)
                    continue
                now = time.monotonic()
                head = self._pending[0]
                if head.due > now:
                    self._pending_cv.wait(timeout=min(head.due - now, 0.05))
                    continue
                item = heapq.heappop(self._pending)
            try:
                item.sock.sendto(item.payload, item.addr)
            except OSError:
                pass


def load_mock_config(path) -> list[MockResolverConfig]:
    """Mock farm config from JSON: [{"label", "delay", "drop_prob", "rcode", "port"}, ...]."""
    with open(path) as fh:
        raw = json.load(fh)
    return [
        MockResolverConfig(
            label=entry["label"],
            delay=DelayLaw.parse(entry["delay"]),
            drop_prob=float(entry.get("drop_prob", 0.0)),
            rcode=int(entry.get("rcode", wire.RCODE_OK)),
            port=int(entry.get("port", 0)),
        )
        for entry in raw
    ]
