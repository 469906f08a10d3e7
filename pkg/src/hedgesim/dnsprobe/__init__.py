"""Replicated DNS probing: wire format, client, mock resolvers, analyzer."""

from .analyze import DnsReport, MarginalStep, StrategyStats, analyze
from .client import (
    LOSS_MS,
    ProbeError,
    RankingResult,
    ResolverSpec,
    TrialRecord,
    load_resolvers,
    load_trials,
    parse_resolver_line,
    probe_once,
    rank_resolvers,
    run_campaign,
    save_trials,
)
from .mockserver import DelayLaw, MockResolverConfig, MockResolverFarm, RequestEvent, load_mock_config

__all__ = [
    "LOSS_MS",
    "ProbeError",
    "RankingResult",
    "ResolverSpec",
    "TrialRecord",
    "load_resolvers",
    "load_trials",
    "parse_resolver_line",
    "probe_once",
    "rank_resolvers",
    "run_campaign",
    "save_trials",
    "DnsReport",
    "MarginalStep",
    "StrategyStats",
    "analyze",
    "DelayLaw",
    "MockResolverConfig",
    "MockResolverFarm",
    "RequestEvent",
    "load_mock_config",
]
