"""Closed-form latency and threshold calculators for 2-way replication.

The exponential results are exact M/M/1 algebra.  The general-service
threshold calculator is an approximation built on a geometric model of the
number-in-system whose mean is matched to the standard two-moment
(Pollaczek-Khinchine) value; its outputs are labelled approximations and
are known to be conservative for the exponential case (0.25 vs the exact
1/3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "ApproxModel",
    "Verdict",
    "mm1_mean",
    "exponential_threshold",
    "two_moment_mean",
    "geometric_approx_threshold",
    "overhead_bound",
]


def mm1_mean(load: float, replicated: bool = False) -> float:
    """Mean M/M/1 response time, unreplicated 1/(1-rho) or 2-way 1/(2(1-2rho))."""
    if replicated:
        if not 0.0 <= load < 0.5:
            raise ValueError(f"replicated load must lie in [0, 0.5), got {load}")
        return 1.0 / (2.0 * (1.0 - 2.0 * load))
    if not 0.0 <= load < 1.0:
        raise ValueError(f"load must lie in [0, 1), got {load}")
    return 1.0 / (1.0 - load)


def exponential_threshold() -> float:
    """Load below which 2-way replication helps exponential service: exactly 1/3."""
    return 1.0 / 3.0


def two_moment_mean(load: float, scv: float) -> float:
    """Two-moment (Pollaczek-Khinchine) mean response time 1 + rho(1+C^2)/(2(1-rho))."""
    if not 0.0 <= load < 1.0:
        raise ValueError(f"load must lie in [0, 1), got {load}")
    if scv < 0.0:
        raise ValueError("squared coefficient of variation must be nonnegative")
    return 1.0 + load * (1.0 + scv) / (2.0 * (1.0 - load))


def _number_in_system(load: float, scv: float) -> float:
    # Little's law applied to the two-moment mean at per-server rate rho.
    return load * two_moment_mean(load, scv)


@dataclass(frozen=True)
class ApproxModel:
    """Geometric number-in-system model matched to the two-moment mean.

    sigma is the geometric parameter: sigma/(1-sigma) equals the matched
    mean number-in-system, so sigma is strictly increasing in load.
    """

    scv: float
    load: float

    def __post_init__(self):
        if not 0.0 < self.load < 1.0:
            raise ValueError(f"load must lie in (0, 1), got {self.load}")
        if self.scv < 0.0:
            raise ValueError("scv must be nonnegative")

    @property
    def sigma(self) -> float:
        n = _number_in_system(self.load, self.scv)
        return n / (1.0 + n)

    def mean_in_system(self) -> float:
        return self.sigma / (1.0 - self.sigma)


def geometric_approx_threshold(scv: float, k: int = 2, tol: float = 1e-6) -> float:
    """Approximate threshold load for 2-way replication under the geometric model.

    The base system's mean response is proportional to sigma(rho)/(1-sigma(rho))+1;
    the replicated system doubles each server's load and takes the minimum of two
    independent geometrics, which is geometric with the squared parameter, giving
    sigma(2 rho)^2/(1-sigma(2 rho)^2)+1.  Returns the crossing load, located by
    bisection to ``tol``.
    """
    if k != 2:
        raise ValueError("the geometric approximation is derived for k = 2 only")
    if scv < 0.0:
        raise ValueError("scv must be nonnegative")

    def gap(load: float) -> float:
        sigma_base = ApproxModel(scv, load).sigma
        sigma_rep = ApproxModel(scv, 2.0 * load).sigma
        return sigma_rep**2 / (1.0 - sigma_rep**2) - sigma_base / (1.0 - sigma_base)

    lo, hi = 1e-9, 0.5 - 1e-12
    if gap(lo) >= 0.0:
        return 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class Verdict(str, Enum):
    CANNOT_HELP = "CannotHelp"
    MAY_HELP = "MayHelp"


def overhead_bound(mean_base: float, overhead: float) -> Verdict:
    """CannotHelp when the per-request overhead reaches the baseline mean.

    The replicated mean is at least the overhead plus the (positive) minimum
    replica sojourn, so overhead >= mean_base rules out any mean improvement.
    """
    if mean_base < 1.0:
        raise ValueError("baseline mean response cannot be below the unit service mean")
    if overhead < 0.0:
        raise ValueError("overhead must be nonnegative")
    return Verdict.CANNOT_HELP if overhead >= mean_base else Verdict.MAY_HELP
