"""Unit-mean service-time distributions.

Every family here is normalized so the analytic mean is exactly 1: all
simulator times are dimensionless "service units".  Distributions are
immutable after construction and safe to share across threads; random
streams are always passed in by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Family",
    "Scheme",
    "Moments",
    "ServiceDistribution",
    "deterministic",
    "exponential",
    "make_pareto",
    "make_weibull",
    "make_two_point",
    "make_discrete",
    "sample_random_unit_mean",
    "parse_distribution",
]

_MEAN_TOL = 1e-9
_PROB_TOL = 1e-12


class Family(str, Enum):
    DETERMINISTIC = "deterministic"
    EXPONENTIAL = "exponential"
    PARETO = "pareto"
    WEIBULL = "weibull"
    TWO_POINT = "twopoint"
    DISCRETE = "discrete"


class Scheme(str, Enum):
    """Sampling schemes for random discrete unit-mean distributions."""

    UNIFORM_SIMPLEX = "uniform"
    DIRICHLET01 = "dirichlet01"


@dataclass(frozen=True)
class Moments:
    """First two moments; scv is the squared coefficient of variation."""

    mean: float
    variance: float
    scv: float


@dataclass(frozen=True)
class ServiceDistribution:
    """A unit-mean service-time law: family tag plus family parameters.

    ``atoms``/``probs`` hold the support for the discrete families
    (sorted ascending) and are None for the continuous ones.
    """

    family: Family
    # Continuous-family parameters (unused entries are 0.0).
    alpha: float = 0.0  # Pareto tail index
    shape: float = 0.0  # Weibull shape
    scale: float = 0.0  # derived: Pareto x_m or Weibull scale
    p: float = 0.0  # two-point low-atom mass
    atoms: tuple[float, ...] | None = None
    probs: tuple[float, ...] | None = None

    def __str__(self) -> str:
        if self.family is Family.PARETO:
            return f"pareto(alpha={self.alpha:g})"
        if self.family is Family.WEIBULL:
            return f"weibull(shape={self.shape:g})"
        if self.family is Family.TWO_POINT:
            return f"twopoint(p={self.p:g})"
        if self.family is Family.DISCRETE:
            return f"discrete({len(self.atoms)} atoms)"
        return self.family.value

    # -- sampling ---------------------------------------------------------

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray | float:
        """Draw from the distribution; deterministic given the stream state."""
        if self.family is Family.DETERMINISTIC:
            return 1.0 if size is None else np.ones(size)
        if self.family is Family.EXPONENTIAL:
            return rng.exponential(1.0, size)
        if self.family is Family.PARETO:
            # Generator.pareto is the Lomax form (1-U)^(-1/a) - 1.
            return self.scale * (1.0 + rng.pareto(self.alpha, size))
        if self.family is Family.WEIBULL:
            return self.scale * rng.weibull(self.shape, size)
        atoms = np.asarray(self.atoms)
        cum = np.cumsum(self.probs)
        idx = np.searchsorted(cum, rng.random(size), side="right")
        return atoms[np.minimum(idx, atoms.size - 1)]

    # -- analytic characterization ---------------------------------------

    def moments(self) -> Moments:
        if self.family is Family.DETERMINISTIC:
            return Moments(1.0, 0.0, 0.0)
        if self.family is Family.EXPONENTIAL:
            return Moments(1.0, 1.0, 1.0)
        if self.family is Family.PARETO:
            if self.alpha <= 2.0:
                return Moments(1.0, math.inf, math.inf)
            var = self.scale**2 * self.alpha / ((self.alpha - 1.0) ** 2 * (self.alpha - 2.0))
            return Moments(1.0, var, var)
        if self.family is Family.WEIBULL:
            second = self.scale**2 * math.gamma(1.0 + 2.0 / self.shape)
            var = second - 1.0
            return Moments(1.0, var, var)
        atoms = np.asarray(self.atoms)
        probs = np.asarray(self.probs)
        mean = float(atoms @ probs)
        var = float((atoms - mean) ** 2 @ probs)
        return Moments(mean, var, var / mean**2)

    def quantile(self, q: float) -> float:
        """Generalized inverse CDF at probability q in (0, 1)."""
        if not 0.0 < q < 1.0:
            raise ValueError(f"quantile level must lie in (0, 1), got {q}")
        if self.family is Family.DETERMINISTIC:
            return 1.0
        if self.family is Family.EXPONENTIAL:
            return -math.log1p(-q)
        if self.family is Family.PARETO:
            return self.scale * (1.0 - q) ** (-1.0 / self.alpha)
        if self.family is Family.WEIBULL:
            return self.scale * (-math.log1p(-q)) ** (1.0 / self.shape)
        cum = np.cumsum(self.probs)
        idx = int(np.searchsorted(cum, q, side="left"))
        return float(self.atoms[min(idx, len(self.atoms) - 1)])

    def cdf(self, x) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        if self.family is Family.DETERMINISTIC:
            out = (x >= 1.0).astype(float)
        elif self.family is Family.EXPONENTIAL:
            out = np.where(x > 0.0, -np.expm1(-np.maximum(x, 0.0)), 0.0)
        elif self.family is Family.PARETO:
            with np.errstate(divide="ignore"):
                out = np.where(x >= self.scale, 1.0 - (self.scale / np.maximum(x, self.scale)) ** self.alpha, 0.0)
        elif self.family is Family.WEIBULL:
            out = np.where(x > 0.0, -np.expm1(-((np.maximum(x, 0.0) / self.scale) ** self.shape)), 0.0)
        else:
            atoms = np.asarray(self.atoms)
            cum = np.concatenate(([0.0], np.cumsum(self.probs)))
            out = cum[np.searchsorted(atoms, x, side="right")]
        return out if out.ndim else float(out)


# -- constructors ----------------------------------------------------------


def deterministic() -> ServiceDistribution:
    """Point mass at 1 service unit."""
    return ServiceDistribution(Family.DETERMINISTIC)


def exponential() -> ServiceDistribution:
    """Exponential with rate 1."""
    return ServiceDistribution(Family.EXPONENTIAL)


def make_pareto(alpha: float) -> ServiceDistribution:
    """Pareto with tail index alpha > 1 and scale x_m = (alpha-1)/alpha.

    The scale is fully determined by the unit-mean constraint
    alpha * x_m / (alpha - 1) = 1.
    """
    if not alpha > 1.0:
        raise ValueError(f"pareto tail index must exceed 1 for a finite mean, got {alpha}")
    return ServiceDistribution(Family.PARETO, alpha=float(alpha), scale=(alpha - 1.0) / alpha)


def make_weibull(shape: float) -> ServiceDistribution:
    """Weibull with given shape; scale 1/gamma(1 + 1/shape) makes the mean 1."""
    if not shape > 0.0:
        raise ValueError(f"weibull shape must be positive, got {shape}")
    return ServiceDistribution(Family.WEIBULL, shape=float(shape), scale=1.0 / math.gamma(1.0 + 1.0 / shape))


def make_two_point(p: float) -> ServiceDistribution:
    """Mass p at 0.5 and mass 1-p at (1 - 0.5 p)/(1 - p); mean is exactly 1.

    p -> 1 pushes the upper atom to infinity, so p must stay below 1.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError(f"two-point mixing probability must lie in [0, 1), got {p}")
    high = (1.0 - 0.5 * p) / (1.0 - p)
    return ServiceDistribution(
        Family.TWO_POINT, p=float(p), atoms=(0.5, high), probs=(float(p), 1.0 - float(p))
    )


def make_discrete(values, probs) -> ServiceDistribution:
    """Arbitrary finite unit-mean distribution on strictly positive values."""
    values = np.asarray(values, dtype=float)
    probs = np.asarray(probs, dtype=float)
    if values.shape != probs.shape or values.ndim != 1 or values.size == 0:
        raise ValueError("values and probs must be equal-length non-empty 1-d sequences")
    if np.any(values <= 0.0):
        raise ValueError("all support values must be strictly positive")
    if np.any(probs < 0.0):
        raise ValueError("all probability masses must be nonnegative")
    total = float(probs.sum())
    if abs(total - 1.0) > _PROB_TOL:
        raise ValueError(f"probabilities must sum to 1 (got {total})")
    mean = float(values @ probs)
    if abs(mean - 1.0) > _MEAN_TOL:
        raise ValueError(f"distribution mean must be 1 (got {mean})")
    order = np.argsort(values)
    return ServiceDistribution(
        Family.DISCRETE,
        atoms=tuple(float(v) for v in values[order]),
        probs=tuple(float(q) for q in probs[order]),
    )


def sample_random_unit_mean(
    support_size: int, scheme: Scheme | str, rng: np.random.Generator
) -> ServiceDistribution:
    """Draw a random discrete unit-mean distribution with ``support_size`` atoms.

    Probabilities are drawn over the support {1, ..., N} (flat Dirichlet for
    UNIFORM_SIMPLEX, symmetric Dirichlet with concentration 0.1 for
    DIRICHLET01) and the support values are then rescaled by the reciprocal
    of the realized mean, which yields an exactly unit-mean distribution.
    """
    if support_size < 1:
        raise ValueError(f"support size must be at least 1, got {support_size}")
    scheme = Scheme(scheme)
    concentration = 1.0 if scheme is Scheme.UNIFORM_SIMPLEX else 0.1
    # Dirichlet via normalized Gamma draws; redraw on (astronomically rare)
    # total underflow to zero.
    while True:
        gammas = rng.gamma(concentration, size=support_size)
        total = gammas.sum()
        if total > 0.0:
            break
    probs = gammas / total
    support = np.arange(1, support_size + 1, dtype=float)
    mu = float(support @ probs)
    return make_discrete(support / mu, probs)


# -- text format -----------------------------------------------------------


def _parse_kv(body: str) -> dict[str, str]:
    out = {}
    for part in body.split(";"):
        if not part:
            continue
        key, sep, value = part.partition("=")
        if not sep:
            raise ValueError(f"malformed distribution parameter {part!r} (expected key=value)")
        out[key.strip()] = value.strip()
    return out


def parse_distribution(text: str) -> ServiceDistribution:
    """Parse a textual distribution spec.

    Examples: ``deterministic``, ``exponential``, ``pareto:alpha=2.1``,
    ``weibull:shape=0.5``, ``twopoint:p=0.5``,
    ``discrete:values=0.5,1.5;probs=0.5,0.5``,
    ``random:n=10;scheme=dirichlet01;seed=42``.
    """
    name, _, body = text.strip().partition(":")
    name = name.lower()
    try:
        if name == "deterministic":
            return deterministic()
        if name == "exponential":
            return exponential()
        kv = _parse_kv(body)
        if name == "pareto":
            return make_pareto(float(kv["alpha"]))
        if name == "weibull":
            return make_weibull(float(kv["shape"]))
        if name == "twopoint":
            return make_two_point(float(kv["p"]))
        if name == "discrete":
            values = [float(v) for v in kv["values"].split(",")]
            probs = [float(v) for v in kv["probs"].split(",")]
            return make_discrete(values, probs)
        if name == "random":
            rng = np.random.default_rng(int(kv["seed"]))
            scheme = Scheme(kv.get("scheme", "uniform"))
            return sample_random_unit_mean(int(kv["n"]), scheme, rng)
    except KeyError as exc:
        raise ValueError(f"distribution spec {text!r} is missing parameter {exc.args[0]!r}") from None
    raise ValueError(f"unknown distribution family {name!r}")
