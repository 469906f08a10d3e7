"""hedgesim: when does k-way request replication reduce latency?

A discrete-event queueing simulator plus companion calculators: threshold
loads under replication, TCP-handshake duplication savings, break-even
cost-effectiveness, and a replicated DNS probing harness.
"""

from .analytic import (
    ApproxModel,
    Verdict,
    exponential_threshold,
    geometric_approx_threshold,
    mm1_mean,
    overhead_bound,
    two_moment_mean,
)
from .distributions import (
    Family,
    Moments,
    Scheme,
    ServiceDistribution,
    deterministic,
    exponential,
    make_discrete,
    make_pareto,
    make_two_point,
    make_weibull,
    parse_distribution,
    sample_random_unit_mean,
)
from .econ import (
    CostPlan,
    ValueEstimate,
    break_even,
    cost_effectiveness,
    table,
    value_from_study,
)
from .handshake import (
    HandshakeParams,
    first_order_saving,
    handshake_distribution,
    mean_saving,
    quantile_saving,
)
from .queueing import (
    PairedResult,
    SimConfig,
    SimResult,
    paired_comparison,
    response_cdf,
    run_simulation,
)
from .threshold import (
    SearchSettings,
    ThresholdEstimate,
    find_threshold,
    overhead_sweep,
    random_distribution_study,
    tail_improvement_check,
    threshold_vs_n,
    variance_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # distributions
    "Family",
    "Moments",
    "Scheme",
    "ServiceDistribution",
    "deterministic",
    "exponential",
    "make_discrete",
    "make_pareto",
    "make_two_point",
    "make_weibull",
    "parse_distribution",
    "sample_random_unit_mean",
    # queueing
    "PairedResult",
    "SimConfig",
    "SimResult",
    "paired_comparison",
    "response_cdf",
    "run_simulation",
    # threshold analysis
    "SearchSettings",
    "ThresholdEstimate",
    "find_threshold",
    "overhead_sweep",
    "random_distribution_study",
    "tail_improvement_check",
    "threshold_vs_n",
    "variance_sweep",
    # analytic models
    "ApproxModel",
    "Verdict",
    "exponential_threshold",
    "geometric_approx_threshold",
    "mm1_mean",
    "overhead_bound",
    "two_moment_mean",
    # handshake
    "HandshakeParams",
    "first_order_saving",
    "handshake_distribution",
    "mean_saving",
    "quantile_saving",
    # econ
    "CostPlan",
    "ValueEstimate",
    "break_even",
    "cost_effectiveness",
    "table",
    "value_from_study",
]
