"""Staleness prediction workbench for Dynamo-style partial quorum replication.

Exact closed-form staleness bounds, a Monte Carlo simulator of message
reordering under four one-way delay distributions, sweep and trade-off
analysis, and an SLA-driven configuration search.
"""

from .analysis import (
    SlaConstraint,
    SlaOutcome,
    TradeoffRow,
    sla_search,
    sweep_replication,
    sweep_t,
    sweep_write_distribution,
    tradeoff_table,
)
from .distributions import (
    Degenerate,
    Distribution,
    Empirical,
    Exponential,
    LatencySet,
    Mixture,
    Pareto,
    Shifted,
    TruncatedNormal,
    Uniform as UniformDistribution,
    load_empirical,
    make_rng,
    preset,
)
from .quorum import (
    ConfigurationError,
    PropagationProfile,
    QuorumSpec,
    epsilon_for_tolerance,
    k_staleness_load_bound,
    k_staleness_miss,
    kt_staleness_miss,
    load_lower_bound,
    monotonic_reads_miss,
    quorum_miss_probability,
    t_visibility_miss,
)
from .simulator import (
    NOT_REACHED,
    Estimate,
    LatencyTable,
    TrialOutcome,
    Uniform,
    Wan,
    WarsModel,
    empirical_propagation_profile,
    estimate_latency,
    estimate_staleness,
    kt_estimate,
    run_trial,
    t_for_target,
)

__version__ = "0.1.0"
