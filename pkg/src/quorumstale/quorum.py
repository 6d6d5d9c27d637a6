"""Closed-form staleness probabilities for partial quorum systems.

Everything here is exact combinatorics: the probability that a random read
quorum misses the most recent write quorum, its exponentiated multi-version
variants, load lower bounds, and the expanding-quorum form that weighs the
miss probability against a write propagation profile.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, isfinite, sqrt

import numpy as np


class ConfigurationError(ValueError):
    """Raised for invalid replication configurations or mismatched inputs."""


@dataclass(frozen=True)
class QuorumSpec:
    """An (n, r, w) replication configuration.

    Attributes:
        n: Replica count, at least 1.
        r: Read quorum size, in [1, n].
        w: Write quorum size, in [1, n].
    """

    n: int
    r: int
    w: int

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError(f"replica count must be >= 1, got {self.n}")
        if not 1 <= self.r <= self.n:
            raise ConfigurationError(f"read quorum size {self.r} not in [1, {self.n}]")
        if not 1 <= self.w <= self.n:
            raise ConfigurationError(f"write quorum size {self.w} not in [1, {self.n}]")

    @property
    def strict(self) -> bool:
        """True when every read quorum must intersect every write quorum."""
        return self.r + self.w > self.n


def _miss_fraction(spec: QuorumSpec) -> Fraction:
    """Exact probability that a random read quorum avoids all w written replicas."""
    return Fraction(comb(spec.n - spec.w, spec.r), comb(spec.n, spec.r))


def quorum_miss_probability(spec: QuorumSpec) -> float:
    """Probability that a read quorum misses the latest write quorum.

    Counts read quorums drawn entirely from the n - w unwritten replicas,
    over all C(n, r) read quorums. Zero exactly when r + w > n.
    """
    return float(_miss_fraction(spec))


def k_staleness_miss(spec: QuorumSpec, k: int) -> float:
    """Probability of missing all of the last k independent write quorums.

    Args:
        spec: Replication configuration.
        k: Version tolerance, integer >= 1.
    """
    if k < 1:
        raise ValueError(f"version tolerance must be >= 1, got {k}")
    return float(_miss_fraction(spec) ** k)


def monotonic_reads_miss(
    spec: QuorumSpec, writes_per_read: float, strict: bool = False
) -> float:
    """Probability a client observes an older version than it previously read.

    The effective version tolerance is the number of writes landing between a
    client's successive reads: 1 + writes_per_read normally, or exactly
    writes_per_read in strict mode (strictly-newer-data semantics, which
    requires at least one intervening write). Real-valued exponents are
    permitted because write/read rate ratios are generally non-integral.
    """
    if not (writes_per_read >= 0 and isfinite(writes_per_read)):
        raise ValueError(f"writes_per_read must be finite and >= 0, got {writes_per_read}")
    if strict:
        if writes_per_read < 1:
            raise ValueError("strict monotonic reads requires writes_per_read >= 1")
        k = writes_per_read
    else:
        k = 1.0 + writes_per_read
    return float(_miss_fraction(spec)) ** k


def epsilon_for_tolerance(p: float, k: int) -> float:
    """Per-quorum non-intersection probability sufficient for a k-version bound of p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {p}")
    if k < 1:
        raise ValueError(f"version tolerance must be >= 1, got {k}")
    return p ** (1.0 / k)


def load_lower_bound(epsilon: float, n: int) -> float:
    """Lower bound on quorum system load for epsilon-intersecting systems."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    if n < 1:
        raise ValueError(f"replica count must be >= 1, got {n}")
    return (1.0 - epsilon) / sqrt(n)


def k_staleness_load_bound(p: float, k: int, n: int) -> float:
    """Load lower bound for a system tolerating k versions at miss probability p.

    Composition of the two bounds above: epsilon = p^(1/k) substituted into
    (1 - epsilon) / sqrt(n).
    """
    return load_lower_bound(epsilon_for_tolerance(p, k), n)


@dataclass(frozen=True)
class PropagationProfile:
    """Write propagation table: P(at least c replicas hold the version at time t).

    The table covers c in [0, n] (columns) on an ascending millisecond time
    grid (rows). By construction of a committed write, every column c <= w_base
    is 1 at t = 0.

    Attributes:
        w_base: Write quorum size of the configuration that produced the table.
        t_grid: Ascending grid times in ms, starting at 0.
        table: Shape (len(t_grid), n + 1); table[i, c] = P(at least c at t_grid[i]).
    """

    w_base: int
    t_grid: np.ndarray
    table: np.ndarray

    def __post_init__(self):
        t_grid = np.asarray(self.t_grid, dtype=float)
        table = np.asarray(self.table, dtype=float)
        object.__setattr__(self, "t_grid", t_grid)
        object.__setattr__(self, "table", table)
        if t_grid.ndim != 1 or table.ndim != 2 or table.shape[0] != t_grid.size:
            raise ConfigurationError("profile table must be (len(t_grid), n + 1)")
        if t_grid[0] != 0.0 or np.any(np.diff(t_grid) < 0):
            raise ConfigurationError("t_grid must ascend from 0")
        if np.any(table < 0) or np.any(table > 1):
            raise ConfigurationError("profile entries must be probabilities")
        if np.any(np.diff(table, axis=1) > 1e-12):
            raise ConfigurationError("profile must be non-increasing in c")
        if np.any(np.diff(table, axis=0) < -1e-12):
            raise ConfigurationError("profile must be non-decreasing in t")
        if not np.allclose(table[:, 0], 1.0):
            raise ConfigurationError("P(at least 0, t) must be 1")
        if not np.allclose(table[0, : self.w_base + 1], 1.0):
            raise ConfigurationError("P(at least c, 0) must be 1 for c <= w_base")

    @property
    def n(self) -> int:
        return self.table.shape[1] - 1

    def at(self, t: float) -> np.ndarray:
        """Row of at-least-c probabilities at time t, linearly interpolated."""
        if not self.t_grid[0] <= t <= self.t_grid[-1]:
            raise ValueError(
                f"t={t} outside profile grid [{self.t_grid[0]}, {self.t_grid[-1]}]"
            )
        out = np.empty(self.n + 1)
        for c in range(self.n + 1):
            out[c] = np.interp(t, self.t_grid, self.table[:, c])
        return out


def t_visibility_miss(spec: QuorumSpec, profile: PropagationProfile, t: float) -> float:
    """Probability a read starting t ms after commit misses the write.

    Weighs the exact miss probability given c fresh replicas, C(n-c, r)/C(n, r),
    by the probability mass that exactly c replicas hold the version at time t.
    This ignores read-flight time and ack delay, so it is a conservative upper
    bound on the true miss probability of an expanding quorum.
    """
    if profile.w_base != spec.w:
        raise ConfigurationError(
            f"profile built for w={profile.w_base}, quorum has w={spec.w}"
        )
    if profile.n != spec.n:
        raise ConfigurationError(f"profile covers n={profile.n}, quorum has n={spec.n}")
    at_least = profile.at(t)
    total = 0.0
    denom = comb(spec.n, spec.r)
    for c in range(spec.w, spec.n + 1):
        upper = at_least[c + 1] if c < spec.n else 0.0
        mass = at_least[c] - upper
        total += mass * comb(spec.n - c, spec.r) / denom
    return min(max(total, 0.0), 1.0)


def kt_staleness_miss(
    spec: QuorumSpec, profile: PropagationProfile, t: float, k: int
) -> float:
    """Combined version/time bound: the t-visibility miss exponentiated by k.

    Assumes the pathological case of the last k writes committing at the same
    instant, so this is again a conservative upper bound.
    """
    if k < 1:
        raise ValueError(f"version tolerance must be >= 1, got {k}")
    return t_visibility_miss(spec, profile, t) ** k
