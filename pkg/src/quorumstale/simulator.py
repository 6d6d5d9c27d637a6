"""Monte Carlo simulation of a single write followed by a read t ms later.

The model draws four one-way delays per replica (write request, write ack,
read request, read response). The write commits at the w-th smallest
request+ack sum; a read started t ms after commit returns the first r
replicas ordered by request+response sum, and is stale when none of those
responders had received the write by the time the read request reached them.

Runs are split into fixed-size shards with seeds derived from the master
seed, so results are bit-identical regardless of how many workers execute
the shards.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distributions import Distribution, RandomSource
from .quorum import ConfigurationError, PropagationProfile, QuorumSpec

SHARD_SIZE = 1 << 16

DEFAULT_WAN_EXTRA_MS = 75.0

#: Sentinel for "target consistency not reached within the search horizon".
NOT_REACHED = math.inf


@dataclass(frozen=True)
class Uniform:
    """All replicas equidistant from every coordinator."""


@dataclass(frozen=True)
class Wan:
    """One replica per datacenter; non-local one-way delays pay a fixed extra.

    The write and read coordinators are independent uniform datacenter picks,
    and the extra applies to each one-way leg (request and response
    separately) of replicas not co-located with that operation's coordinator.
    """

    remote_extra_ms: float = DEFAULT_WAN_EXTRA_MS

    def __post_init__(self):
        if not self.remote_extra_ms >= 0:
            raise ValueError(f"remote extra must be >= 0, got {self.remote_extra_ms}")


Topology = Uniform | Wan


@dataclass(frozen=True)
class WarsModel:
    """Quorum configuration plus the four one-way delay distributions."""

    spec: QuorumSpec
    write_request: Distribution
    write_ack: Distribution
    read_request: Distribution
    read_response: Distribution
    topology: Topology = Uniform()

    @property
    def delays(self):
        return (self.write_request, self.write_ack, self.read_request, self.read_response)


@dataclass(frozen=True)
class TrialOutcome:
    """Result of one simulated write/read pair."""

    stale: bool
    write_commit_ms: float
    read_return_ms: float
    fresh_replica_count_at_read: int


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo probability estimate with a Wilson 95% interval."""

    p_hat: float
    trials: int
    ci95_lo: float
    ci95_hi: float

    @classmethod
    def from_counts(cls, successes: int, trials: int) -> "Estimate":
        lo, hi = wilson_interval(successes, trials)
        return cls(p_hat=successes / trials, trials=trials, ci95_lo=lo, ci95_hi=hi)

    def complement(self) -> "Estimate":
        """The same estimate for the complementary event."""
        return Estimate(1.0 - self.p_hat, self.trials, 1.0 - self.ci95_hi, 1.0 - self.ci95_lo)

    def powered(self, k: float) -> "Estimate":
        """Exponentiated estimate (interval endpoints exponentiated likewise)."""
        return Estimate(self.p_hat**k, self.trials, self.ci95_lo**k, self.ci95_hi**k)


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054):
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(center - half, 0.0)
    hi = 1.0 if successes == trials else min(center + half, 1.0)
    return lo, hi


def _shard_plan(trials: int):
    """Deterministic split of a run into fixed-size shards."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    sizes = [SHARD_SIZE] * (trials // SHARD_SIZE)
    if trials % SHARD_SIZE:
        sizes.append(trials % SHARD_SIZE)
    return sizes


def _shard_rngs(seed: int, count: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _run_shards(seed, trials, shard_fn, workers=None):
    """Run shard_fn(size, rng) over the shard plan and return results in order."""
    sizes = _shard_plan(trials)
    rngs = _shard_rngs(seed, len(sizes))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(shard_fn, sizes, rngs))
    return [shard_fn(size, rng) for size, rng in zip(sizes, rngs)]


def _draw_write_side(model: WarsModel, m: int, rng: RandomSource):
    """Per-replica write request/ack delays, with WAN extras applied."""
    n = model.spec.n
    w_lat = np.asarray(model.write_request.sample(rng, (m, n)), dtype=float)
    a_lat = np.asarray(model.write_ack.sample(rng, (m, n)), dtype=float)
    if isinstance(model.topology, Wan):
        coord = rng.integers(0, n, m)
        remote = np.arange(n)[None, :] != coord[:, None]
        w_lat += model.topology.remote_extra_ms * remote
        a_lat += model.topology.remote_extra_ms * remote
    return w_lat, a_lat


def _draw_read_side(model: WarsModel, m: int, rng: RandomSource):
    n = model.spec.n
    r_lat = np.asarray(model.read_request.sample(rng, (m, n)), dtype=float)
    s_lat = np.asarray(model.read_response.sample(rng, (m, n)), dtype=float)
    if isinstance(model.topology, Wan):
        coord = rng.integers(0, n, m)
        remote = np.arange(n)[None, :] != coord[:, None]
        r_lat += model.topology.remote_extra_ms * remote
        s_lat += model.topology.remote_extra_ms * remote
    return r_lat, s_lat


def _simulate_batch(model: WarsModel, t: float, m: int, rng: RandomSource):
    """Vectorized trials: returns (stale, commit_ms, read_ms, fresh_count) arrays."""
    spec = model.spec
    w_lat, a_lat = _draw_write_side(model, m, rng)
    r_lat, s_lat = _draw_read_side(model, m, rng)

    commit = np.partition(w_lat + a_lat, spec.w - 1, axis=1)[:, spec.w - 1]
    rs = r_lat + s_lat
    # Uniform-random tiebreak so degenerate delays do not bias replica choice.
    tiebreak = rng.random((m, spec.n))
    order = np.lexsort((tiebreak, rs))
    rows = np.arange(m)[:, None]
    first = order[:, : spec.r]
    # Replica fresh iff its write request arrived by the read request: ties fresh.
    fresh = w_lat[rows, first] <= commit[:, None] + t + r_lat[rows, first]
    fresh_count = fresh.sum(axis=1)
    read_return = np.take_along_axis(rs, order, axis=1)[:, spec.r - 1]
    return fresh_count == 0, commit, read_return, fresh_count


def run_trial(model: WarsModel, t: float, rng: RandomSource) -> TrialOutcome:
    """Simulate one write followed by a read t ms after commit."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    stale, commit, read_return, fresh_count = _simulate_batch(model, t, 1, rng)
    return TrialOutcome(
        stale=bool(stale[0]),
        write_commit_ms=float(commit[0]),
        read_return_ms=float(read_return[0]),
        fresh_replica_count_at_read=int(fresh_count[0]),
    )


def estimate_staleness(
    model: WarsModel, t: float, trials: int, seed: int, workers: int | None = None
) -> Estimate:
    """Probability that a read starting t ms after commit returns stale data."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")

    def shard(size, rng):
        return int(_simulate_batch(model, t, size, rng)[0].sum())

    stale_total = sum(_run_shards(seed, trials, shard, workers))
    return Estimate.from_counts(stale_total, trials)


DEFAULT_PERCENTILES = (50.0, 75.0, 95.0, 99.0, 99.9)


@dataclass(frozen=True)
class LatencyTable:
    """Nearest-rank operation latency percentiles from a simulated run."""

    trials: int
    read_ms: dict
    write_ms: dict

    def read_at(self, pct: float) -> float:
        return self.read_ms[pct]

    def write_at(self, pct: float) -> float:
        return self.write_ms[pct]


def _nearest_rank(sorted_values: np.ndarray, pct: float) -> float:
    rank = max(math.ceil(pct / 100.0 * sorted_values.size), 1)
    return float(sorted_values[rank - 1])


def estimate_latency(
    model: WarsModel,
    trials: int,
    seed: int,
    percentiles=DEFAULT_PERCENTILES,
    workers: int | None = None,
) -> LatencyTable:
    """Read/write operation latency percentiles.

    A write completes at the w-th smallest request+ack sum; a read at the
    r-th smallest request+response sum. Percentiles are nearest-rank over
    the raw trial sample, so `trials` must leave at least 10 expected
    samples above the highest requested percentile.
    """
    percentiles = tuple(percentiles)
    for pct in percentiles:
        if not 0 < pct < 100:
            raise ValueError(f"percentile must be in (0, 100), got {pct}")
        if (1.0 - pct / 100.0) * trials < 10:
            raise ValueError(
                f"{trials} trials leave fewer than 10 expected samples "
                f"above the {pct}th percentile"
            )

    spec = model.spec

    def shard(size, rng):
        w_lat, a_lat = _draw_write_side(model, size, rng)
        r_lat, s_lat = _draw_read_side(model, size, rng)
        write = np.partition(w_lat + a_lat, spec.w - 1, axis=1)[:, spec.w - 1]
        read = np.partition(r_lat + s_lat, spec.r - 1, axis=1)[:, spec.r - 1]
        return read, write

    parts = _run_shards(seed, trials, shard, workers)
    read = np.sort(np.concatenate([p[0] for p in parts]))
    write = np.sort(np.concatenate([p[1] for p in parts]))

    def table(sorted_vals):
        out = {"min": float(sorted_vals[0]), "max": float(sorted_vals[-1])}
        for pct in percentiles:
            out[pct] = _nearest_rank(sorted_vals, pct)
        return out

    return LatencyTable(trials=trials, read_ms=table(read), write_ms=table(write))


def kt_estimate(
    model: WarsModel, t: float, k: int, trials: int, seed: int, workers=None
) -> Estimate:
    """Conservative multi-version bound: the staleness estimate raised to k.

    This is the rule-of-thumb exponentiation for tolerating up to k versions,
    not a multi-write simulation.
    """
    if k < 1:
        raise ValueError(f"version tolerance must be >= 1, got {k}")
    return estimate_staleness(model, t, trials, seed, workers).powered(k)


def isotonic_nondecreasing(values, weights=None) -> np.ndarray:
    """Pool-adjacent-violators fit of a nondecreasing sequence."""
    values = np.asarray(values, dtype=float)
    weights = np.ones_like(values) if weights is None else np.asarray(weights, dtype=float)
    blocks = []  # (mean, weight, count)
    for v, w in zip(values, weights):
        blocks.append([v, w, 1])
        while len(blocks) > 1 and blocks[-2][0] >= blocks[-1][0]:
            v1, w1, c1 = blocks.pop()
            v0, w0, c0 = blocks.pop()
            total = w0 + w1
            blocks.append([(v0 * w0 + v1 * w1) / total, total, c0 + c1])
    return np.concatenate([np.full(c, v) for v, _, c in blocks])


def _search_grid(t_min: float, horizon: float, ratio: float = 1.6):
    grid = [0.0]
    t = t_min
    while t < horizon:
        grid.append(t)
        t *= ratio
    grid.append(horizon)
    return grid


def t_for_target(
    model: WarsModel,
    target_consistency: float,
    trials_per_point: int,
    seed: int,
    horizon: float = 10_000.0,
    t_min: float = 0.05,
    refine_points: int = 8,
    workers: int | None = None,
) -> float:
    """Smallest t at which estimated consistency reaches the target.

    Walks a geometric grid until the target is bracketed, refines the bracket
    with a linear grid, fits an isotonic (nondecreasing in t) curve to the
    consistency estimates, and linearly interpolates the crossing. Returns 0
    when already satisfied at t=0 and NOT_REACHED past the horizon; never a
    fabricated t.
    """
    if not 0.0 < target_consistency < 1.0:
        raise ValueError(f"target must be in (0, 1), got {target_consistency}")

    evaluated = []

    def consistency_at(t, idx):
        est = estimate_staleness(model, t, trials_per_point, _point_seed(seed, idx), workers)
        evaluated.append((t, 1.0 - est.p_hat))
        return 1.0 - est.p_hat

    if consistency_at(0.0, 0) >= target_consistency:
        return 0.0

    bracket = None
    for idx, t in enumerate(_search_grid(t_min, horizon)[1:], start=1):
        if consistency_at(t, idx) >= target_consistency:
            bracket = (evaluated[-2][0], t)
            break
    if bracket is None:
        return NOT_REACHED

    lo, hi = bracket
    refine = np.linspace(lo, hi, refine_points + 2)[1:-1]
    for j, t in enumerate(refine):
        consistency_at(float(t), 1000 + j)

    evaluated.sort()
    ts = np.array([p[0] for p in evaluated])
    smoothed = isotonic_nondecreasing([p[1] for p in evaluated])
    crossing = np.argmax(smoothed >= target_consistency)
    if smoothed[crossing] < target_consistency:
        return NOT_REACHED
    if crossing == 0:
        return float(ts[0])
    c0, c1 = smoothed[crossing - 1], smoothed[crossing]
    t0, t1 = ts[crossing - 1], ts[crossing]
    if c1 <= c0:
        return float(t1)
    return float(t0 + (target_consistency - c0) / (c1 - c0) * (t1 - t0))


def _point_seed(seed: int, index: int) -> int:
    """Stable derived seed for an indexed evaluation point."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def empirical_propagation_profile(
    model: WarsModel,
    t_grid,
    trials: int,
    seed: int,
    workers: int | None = None,
) -> PropagationProfile:
    """Measure P(at least c replicas hold the write at t after commit).

    Counts, per trial, the replicas whose write request arrived by commit + t;
    cumulative counting makes the table monotone in both c and t by
    construction.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0 or t_grid[0] != 0.0 or np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must ascend from 0")
    n = model.spec.n

    # at_least[i, c] counts trials with >= c arrivals; derived from the
    # reverse cumulative sum of the arrival-count histogram.
    def at_least_counts(size, rng):
        w_lat, a_lat = _draw_write_side(model, size, rng)
        commit = np.partition(w_lat + a_lat, model.spec.w - 1, axis=1)[:, model.spec.w - 1]
        out = np.zeros((t_grid.size, n + 1), dtype=np.int64)
        for i, t in enumerate(t_grid):
            arrived = (w_lat <= commit[:, None] + t).sum(axis=1)
            hist = np.bincount(arrived, minlength=n + 1)
            out[i] = hist[::-1].cumsum()[::-1]
        return out

    totals = sum(_run_shards(seed, trials, at_least_counts, workers))
    return PropagationProfile(
        w_base=model.spec.w, t_grid=t_grid, table=totals / trials
    )
