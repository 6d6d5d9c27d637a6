"""Sweep drivers, the latency/staleness trade-off table, and SLA search.

All drivers are deterministic for a fixed (seed, trials) pair: every
evaluation point derives its own seed from the master seed and the point
index, so points are order-independent and safe to parallelize.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .distributions import Distribution, LatencySet
from .quorum import QuorumSpec
from .simulator import (
    NOT_REACHED,
    Estimate,
    WarsModel,
    estimate_latency,
    estimate_staleness,
    isotonic_nondecreasing,
    t_for_target,
    _point_seed,
)


@dataclass(frozen=True)
class SweepPoint:
    t: float
    estimate: Estimate  # staleness estimate
    consistency: float
    smoothed_consistency: float


@dataclass(frozen=True)
class SweepCurve:
    """Consistency-vs-t curve with raw and isotonic-smoothed series."""

    label: str
    points: tuple
    trials: int
    seed: int

    def to_rows(self):
        return [
            {
                "label": self.label,
                "t_ms": p.t,
                "consistency": p.consistency,
                "consistency_smoothed": p.smoothed_consistency,
                "ci95_lo": 1.0 - p.estimate.ci95_hi,
                "ci95_hi": 1.0 - p.estimate.ci95_lo,
                "trials": self.trials,
                "seed": self.seed,
            }
            for p in self.points
        ]

    def crossing(self, target: float) -> float:
        """First t where the smoothed curve reaches target; NOT_REACHED if never."""
        ts = [p.t for p in self.points]
        cs = [p.smoothed_consistency for p in self.points]
        for i, c in enumerate(cs):
            if c >= target:
                if i == 0 or cs[i] <= cs[i - 1]:
                    return ts[i]
                frac = (target - cs[i - 1]) / (cs[i] - cs[i - 1])
                return ts[i - 1] + frac * (ts[i] - ts[i - 1])
        return NOT_REACHED


def _curve(model, t_grid, trials, seed, label, workers=None) -> SweepCurve:
    estimates = [
        estimate_staleness(model, float(t), trials, _point_seed(seed, i), workers)
        for i, t in enumerate(t_grid)
    ]
    raw = [1.0 - e.p_hat for e in estimates]
    smoothed = isotonic_nondecreasing(raw)
    points = tuple(
        SweepPoint(float(t), e, c, float(s))
        for t, e, c, s in zip(t_grid, estimates, raw, smoothed)
    )
    return SweepCurve(label=label, points=points, trials=trials, seed=seed)


def sweep_t(model: WarsModel, t_grid, trials: int, seed: int, workers=None) -> SweepCurve:
    """Consistency estimate at each grid t for a fixed model."""
    if len(t_grid) == 0:
        raise ValueError("t_grid must be non-empty")
    return _curve(model, t_grid, trials, seed, label="t-sweep", workers=workers)


def sweep_write_distribution(
    shared: Distribution,
    write_dists,
    spec: QuorumSpec,
    t_grid,
    trials: int,
    seed: int,
    labels=None,
    workers=None,
):
    """One consistency curve per candidate write-request distribution.

    The ack, read request, and read response legs all use `shared`.
    """
    if len(write_dists) == 0:
        raise ValueError("need at least one write distribution")
    labels = labels or [f"w[{i}]" for i in range(len(write_dists))]
    curves = []
    for i, (w_dist, label) in enumerate(zip(write_dists, labels)):
        model = WarsModel(spec, w_dist, shared, shared, shared)
        curves.append(_curve(model, t_grid, trials, _point_seed(seed, 10_000 + i), label, workers))
    return curves


@dataclass(frozen=True)
class ReplicationSweepEntry:
    n: int
    curve: SweepCurve
    t_at_target: float


def sweep_replication(
    delays: LatencySet,
    n_values,
    t_grid,
    trials: int,
    seed: int,
    r: int = 1,
    w: int = 1,
    target: float = 0.999,
    trials_per_point: int | None = None,
    workers=None,
):
    """Curves and target crossings while varying the replica count.

    Defaults to r = w = 1; other quorum sizes are permitted but sweep the
    same axis.
    """
    entries = []
    for i, n in enumerate(n_values):
        model = WarsModel(
            QuorumSpec(n=n, r=r, w=w), delays.w, delays.a, delays.r, delays.s
        )
        curve = _curve(model, t_grid, trials, _point_seed(seed, 20_000 + i), f"n={n}", workers)
        t_at = t_for_target(
            model, target, trials_per_point or trials, _point_seed(seed, 30_000 + i),
            workers=workers,
        )
        entries.append(ReplicationSweepEntry(n=n, curve=curve, t_at_target=t_at))
    return entries


@dataclass(frozen=True)
class TradeoffRow:
    """One (r, w) row of the latency/staleness trade-off table."""

    r: int
    w: int
    l_r_999: float
    l_w_999: float
    t_999: float  # NOT_REACHED when the target was never met

    def to_row(self):
        return {
            "r": self.r,
            "w": self.w,
            "read_ms_p999": self.l_r_999,
            "write_ms_p999": self.l_w_999,
            "t_999_ms": "not-reached" if self.t_999 == NOT_REACHED else self.t_999,
        }


def default_rw_pairs(n: int):
    """The (r, w) enumeration used for the trade-off table."""
    pairs = [(1, 1), (1, 2), (2, 1), (2, 2)]
    if n >= 3:
        pairs += [(3, 1), (1, 3)]
    return [(r, w) for r, w in pairs if r <= n and w <= n]


def tradeoff_table(
    delays: LatencySet,
    n: int,
    trials: int,
    seed: int,
    pairs=None,
    target: float = 0.999,
    topology=None,
    workers=None,
):
    """Latency and t-visibility per (r, w) pair at fixed n."""
    from .simulator import Uniform

    topology = topology or Uniform()
    pairs = pairs or default_rw_pairs(n)
    rows = []
    for i, (r, w) in enumerate(pairs):
        model = WarsModel(
            QuorumSpec(n=n, r=r, w=w), delays.w, delays.a, delays.r, delays.s, topology
        )
        latency = estimate_latency(
            model, trials, _point_seed(seed, 40_000 + i), percentiles=(99.9,), workers=workers
        )
        if model.spec.strict:
            t999 = 0.0
        else:
            t999 = t_for_target(model, target, trials, _point_seed(seed, 50_000 + i), workers=workers)
        rows.append(
            TradeoffRow(
                r=r, w=w, l_r_999=latency.read_at(99.9), l_w_999=latency.write_at(99.9), t_999=t999
            )
        )
    return rows


@dataclass(frozen=True)
class SlaConstraint:
    """Feasibility constraints and objective for the configuration search."""

    min_consistency: float
    at_t_ms: float
    latency_percentile: float = 99.9
    objective: str = "combined"  # read | write | combined
    read_weight: float = 1.0
    write_weight: float = 1.0
    min_w_for_durability: int = 1
    n_range: tuple = (3,)

    def __post_init__(self):
        if self.objective not in ("read", "write", "combined"):
            raise ValueError(f"unknown objective {self.objective!r}")
        if not 0 < self.min_consistency < 1:
            raise ValueError("min_consistency must be in (0, 1)")


@dataclass(frozen=True)
class SlaRow:
    n: int
    r: int
    w: int
    consistency: Estimate  # estimate of P(consistent read) at the constraint's t
    feasible: bool
    read_ms: float
    write_ms: float
    objective_value: float

    def to_row(self):
        return {
            "n": self.n,
            "r": self.r,
            "w": self.w,
            "consistency": self.consistency.p_hat,
            "consistency_ci95_lo": self.consistency.ci95_lo,
            "feasible": self.feasible,
            "read_ms": self.read_ms,
            "write_ms": self.write_ms,
            "objective": self.objective_value,
        }


@dataclass(frozen=True)
class SlaOutcome:
    rows: tuple
    winner: SlaRow | None
    closest: SlaRow | None  # best consistency among infeasible rows

    @property
    def feasible(self) -> bool:
        return self.winner is not None

    def to_rows(self):
        return [r.to_row() for r in self.rows]


def sla_search(
    delays: LatencySet,
    constraint: SlaConstraint,
    trials: int,
    seed: int,
    topology=None,
    workers=None,
) -> SlaOutcome:
    """Exhaustive search over (n, r, w) for the best feasible configuration.

    Feasibility uses the Wilson lower bound of the consistency estimate, so
    answers are conservative. The configuration space is O(n^2) per n, small
    enough to enumerate outright.
    """
    from .simulator import Uniform

    topology = topology or Uniform()
    rows = []
    idx = 0
    for n in constraint.n_range:
        for r in range(1, n + 1):
            for w in range(max(1, constraint.min_w_for_durability), n + 1):
                model = WarsModel(
                    QuorumSpec(n=n, r=r, w=w),
                    delays.w, delays.a, delays.r, delays.s, topology,
                )
                stale = estimate_staleness(
                    model, constraint.at_t_ms, trials, _point_seed(seed, idx), workers
                )
                consistency = stale.complement()
                feasible = consistency.ci95_lo >= constraint.min_consistency
                latency = estimate_latency(
                    model, trials, _point_seed(seed, 100_000 + idx),
                    percentiles=(constraint.latency_percentile,), workers=workers,
                )
                read_ms = latency.read_at(constraint.latency_percentile)
                write_ms = latency.write_at(constraint.latency_percentile)
                if constraint.objective == "read":
                    objective = read_ms
                elif constraint.objective == "write":
                    objective = write_ms
                else:
                    objective = (
                        constraint.read_weight * read_ms
                        + constraint.write_weight * write_ms
                    )
                rows.append(
                    SlaRow(n, r, w, consistency, feasible, read_ms, write_ms, objective)
                )
                idx += 1

    feasible_rows = sorted(
        (row for row in rows if row.feasible), key=lambda row: row.objective_value
    )
    winner = feasible_rows[0] if feasible_rows else None
    closest = None
    if winner is None and rows:
        closest = max(rows, key=lambda row: row.consistency.p_hat)
    return SlaOutcome(rows=tuple(rows), winner=winner, closest=closest)


def export_rows(rows, fmt: str, metadata: dict | None = None, columns=None) -> str:
    """Serialize a list of row dicts as CSV or JSON.

    CSV column order follows the keys of the first row; metadata (seed,
    trials, and anything else needed to reproduce the run) is embedded as
    `# key=value` header comments for CSV and a sibling object for JSON.
    """
    metadata = metadata or {}
    if fmt == "json":
        return json.dumps({"metadata": metadata, "rows": rows}, indent=2)
    if fmt == "csv":
        buf = io.StringIO()
        for key, value in metadata.items():
            buf.write(f"# {key}={value}\n")
        columns = list(rows[0].keys()) if rows else list(columns or [])
        writer = csv.DictWriter(buf, fieldnames=columns)
        if columns:
            writer.writeheader()
            writer.writerows(rows)
        return buf.getvalue()
    raise ValueError(f"unknown export format {fmt!r}; use csv or json")


def parse_exported_csv(text: str):
    """Re-parse an exported CSV back into (metadata, rows) for round-trips."""
    metadata = {}
    lines = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            metadata[key] = value
        elif line:
            lines.append(line)
    rows = list(csv.DictReader(lines))
    return metadata, rows
