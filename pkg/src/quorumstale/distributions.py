"""Composable nonnegative latency distributions.

Each distribution supports vectorized sampling from a numpy Generator,
an exact cdf, and a quantile (smallest x with cdf(x) >= q). All latencies
are in milliseconds throughout the package.

The production presets bundle fitted Pareto + exponential mixtures for two
LinkedIn Voldemort deployments (SSD and spinning disk) and a Yammer Riak
deployment.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from scipy.stats import norm

RandomSource = np.random.Generator

_WEIGHT_TOL = 1e-9
_QUANTILE_TOL = 1e-6


def make_rng(seed: int) -> RandomSource:
    """Seeded random source; equal seeds give identical draw sequences."""
    return np.random.default_rng(seed)


class Distribution:
    """Base class for nonnegative latency distributions."""

    def sample(self, rng: RandomSource, size=None):
        """Draw one value (size=None) or an ndarray of the given shape."""
        raise NotImplementedError

    def cdf(self, x: float) -> float:
        """P(X <= x)."""
        raise NotImplementedError

    def quantile(self, q: float) -> float:
        """Smallest x with cdf(x) >= q."""
        raise NotImplementedError

    def support_max(self) -> float:
        """Upper end of the support; inf for unbounded distributions."""
        return math.inf

    def to_config(self) -> dict:
        """JSON-serializable configuration for this distribution."""
        raise NotImplementedError

    def _check_q(self, q: float):
        if not 0.0 <= q <= 1.0:
            raise ValueError(f"quantile probability must be in [0, 1], got {q}")


@dataclass(frozen=True)
class Exponential(Distribution):
    """Exponential with rate per ms; mean 1/rate."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"exponential rate must be > 0, got {self.rate}")

    def sample(self, rng, size=None):
        return rng.exponential(1.0 / self.rate, size)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x > 0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0)
        return float(out) if out.ndim == 0 else out

    def quantile(self, q):
        self._check_q(q)
        if q == 1.0:
            return math.inf
        return -math.log1p(-q) / self.rate

    def to_config(self):
        return {"type": "exponential", "lambda": self.rate}


@dataclass(frozen=True)
class Pareto(Distribution):
    """Classic Pareto with scale x_m (support minimum) and shape alpha."""

    xm: float
    alpha: float

    def __post_init__(self):
        if not self.xm > 0:
            raise ValueError(f"Pareto scale must be > 0, got {self.xm}")
        if not self.alpha > 0:
            raise ValueError(f"Pareto shape must be > 0, got {self.alpha}")

    def sample(self, rng, size=None):
        # numpy's pareto is the Lomax form on [0, inf); shift to [xm, inf).
        return self.xm * (1.0 + rng.pareto(self.alpha, size))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(
            x >= self.xm, 1.0 - (self.xm / np.maximum(x, self.xm)) ** self.alpha, 0.0
        )
        return float(out) if out.ndim == 0 else out

    def quantile(self, q):
        self._check_q(q)
        if q == 1.0:
            return math.inf
        return self.xm * (1.0 - q) ** (-1.0 / self.alpha)

    def to_config(self):
        return {"type": "pareto", "xm": self.xm, "alpha": self.alpha}


@dataclass(frozen=True)
class Uniform(Distribution):
    """Uniform on [lo, hi] ms."""

    lo: float
    hi: float

    def __post_init__(self):
        if not 0 <= self.lo <= self.hi:
            raise ValueError(f"uniform bounds need 0 <= lo <= hi, got [{self.lo}, {self.hi}]")

    def sample(self, rng, size=None):
        return rng.uniform(self.lo, self.hi, size)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.hi == self.lo:
            out = (x >= self.lo).astype(float)
        else:
            out = np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def quantile(self, q):
        self._check_q(q)
        return self.lo + q * (self.hi - self.lo)

    def support_max(self):
        return self.hi

    def to_config(self):
        return {"type": "uniform", "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class TruncatedNormal(Distribution):
    """Normal(mean, stddev) truncated to [0, inf), sampled by rejection.

    Rejection (rather than clamping) keeps the density shape, which matters
    when comparing fixed-mean, variable-variance models.
    """

    mean: float
    stddev: float

    def __post_init__(self):
        if not self.stddev > 0:
            raise ValueError(f"stddev must be > 0, got {self.stddev}")

    def _mass_below_zero(self) -> float:
        return norm.cdf(-self.mean / self.stddev)

    def sample(self, rng, size=None):
        scalar = size is None
        shape = (1,) if scalar else size
        out = rng.normal(self.mean, self.stddev, shape)
        bad = out < 0
        while bad.any():
            out[bad] = rng.normal(self.mean, self.stddev, int(bad.sum()))
            bad = out < 0
        return float(out[0]) if scalar else out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        below = self._mass_below_zero()
        raw = (norm.cdf((x - self.mean) / self.stddev) - below) / (1.0 - below)
        out = np.where(x < 0, 0.0, raw)
        return float(out) if out.ndim == 0 else out

    def quantile(self, q):
        self._check_q(q)
        below = self._mass_below_zero()
        return float(norm.ppf(below + q * (1.0 - below)) * self.stddev + self.mean)

    def to_config(self):
        return {"type": "truncated_normal", "mean": self.mean, "stddev": self.stddev}


@dataclass(frozen=True)
class Degenerate(Distribution):
    """Point mass at a single value."""

    value: float

    def __post_init__(self):
        if not (self.value >= 0 and math.isfinite(self.value)):
            raise ValueError(f"value must be finite and >= 0, got {self.value}")

    def sample(self, rng, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = (x >= self.value).astype(float)
        return float(out) if out.ndim == 0 else out

    def quantile(self, q):
        self._check_q(q)
        return self.value

    def support_max(self):
        return self.value

    def to_config(self):
        return {"type": "degenerate", "value": self.value}


@dataclass(frozen=True)
class Shifted(Distribution):
    """A base distribution translated right by a nonnegative offset."""

    base: Distribution
    offset: float

    def __post_init__(self):
        if not (self.offset >= 0 and math.isfinite(self.offset)):
            raise ValueError(f"offset must be finite and >= 0, got {self.offset}")

    def sample(self, rng, size=None):
        return self.base.sample(rng, size) + self.offset

    def cdf(self, x):
        return self.base.cdf(x - self.offset)

    def quantile(self, q):
        return self.base.quantile(q) + self.offset

    def support_max(self):
        return self.base.support_max() + self.offset

    def to_config(self):
        return {"type": "shifted", "base": self.base.to_config(), "offset": self.offset}


@dataclass(frozen=True, eq=False)
class Empirical(Distribution):
    """Uniform draws over a stored sample set; nearest-rank quantiles."""

    samples: np.ndarray

    def __eq__(self, other):
        return isinstance(other, Empirical) and np.array_equal(self.samples, other.samples)

    def __hash__(self):
        return hash(self.samples.tobytes())

    def __post_init__(self):
        samples = np.sort(np.asarray(self.samples, dtype=float))
        if samples.size == 0:
            raise ValueError("empirical distribution needs at least one sample")
        if not np.all(np.isfinite(samples)) or np.any(samples < 0):
            raise ValueError("empirical samples must be finite and >= 0")
        object.__setattr__(self, "samples", samples)

    def sample(self, rng, size=None):
        idx = rng.integers(0, self.samples.size, size)
        return self.samples[idx]

    def cdf(self, x):
        out = np.searchsorted(self.samples, x, side="right") / self.samples.size
        return float(out) if np.ndim(out) == 0 else out

    def quantile(self, q):
        self._check_q(q)
        rank = max(math.ceil(q * self.samples.size), 1)
        return float(self.samples[rank - 1])

    def support_max(self):
        return float(self.samples[-1])

    def to_config(self):
        return {"type": "empirical", "samples": self.samples.tolist()}


@dataclass(frozen=True)
class Mixture(Distribution):
    """Probabilistic mixture: draw a component by weight, then draw from it."""

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), d) for w, d in self.components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        if any(w <= 0 for w, _ in comps):
            raise ValueError("mixture weights must be positive")
        total = sum(w for w, _ in comps)
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"mixture weights must sum to 1, got {total}")
        object.__setattr__(self, "components", comps)

    def _weights(self):
        w = np.array([wt for wt, _ in self.components])
        return w / w.sum()

    def sample(self, rng, size=None):
        weights = self._weights()
        if size is None:
            idx = rng.choice(len(self.components), p=weights)
            return self.components[idx][1].sample(rng)
        idx = rng.choice(len(self.components), size=size, p=weights)
        out = np.empty(size)
        for i, (_, dist) in enumerate(self.components):
            mask = idx == i
            count = int(mask.sum())
            if count:
                out[mask] = dist.sample(rng, count)
        return out

    def cdf(self, x):
        return sum(w * d.cdf(x) for w, d in self.components)

    def quantile(self, q):
        self._check_q(q)
        lo = 0.0
        hi = max(1.0, *(min(d.quantile(min(q, 1.0)), 1e18) for _, d in self.components))
        while self.cdf(hi) < q and hi < 1e18:
            hi *= 2.0
        while hi - lo > _QUANTILE_TOL:
            mid = 0.5 * (lo + hi)
            if self.cdf(mid) >= q:
                hi = mid
            else:
                lo = mid
        return hi

    def support_max(self):
        return max(d.support_max() for _, d in self.components)

    def to_config(self):
        return {
            "type": "mixture",
            "components": [
                {"weight": w, "dist": d.to_config()} for w, d in self.components
            ],
        }


def from_config(config: dict) -> Distribution:
    """Build a distribution from its JSON configuration."""
    kind = config.get("type")
    if kind == "exponential":
        return Exponential(config["lambda"])
    if kind == "pareto":
        return Pareto(config["xm"], config["alpha"])
    if kind == "uniform":
        return Uniform(config["lo"], config["hi"])
    if kind == "truncated_normal":
        return TruncatedNormal(config["mean"], config["stddev"])
    if kind == "degenerate":
        return Degenerate(config["value"])
    if kind == "shifted":
        return Shifted(from_config(config["base"]), config["offset"])
    if kind == "empirical":
        return Empirical(np.asarray(config["samples"], dtype=float))
    if kind == "mixture":
        return Mixture(
            tuple((c["weight"], from_config(c["dist"])) for c in config["components"])
        )
    raise ValueError(f"unknown distribution type: {kind!r}")


def load_config_file(path) -> Distribution:
    """Read a distribution from a JSON configuration file."""
    return from_config(json.loads(Path(path).read_text()))


def load_empirical(samples: Sequence[float]) -> Empirical:
    """Wrap observed latency samples as an empirical distribution."""
    return Empirical(np.asarray(list(samples), dtype=float))


def load_empirical_file(path) -> Empirical:
    """Read newline-delimited decimal millisecond values into an Empirical."""
    values = [
        float(line) for line in Path(path).read_text().splitlines() if line.strip()
    ]
    return load_empirical(values)


@dataclass(frozen=True)
class LatencySet:
    """The four one-way delay distributions of a deployment.

    Attributes:
        w: Write request delay, coordinator to replica.
        a: Write acknowledgment delay, replica to coordinator.
        r: Read request delay.
        s: Read response delay.
    """

    w: Distribution
    a: Distribution
    r: Distribution
    s: Distribution


def _lnkd_ssd_leg() -> Mixture:
    return Mixture(((0.9122, Pareto(0.235, 10.0)), (0.0878, Exponential(1.66))))


def _presets() -> dict:
    ssd = _lnkd_ssd_leg()
    disk_w = Mixture(((0.38, Pareto(1.05, 1.51)), (0.62, Exponential(0.183))))
    ymmr_w = Mixture(((0.939, Pareto(3.0, 3.35)), (0.061, Exponential(0.0028))))
    ymmr_ars = Mixture(((0.982, Pareto(1.5, 3.8)), (0.018, Exponential(0.0217))))
    return {
        "lnkd-ssd": LatencySet(w=ssd, a=ssd, r=ssd, s=ssd),
        "lnkd-disk": LatencySet(w=disk_w, a=ssd, r=ssd, s=ssd),
        "ymmr": LatencySet(w=ymmr_w, a=ymmr_ars, r=ymmr_ars, s=ymmr_ars),
    }


PRESET_NAMES = tuple(sorted(_presets()))


def preset(name: str) -> LatencySet:
    """Production latency fits by name: lnkd-ssd, lnkd-disk, or ymmr."""
    table = _presets()
    key = name.strip().lower()
    if key not in table:
        raise KeyError(f"unknown preset {name!r}; known: {', '.join(sorted(table))}")
    return table[key]
