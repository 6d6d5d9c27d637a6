"""Scenario configuration: the JSON schema shared by the CLI and the service.

A scenario names a quorum configuration, the four one-way delay
distributions (directly or via a preset), a topology, a trial budget, and a
seed. Seeds are mandatory once resolved: callers may omit the seed, in which
case one is generated and echoed back, so every result stays reproducible.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass

from . import distributions as dist
from .distributions import LatencySet
from .quorum import QuorumSpec
from .simulator import DEFAULT_WAN_EXTRA_MS, Uniform, Wan, WarsModel


class ScenarioError(ValueError):
    """Invalid scenario configuration; message names the offending field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


#: Scenario-level presets: the three production fits plus the WAN topology
#: variant (spinning-disk delays, one replica per datacenter, 75ms remote hop).
SCENARIO_PRESETS = ("lnkd-ssd", "lnkd-disk", "ymmr", "wan")


def resolve_preset(name: str):
    """Map a scenario preset name to (LatencySet, Topology)."""
    key = name.strip().lower()
    if key == "wan":
        return dist.preset("lnkd-disk"), Wan(DEFAULT_WAN_EXTRA_MS)
    try:
        return dist.preset(key), Uniform()
    except KeyError:
        raise ScenarioError(
            "preset", f"unknown preset {name!r}; known: {', '.join(SCENARIO_PRESETS)}"
        )


def preset_parameters() -> dict:
    """Preset registry with distribution parameters, for the presets endpoint."""
    out = {}
    for name in SCENARIO_PRESETS:
        delays, topology = resolve_preset(name)
        out[name] = {
            "distributions": {
                "w": delays.w.to_config(),
                "a": delays.a.to_config(),
                "r": delays.r.to_config(),
                "s": delays.s.to_config(),
            },
            "topology": _topology_config(topology),
        }
    return out


def _topology_config(topology) -> dict:
    if isinstance(topology, Wan):
        return {"type": "wan", "remote_extra_ms": topology.remote_extra_ms}
    return {"type": "uniform"}


def _parse_topology(config) -> Uniform | Wan:
    if config is None:
        return Uniform()
    kind = config.get("type", "uniform")
    if kind == "uniform":
        return Uniform()
    if kind == "wan":
        return Wan(float(config.get("remote_extra_ms", DEFAULT_WAN_EXTRA_MS)))
    raise ScenarioError("topology.type", f"unknown topology {kind!r}")


@dataclass(frozen=True)
class Scenario:
    """A fully resolved scenario, reproducible from its echoed config."""

    model: WarsModel
    trials: int
    seed: int
    t: float | None
    t_grid: tuple | None
    k: int | None
    sla: dict | None
    preset: str | None

    def echo(self) -> dict:
        """The resolved configuration, sufficient to reproduce any result."""
        config = {
            "quorum": {"n": self.model.spec.n, "r": self.model.spec.r, "w": self.model.spec.w},
            "topology": _topology_config(self.model.topology),
            "trials": self.trials,
            "seed": self.seed,
        }
        if self.preset:
            config["preset"] = self.preset
        else:
            config["distributions"] = {
                "w": self.model.write_request.to_config(),
                "a": self.model.write_ack.to_config(),
                "r": self.model.read_request.to_config(),
                "s": self.model.read_response.to_config(),
            }
        if self.t is not None:
            config["t"] = self.t
        if self.t_grid is not None:
            config["t_grid"] = list(self.t_grid)
        if self.k is not None:
            config["k"] = self.k
        if self.sla is not None:
            config["sla"] = self.sla
        return config

    @property
    def delays(self) -> LatencySet:
        return LatencySet(
            w=self.model.write_request,
            a=self.model.write_ack,
            r=self.model.read_request,
            s=self.model.read_response,
        )


def _require(config: dict, key: str):
    if key not in config:
        raise ScenarioError(key, "required field is missing")
    return config[key]


def parse_scenario(config: dict, max_trials: int | None = None) -> Scenario:
    """Validate and resolve a scenario configuration dict.

    Exactly one of `preset` and `distributions` must be present. Trials are
    clamped to max_trials when given; a missing seed is generated so it can
    be echoed back.
    """
    if not isinstance(config, dict):
        raise ScenarioError("<root>", "scenario must be a JSON object")

    quorum = _require(config, "quorum")
    try:
        spec = QuorumSpec(
            n=int(_require(quorum, "n")),
            r=int(_require(quorum, "r")),
            w=int(_require(quorum, "w")),
        )
    except ScenarioError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioError("quorum", str(exc))

    has_preset = "preset" in config and config["preset"] is not None
    has_dists = "distributions" in config and config["distributions"] is not None
    if has_preset == has_dists:
        raise ScenarioError(
            "preset", "exactly one of 'preset' and 'distributions' must be given"
        )

    preset_name = None
    if has_preset:
        preset_name = str(config["preset"]).strip().lower()
        delays, topology = resolve_preset(preset_name)
        if "topology" in config and config["topology"] is not None:
            topology = _parse_topology(config["topology"])
    else:
        spec_dists = config["distributions"]
        try:
            delays = LatencySet(
                w=dist.from_config(_require(spec_dists, "w")),
                a=dist.from_config(_require(spec_dists, "a")),
                r=dist.from_config(_require(spec_dists, "r")),
                s=dist.from_config(_require(spec_dists, "s")),
            )
        except ScenarioError:
            raise
        except (TypeError, KeyError, ValueError) as exc:
            raise ScenarioError("distributions", str(exc))
        topology = _parse_topology(config.get("topology"))

    trials = int(config.get("trials", 100_000))
    if trials < 1:
        raise ScenarioError("trials", f"must be >= 1, got {trials}")
    if max_trials is not None and trials > max_trials:
        trials = max_trials

    seed = config.get("seed")
    if seed is None:
        seed = secrets.randbits(63)
    seed = int(seed)

    t = config.get("t")
    if t is not None:
        t = float(t)
        if t < 0:
            raise ScenarioError("t", f"must be >= 0, got {t}")

    t_grid = config.get("t_grid")
    if t_grid is not None:
        if len(t_grid) == 0:
            raise ScenarioError("t_grid", "must be non-empty")
        t_grid = tuple(float(x) for x in t_grid)
        if any(x < 0 for x in t_grid):
            raise ScenarioError("t_grid", "grid times must be >= 0")

    k = config.get("k")
    if k is not None:
        k = int(k)
        if k < 1:
            raise ScenarioError("k", f"must be >= 1, got {k}")

    sla = config.get("sla")
    if sla is not None and not isinstance(sla, dict):
        raise ScenarioError("sla", "must be an object")

    model = WarsModel(spec, delays.w, delays.a, delays.r, delays.s, topology)
    return Scenario(
        model=model,
        trials=trials,
        seed=seed,
        t=t,
        t_grid=t_grid,
        k=k,
        sla=sla,
        preset=preset_name,
    )
