"""Command-line front end: closed forms, simulation, sweeps, tables, SLA search.

Exit codes: 0 success, 2 usage error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, quorum, simulator
from .quorum import PropagationProfile, QuorumSpec
from .scenario import ScenarioError, parse_scenario


def _sig12(x: float) -> str:
    return f"{x:.12g}"


def _load_profile(path) -> PropagationProfile:
    config = json.loads(Path(path).read_text())
    return PropagationProfile(
        w_base=int(config["w_base"]),
        t_grid=np.asarray(config["t_grid"], dtype=float),
        table=np.asarray(config["table"], dtype=float),
    )


def _scenario_from_args(args) -> dict:
    """Assemble a scenario dict from --config plus inline overrides."""
    config = {}
    if getattr(args, "config", None):
        config = json.loads(Path(args.config).read_text())
    if getattr(args, "preset", None):
        config["preset"] = args.preset
        config.pop("distributions", None)
    for key in ("n", "r", "w"):
        value = getattr(args, key, None)
        if value is not None:
            config.setdefault("quorum", {})[key] = value
    for key in ("t", "trials", "seed", "k"):
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    if getattr(args, "t_grid", None):
        config["t_grid"] = [float(x) for x in args.t_grid.split(",")]
    return config


def cmd_closed_form(args) -> int:
    spec = QuorumSpec(n=args.n, r=args.r, w=args.w)
    if args.profile_file:
        profile = _load_profile(args.profile_file)
        t = args.t if args.t is not None else 0.0
        if args.k is not None:
            p = quorum.kt_staleness_miss(spec, profile, t, args.k)
        else:
            p = quorum.t_visibility_miss(spec, profile, t)
    elif args.ratio is not None:
        p = quorum.monotonic_reads_miss(spec, args.ratio, strict=args.strict)
    elif args.k is not None:
        p = quorum.k_staleness_miss(spec, args.k)
    else:
        p = quorum.quorum_miss_probability(spec)
    print(_sig12(p))
    if args.load:
        k = args.k if args.k is not None else 1
        print(_sig12(quorum.k_staleness_load_bound(p, k, spec.n)))
    return 0


def _estimate_payload(scenario, est) -> dict:
    return {
        "config": scenario.echo(),
        "result": {
            "p_stale": est.p_hat,
            "p_consistent": 1.0 - est.p_hat,
            "trials": est.trials,
            "ci95_lo": est.ci95_lo,
            "ci95_hi": est.ci95_hi,
        },
    }


def cmd_simulate(args) -> int:
    scenario = parse_scenario(_scenario_from_args(args))
    if args.latency:
        table = simulator.estimate_latency(
            scenario.model, scenario.trials, scenario.seed, workers=args.workers
        )
        payload = {
            "config": scenario.echo(),
            "result": {"read_ms": table.read_ms, "write_ms": table.write_ms},
        }
    else:
        t = scenario.t if scenario.t is not None else 0.0
        if scenario.k is not None:
            est = simulator.kt_estimate(
                scenario.model, t, scenario.k, scenario.trials, scenario.seed,
                workers=args.workers,
            )
        else:
            est = simulator.estimate_staleness(
                scenario.model, t, scenario.trials, scenario.seed, workers=args.workers
            )
        payload = _estimate_payload(scenario, est)
    print(json.dumps(payload, indent=2))
    return 0


def _write_export(path, text: str):
    out = Path(path)
    try:
        out.write_text(text)
    except OSError:
        out.unlink(missing_ok=True)  # never leave a partial file behind
        raise


def cmd_sweep(args) -> int:
    scenario = parse_scenario(_scenario_from_args(args))
    if scenario.t_grid is None:
        raise ScenarioError("t_grid", "sweep requires a t grid")
    curve = analysis.sweep_t(
        scenario.model, scenario.t_grid, scenario.trials, scenario.seed, workers=args.workers
    )
    text = analysis.export_rows(
        curve.to_rows(), args.format,
        metadata={"seed": scenario.seed, "trials": scenario.trials},
    )
    _write_export(args.out, text)
    target = args.target
    crossing = curve.crossing(target)
    label = "not-reached" if crossing == simulator.NOT_REACHED else f"{crossing:.3f} ms"
    print(f"consistency {target} crossing: {label} ({args.out})")
    return 0


def cmd_table(args) -> int:
    scenario = parse_scenario(_scenario_from_args(args))
    rows = analysis.tradeoff_table(
        scenario.delays, scenario.model.spec.n, scenario.trials, scenario.seed,
        topology=scenario.model.topology, workers=args.workers,
    )
    text = analysis.export_rows(
        [row.to_row() for row in rows], args.format,
        metadata={"seed": scenario.seed, "trials": scenario.trials},
    )
    _write_export(args.out, text)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_sla(args) -> int:
    scenario = parse_scenario(_scenario_from_args(args))
    sla = dict(scenario.sla or {})
    if args.min_consistency is not None:
        sla["min_consistency"] = args.min_consistency
    if args.at_t is not None:
        sla["at_t_ms"] = args.at_t
    if "min_consistency" not in sla or "at_t_ms" not in sla:
        raise ScenarioError("sla", "needs min_consistency and at_t_ms")
    constraint = analysis.SlaConstraint(
        min_consistency=float(sla["min_consistency"]),
        at_t_ms=float(sla["at_t_ms"]),
        latency_percentile=float(sla.get("latency_percentile", 99.9)),
        objective=sla.get("objective", "combined"),
        read_weight=float(sla.get("read_weight", 1.0)),
        write_weight=float(sla.get("write_weight", 1.0)),
        min_w_for_durability=int(sla.get("min_w_for_durability", 1)),
        n_range=tuple(sla.get("n_range", [scenario.model.spec.n])),
    )
    outcome = analysis.sla_search(
        scenario.delays, constraint, scenario.trials, scenario.seed,
        topology=scenario.model.topology, workers=args.workers,
    )
    if args.out:
        text = analysis.export_rows(
            outcome.to_rows(), args.format,
            metadata={"seed": scenario.seed, "trials": scenario.trials},
        )
        _write_export(args.out, text)
    if outcome.winner:
        win = outcome.winner
        print(
            f"winner: n={win.n} r={win.r} w={win.w} "
            f"objective={win.objective_value:.3f} ms consistency={win.consistency.p_hat:.6f}"
        )
    else:
        closest = outcome.closest
        detail = (
            f"closest: n={closest.n} r={closest.r} w={closest.w} "
            f"consistency={closest.consistency.p_hat:.6f}"
            if closest
            else "no configurations met the durability floor"
        )
        print(f"infeasible; {detail}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(max_trials=args.max_trials, static_dir=args.static_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _add_scenario_flags(parser):
    parser.add_argument("--config", help="scenario config JSON file")
    parser.add_argument("--preset", help="preset name (lnkd-ssd, lnkd-disk, ymmr, wan)")
    parser.add_argument("--n", type=int)
    parser.add_argument("--r", type=int)
    parser.add_argument("--w", type=int)
    parser.add_argument("--t", type=float)
    parser.add_argument("--k", type=int)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quorumstale",
        description="Staleness prediction for Dynamo-style partial quorums",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cf = sub.add_parser("closed-form", help="exact staleness probabilities")
    cf.add_argument("--n", type=int, required=True)
    cf.add_argument("--r", type=int, required=True)
    cf.add_argument("--w", type=int, required=True)
    cf.add_argument("--k", type=int)
    cf.add_argument("--ratio", type=float, help="writes per read, for monotonic reads")
    cf.add_argument("--strict", action="store_true")
    cf.add_argument("--profile-file", help="propagation profile JSON for t-visibility")
    cf.add_argument("--t", type=float)
    cf.add_argument("--load", action="store_true", help="also print the load lower bound")
    cf.set_defaults(handler=cmd_closed_form)

    sim = sub.add_parser("simulate", help="Monte Carlo staleness / latency estimate")
    _add_scenario_flags(sim)
    sim.add_argument("--latency", action="store_true", help="report latency percentiles")
    sim.set_defaults(handler=cmd_simulate)

    sweep = sub.add_parser("sweep", help="consistency-vs-t sweep, exported to file")
    _add_scenario_flags(sweep)
    sweep.add_argument("--t-grid", help="comma-separated grid times in ms")
    sweep.add_argument("--target", type=float, default=0.999)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    sweep.set_defaults(handler=cmd_sweep)

    table = sub.add_parser("table", help="latency/staleness trade-off table")
    _add_scenario_flags(table)
    table.add_argument("--out", required=True)
    table.add_argument("--format", choices=("csv", "json"), default="csv")
    table.set_defaults(handler=cmd_table)

    sla = sub.add_parser("sla", help="search configurations against an SLA")
    _add_scenario_flags(sla)
    sla.add_argument("--min-consistency", type=float)
    sla.add_argument("--at-t", type=float)
    sla.add_argument("--out")
    sla.add_argument("--format", choices=("csv", "json"), default="csv")
    sla.set_defaults(handler=cmd_sla)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8321)
    serve.add_argument("--max-trials", type=int, default=10_000_000)
    serve.add_argument("--static-dir", help="directory of UI assets to serve at /")
    serve.set_defaults(handler=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ScenarioError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
