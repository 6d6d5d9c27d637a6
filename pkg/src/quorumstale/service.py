"""HTTP service exposing the closed forms, simulator, and analysis drivers.

Stateless JSON API under /api; every response echoes the fully resolved
scenario (including the seed, generated if absent) so results are
reproducible. Requested trial counts are clamped to the service cap with an
explicit warning, never silently.
"""

from __future__ import annotations

import time

from fastapi import FastAPI, HTTPException, Request

from . import analysis, quorum, simulator
from .quorum import ConfigurationError, QuorumSpec
from .scenario import Scenario, ScenarioError, parse_scenario, preset_parameters

DEFAULT_MAX_TRIALS = 10_000_000


def _bad_request(field: str, message: str):
    raise HTTPException(status_code=400, detail={"field": field, "message": message})


def _resolve(body, max_trials: int) -> tuple[Scenario, list]:
    if not isinstance(body, dict):
        _bad_request("<root>", "request body must be a JSON object")
    warnings = []
    requested = body.get("trials")
    try:
        scenario = parse_scenario(body, max_trials=max_trials)
    except ScenarioError as exc:
        _bad_request(exc.field, str(exc))
    except (ConfigurationError, ValueError, TypeError) as exc:
        _bad_request("<body>", str(exc))
    if requested is not None and int(requested) > max_trials:
        warnings.append(
            f"trials clamped from {int(requested)} to the service cap of {max_trials}"
        )
    return scenario, warnings


def _result(scenario: Scenario, payload, started: float, warnings):
    body = {
        "config": scenario.echo(),
        "result": payload,
        "timing_ms": (time.perf_counter() - started) * 1000.0,
    }
    if warnings:
        body["warnings"] = warnings
    return body


def _estimate_json(est: simulator.Estimate) -> dict:
    return {
        "p_stale": est.p_hat,
        "p_consistent": 1.0 - est.p_hat,
        "trials": est.trials,
        "ci95_lo": est.ci95_lo,
        "ci95_hi": est.ci95_hi,
    }


def create_app(max_trials: int = DEFAULT_MAX_TRIALS, static_dir=None) -> FastAPI:
    app = FastAPI(title="quorumstale", version="0.1.0")

    @app.get("/api/presets")
    def presets():
        return {"presets": preset_parameters()}

    @app.post("/api/closed-form")
    async def closed_form(request: Request):
        body = await request.json()
        quorum_block = body.get("quorum", body)
        try:
            spec = QuorumSpec(
                n=int(quorum_block["n"]), r=int(quorum_block["r"]), w=int(quorum_block["w"])
            )
            k = int(body.get("k", 1))
            ratio = body.get("ratio")
            if ratio is not None:
                p = quorum.monotonic_reads_miss(
                    spec, float(ratio), strict=bool(body.get("strict", False))
                )
            else:
                p = quorum.k_staleness_miss(spec, k)
        except KeyError as exc:
            _bad_request(str(exc.args[0]), "required field is missing")
        except (ConfigurationError, ValueError) as exc:
            _bad_request("quorum", str(exc))
        return {
            "config": {"quorum": {"n": spec.n, "r": spec.r, "w": spec.w}, "k": k},
            "result": {"p_stale": p, "p_consistent": 1.0 - p},
        }

    @app.post("/api/estimate")
    async def estimate(request: Request):
        started = time.perf_counter()
        scenario, warnings = _resolve(await request.json(), max_trials)
        t = scenario.t if scenario.t is not None else 0.0
        if scenario.k is not None:
            est = simulator.kt_estimate(
                scenario.model, t, scenario.k, scenario.trials, scenario.seed
            )
        else:
            est = simulator.estimate_staleness(
                scenario.model, t, scenario.trials, scenario.seed
            )
        return _result(scenario, _estimate_json(est), started, warnings)

    @app.post("/api/latency")
    async def latency(request: Request):
        started = time.perf_counter()
        scenario, warnings = _resolve(await request.json(), max_trials)
        try:
            table = simulator.estimate_latency(scenario.model, scenario.trials, scenario.seed)
        except ValueError as exc:
            _bad_request("trials", str(exc))
        payload = {
            "read_ms": {str(k): v for k, v in table.read_ms.items()},
            "write_ms": {str(k): v for k, v in table.write_ms.items()},
            "trials": table.trials,
        }
        return _result(scenario, payload, started, warnings)

    @app.post("/api/sweep")
    async def sweep(request: Request):
        started = time.perf_counter()
        scenario, warnings = _resolve(await request.json(), max_trials)
        if scenario.t_grid is None:
            _bad_request("t_grid", "sweep requires a t grid")
        curve = analysis.sweep_t(
            scenario.model, scenario.t_grid, scenario.trials, scenario.seed
        )
        return _result(scenario, {"points": curve.to_rows()}, started, warnings)

    @app.post("/api/sla")
    async def sla(request: Request):
        started = time.perf_counter()
        scenario, warnings = _resolve(await request.json(), max_trials)
        block = scenario.sla or {}
        if "min_consistency" not in block or "at_t_ms" not in block:
            _bad_request("sla", "needs min_consistency and at_t_ms")
        try:
            constraint = analysis.SlaConstraint(
                min_consistency=float(block["min_consistency"]),
                at_t_ms=float(block["at_t_ms"]),
                latency_percentile=float(block.get("latency_percentile", 99.9)),
                objective=block.get("objective", "combined"),
                read_weight=float(block.get("read_weight", 1.0)),
                write_weight=float(block.get("write_weight", 1.0)),
                min_w_for_durability=int(block.get("min_w_for_durability", 1)),
                n_range=tuple(block.get("n_range", [scenario.model.spec.n])),
            )
        except ValueError as exc:
            _bad_request("sla", str(exc))
        outcome = analysis.sla_search(
            scenario.delays, constraint, scenario.trials, scenario.seed,
            topology=scenario.model.topology,
        )
        payload = {
            "feasible": outcome.feasible,
            "rows": outcome.to_rows(),
            "winner": outcome.winner.to_row() if outcome.winner else None,
            "closest": outcome.closest.to_row() if outcome.closest else None,
        }
        return _result(scenario, payload, started, warnings)

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
