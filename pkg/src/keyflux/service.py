"""Local HTTP+JSON facade over the analysis pipeline.

Stateless: identical requests produce identical bodies (modulo the
reported solve time). A small structural memo keeps interactive
exploration snappy, and a bounded worker pool caps concurrent solves;
excess requests queue in submission order.

Status codes: 400 invalid body, 422 parameter out of range, 507 state
cap exceeded, 500 solver failure.
"""

from __future__ import annotations

import json
import os
import threading
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse

from .analysis import (
    PHASES,
    AnalysisConfig,
    StrategyAnalysis,
    analyze_strategy,
)
from .models import (
    DEFAULT_STATE_CAP,
    DEFAULT_THRESHOLDS,
    KINDS,
    THRESHOLD_UNITS,
    NetworkParams,
    StateSpaceCapExceeded,
    StrategySpec,
    normalize_kind,
)
from .solvers import SolverConfig, SolverError

DEFAULT_SOLVE_POOL = 4
MEMO_CAPACITY = 64


class RequestError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _bad(message: str) -> RequestError:
    return RequestError(400, message)


def _unprocessable(message: str) -> RequestError:
    return RequestError(422, message)


_PARAM_FIELDS = {
    "max": ("max", int),
    "rJoin": ("r_join", float),
    "rLeave": ("r_leave", float),
    "rMessage": ("r_message", float),
    "pComp": ("p_comp", float),
    "k": ("erlang_k", int),
}

_CONFIG_FIELDS = {
    "daysPerMonth": ("days_per_month", int),
    "horizonMonths": ("horizon_months", int),
    "stabilisationEpsilon": ("stabilisation_epsilon", float),
    "observationMonths": ("observation_months", int),
    "stabilisationMode": ("stabilisation_mode", str),
}


def _parse_params(raw: object) -> tuple[NetworkParams, int | None, int]:
    """Network parameter overrides from a request body; returns the params,
    the Erlang phase override and the state cap."""
    if raw is None:
        return NetworkParams(), None, DEFAULT_STATE_CAP
    if not isinstance(raw, dict):
        raise _bad("params must be an object")
    kwargs = {}
    erlang_k = None
    state_cap = DEFAULT_STATE_CAP
    for key, value in raw.items():
        if key == "stateCap":
            try:
                state_cap = int(value)
            except (TypeError, ValueError):
                raise _bad("stateCap must be an integer")
            continue
        if key not in _PARAM_FIELDS:
            raise _bad(f"unknown parameter field {key!r}")
        name, cast = _PARAM_FIELDS[key]
        try:
            value = cast(value)
        except (TypeError, ValueError):
            raise _bad(f"parameter {key} must be a number")
        if name == "erlang_k":
            erlang_k = value
        else:
            kwargs[name] = value
    try:
        return NetworkParams(**kwargs), erlang_k, state_cap
    except ValueError as exc:
        raise _unprocessable(str(exc))


def _parse_config(raw: object) -> AnalysisConfig:
    if raw is None:
        return AnalysisConfig()
    if not isinstance(raw, dict):
        raise _bad("config must be an object")
    kwargs = {}
    solver_kwargs = {}
    for key, value in raw.items():
        if key == "solver":
            if not isinstance(value, dict):
                raise _bad("config.solver must be an object")
            for skey, sval in value.items():
                mapping = {
                    "truncationTolerance": "truncation_tolerance",
                    "convergenceTolerance": "convergence_tolerance",
                    "maxIterations": "max_iterations",
                    "uniformizationSlack": "uniformization_slack",
                }
                if skey not in mapping:
                    raise _bad(f"unknown solver field {skey!r}")
                solver_kwargs[mapping[skey]] = sval
            continue
        if key not in _CONFIG_FIELDS:
            raise _bad(f"unknown config field {key!r}")
        name, cast = _CONFIG_FIELDS[key]
        try:
            kwargs[name] = cast(value)
        except (TypeError, ValueError):
            raise _bad(f"config {key} has the wrong type")
    try:
        cfg = AnalysisConfig(**kwargs)
        if solver_kwargs:
            cfg = replace(cfg, solver=replace(SolverConfig(), **solver_kwargs))
        return cfg
    except ValueError as exc:
        raise _unprocessable(str(exc))


def _parse_spec(body: dict, params_k: int | None, allow_nonstandard: bool) -> StrategySpec:
    kind_raw = body.get("kind")
    if not isinstance(kind_raw, str):
        raise _bad("kind must be a string")
    try:
        kind = normalize_kind(kind_raw)
    except ValueError as exc:
        raise _unprocessable(str(exc))
    threshold = body.get("threshold")
    if not isinstance(threshold, int) or isinstance(threshold, bool):
        raise _bad("threshold must be an integer")
    if threshold < 1:
        raise _unprocessable("threshold must be >= 1")
    if kind == "MB" and threshold not in DEFAULT_THRESHOLDS["MB"] and not allow_nonstandard:
        raise _unprocessable(
            f"{threshold} is not a supported MB threshold "
            f"{DEFAULT_THRESHOLDS['MB']}; pass allowNonstandard:true to force it"
        )
    try:
        if params_k is not None:
            return StrategySpec(kind, threshold, params_k)
        return StrategySpec(kind, threshold)
    except ValueError as exc:
        raise _unprocessable(str(exc))


def _response_body(a: StrategyAnalysis) -> dict:
    return {
        "kind": a.spec.kind,
        "threshold": a.spec.threshold,
        "steadyRisk": a.risk.steady_risk,
        "maxRisk": a.risk.max_risk,
        "stabilisationMonth": a.risk.stabilisation_month,
        "monthlyRisk": [float(x) for x in a.risk.monthly_risk],
        "costPreMonthly": a.cost.cost_pre_monthly,
        "costPostMonthly": a.cost.cost_post_monthly,
        "stateCount": a.state_count,
        "mergedEdgeCount": a.merged_edge_count,
        "solveMilliseconds": round(a.solve_seconds * 1000.0, 3),
    }


class _AnalysisService:
    """Memoized, concurrency-bounded access to analyze_strategy."""

    def __init__(self, pool_size: int = DEFAULT_SOLVE_POOL):
        self._pool = ThreadPoolExecutor(max_workers=pool_size)
        self._memo: OrderedDict[tuple, StrategyAnalysis] = OrderedDict()
        self._lock = threading.Lock()

    def _key(self, spec: StrategySpec, params: NetworkParams, cfg: AnalysisConfig, cap: int) -> tuple:
        return (
            spec.kind,
            spec.threshold,
            spec.erlang_k,
            params.max,
            params.r_join,
            params.r_leave,
            params.r_message,
            params.p_comp,
            cfg.days_per_month,
            cfg.horizon_months,
            cfg.stabilisation_epsilon,
            cfg.observation_months,
            cfg.stabilisation_mode,
            cfg.solver.truncation_tolerance,
            cfg.solver.convergence_tolerance,
            cfg.solver.max_iterations,
            cfg.solver.uniformization_slack,
            cap,
        )

    def analyze(
        self,
        spec: StrategySpec,
        params: NetworkParams,
        cfg: AnalysisConfig,
        state_cap: int,
    ) -> StrategyAnalysis:
        key = self._key(spec, params, cfg, state_cap)
        with self._lock:
            if key in self._memo:
                self._memo.move_to_end(key)
                return self._memo[key]

        def job() -> StrategyAnalysis:
            from .models import build_model

            model = build_model(spec, params, state_cap=state_cap, keep_state_vars=False)
            return analyze_strategy(spec, params, cfg, model=model)

        result = self._pool.submit(job).result()
        with self._lock:
            self._memo[key] = result
            if len(self._memo) > MEMO_CAPACITY:
                self._memo.popitem(last=False)
        return result


def create_app(pool_size: int = DEFAULT_SOLVE_POOL, webui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="keyflux", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    service = _AnalysisService(pool_size)

    @app.exception_handler(RequestError)
    async def _request_error(_req: Request, exc: RequestError):
        return JSONResponse(status_code=exc.status, content={"error": exc.message})

    @app.get("/api/strategies")
    def strategies():
        return [
            {
                "kind": kind,
                "thresholdUnit": THRESHOLD_UNITS[kind],
                "defaultThresholds": list(DEFAULT_THRESHOLDS[kind]),
            }
            for kind in KINDS
        ]

    async def _read_body(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise _bad("request body must be JSON")
        if not isinstance(body, dict):
            raise _bad("request body must be a JSON object")
        return body

    def _run_analysis(body: dict) -> StrategyAnalysis:
        params, erlang_k, state_cap = _parse_params(body.get("params"))
        cfg = _parse_config(body.get("config"))
        allow = bool(body.get("allowNonstandard", False))
        spec = _parse_spec(body, erlang_k, allow)
        try:
            return service.analyze(spec, params, cfg, state_cap)
        except StateSpaceCapExceeded as exc:
            raise RequestError(507, str(exc))
        except SolverError as exc:
            raise RequestError(500, f"solver failure: {exc}")

    @app.post("/api/analyze")
    async def analyze(request: Request):
        body = await _read_body(request)
        return _response_body(_run_analysis(body))

    @app.post("/api/curves")
    async def curves(request: Request):
        body = await _read_body(request)
        kinds_raw = body.get("kinds")
        if not isinstance(kinds_raw, list) or not kinds_raw:
            raise _bad("kinds must be a non-empty list")
        try:
            kinds = [normalize_kind(k) for k in kinds_raw]
        except (ValueError, TypeError) as exc:
            raise _unprocessable(str(exc))
        thresholds_raw = body.get("thresholds")
        if thresholds_raw is None:
            thr_map = {kind: list(DEFAULT_THRESHOLDS[kind]) for kind in kinds}
        elif isinstance(thresholds_raw, list) and all(
            isinstance(t, int) and not isinstance(t, bool) for t in thresholds_raw
        ):
            if not thresholds_raw:
                raise _bad("thresholds must be non-empty when given")
            thr_map = {kind: list(thresholds_raw) for kind in kinds}
        elif isinstance(thresholds_raw, dict):
            thr_map = {}
            for kind in kinds:
                lst = thresholds_raw.get(kind)
                if not isinstance(lst, list) or not lst:
                    raise _bad(f"thresholds[{kind}] must be a non-empty list")
                thr_map[kind] = [int(t) for t in lst]
        else:
            raise _bad("thresholds must be a list or a per-kind object")
        phases_raw = body.get("phases", list(PHASES))
        if not isinstance(phases_raw, list) or not phases_raw:
            raise _bad("phases must be a non-empty list")
        for p in phases_raw:
            if p not in PHASES:
                raise _unprocessable(f"unknown phase {p!r}; expected {list(PHASES)}")
        params_obj = body.get("params")
        cfg_obj = body.get("config")
        allow = bool(body.get("allowNonstandard", False))
        # validate eagerly so errors arrive before streaming starts
        _parse_params(params_obj)
        _parse_config(cfg_obj)
        for kind in kinds:
            for thr in thr_map[kind]:
                _parse_spec({"kind": kind, "threshold": thr}, None, allow)

        def stream():
            curves_out = []
            for kind in kinds:
                per_phase_points: dict[str, list] = {p: [] for p in phases_raw}
                for thr in sorted(thr_map[kind]):
                    analysis = _run_analysis(
                        {
                            "kind": kind,
                            "threshold": thr,
                            "params": params_obj,
                            "config": cfg_obj,
                            "allowNonstandard": allow,
                        }
                    )
                    for phase in phases_raw:
                        if phase == "before":
                            point = {
                                "threshold": thr,
                                "costPerMonth": analysis.cost.cost_pre_monthly,
                                "riskPercent": 100.0 * analysis.risk.max_risk,
                            }
                        else:
                            point = {
                                "threshold": thr,
                                "costPerMonth": analysis.cost.cost_post_monthly,
                                "riskPercent": 100.0 * analysis.risk.steady_risk,
                            }
                        per_phase_points[phase].append(point)
                        yield json.dumps(
                            {"progress": {"kind": kind, "phase": phase, "point": point}}
                        ) + "\n"
                for phase in phases_raw:
                    curves_out.append(
                        {"kind": kind, "phase": phase, "points": per_phase_points[phase]}
                    )
            yield json.dumps({"curves": curves_out}) + "\n"

        return StreamingResponse(stream(), media_type="application/json")

    webui = webui_dir or os.environ.get("KEYFLUX_WEBUI")
    if webui is None:
        candidate = os.path.join(os.getcwd(), "frontend", "dist")
        webui = candidate if os.path.isdir(candidate) else None
    if webui and os.path.isdir(webui):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=webui, html=True), name="webui")

    return app
