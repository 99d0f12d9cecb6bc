"""Command-line front door.

Subcommands: analyze one strategy, sweep the published tables, emit
design-efficiency curve data (with rendered figures), count state spaces,
verify against the published reference values, and serve the HTTP API.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 solver
failure. Logging level comes from KEYFLUX_LOG (error|warn|info|debug).
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import os
import sys

import click
import numpy as np

from . import reference
from .analysis import (
    PHASES,
    AnalysisConfig,
    StrategyAnalysis,
    analyze_strategy,
    curves_from_analyses,
    run_analyses,
)
from .models import (
    DEFAULT_THRESHOLDS,
    KINDS,
    NetworkParams,
    StateSpaceCapExceeded,
    StrategySpec,
    normalize_kind,
    state_space_summary,
)
from .simulate import monte_carlo_estimate
from .solvers import SolverError
from .verify import run_verification

log = logging.getLogger("keyflux")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_SOLVER = 3

_PARAM_KEYS = {"max", "r_join", "r_leave", "r_message", "p_comp", "k"}


def _setup_logging() -> None:
    level = os.environ.get("KEYFLUX_LOG", "warn").lower()
    levels = {
        "error": logging.ERROR,
        "warn": logging.WARNING,
        "warning": logging.WARNING,
        "info": logging.INFO,
        "debug": logging.DEBUG,
    }
    logging.basicConfig(
        level=levels.get(level, logging.WARNING),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


def _parse_overrides(pairs: tuple[str, ...]) -> tuple[NetworkParams, int | None]:
    """--set key=value overrides; keys mirror the scenario table names."""
    values: dict[str, float] = {}
    for pair in pairs:
        if "=" not in pair:
            raise click.UsageError(f"--set expects key=value, got {pair!r}")
        key, _, raw = pair.partition("=")
        key = key.strip().lower()
        if key not in _PARAM_KEYS:
            raise click.UsageError(
                f"unknown parameter {key!r}; expected one of {sorted(_PARAM_KEYS)}"
            )
        try:
            values[key] = float(raw)
        except ValueError as exc:
            raise click.UsageError(f"--set {key}: {raw!r} is not a number") from exc
    erlang_k = int(values.pop("k")) if "k" in values else None
    kwargs = {}
    if "max" in values:
        kwargs["max"] = int(values.pop("max"))
    kwargs.update(values)
    try:
        return NetworkParams(**kwargs), erlang_k
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc


def _make_spec(kind: str, threshold: int, erlang_k: int | None) -> StrategySpec:
    try:
        canonical = normalize_kind(kind)
        if erlang_k is not None:
            return StrategySpec(canonical, threshold, erlang_k)
        return StrategySpec(canonical, threshold)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc


def _parse_kinds(text: str) -> list[str]:
    if text.strip().lower() == "all":
        return list(KINDS)
    try:
        kinds = [normalize_kind(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    if not kinds:
        raise click.UsageError("at least one strategy kind is required")
    return kinds


def _thresholds_for(kinds: list[str], text: str | None) -> dict[str, list[int]]:
    if text is None:
        return {kind: list(DEFAULT_THRESHOLDS[kind]) for kind in kinds}
    try:
        explicit = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise click.UsageError(f"bad threshold list {text!r}") from exc
    if not explicit:
        raise click.UsageError("at least one threshold is required")
    return {kind: explicit for kind in kinds}


def _analysis_record(a: StrategyAnalysis) -> dict:
    return {
        "kind": a.spec.kind,
        "threshold": a.spec.threshold,
        "params": dataclasses.asdict(a.params),
        "steadyRisk": a.risk.steady_risk,
        "maxRisk": a.risk.max_risk,
        "stabilisationMonth": a.risk.stabilisation_month,
        "monthlyRisk": [float(x) for x in a.risk.monthly_risk],
        "costPreMonthly": a.cost.cost_pre_monthly,
        "costPostMonthly": a.cost.cost_post_monthly,
        "cumulativeUpdatesAtS": a.cost.cumulative_at_s,
        "cumulativeUpdatesAtSplus12": a.cost.cumulative_at_s_plus_12,
        "stateCount": a.state_count,
        "mergedEdgeCount": a.merged_edge_count,
        "solveMilliseconds": round(a.solve_seconds * 1000.0, 3),
    }


def curves_document(curves) -> dict:
    return {
        "curves": [
            {
                "kind": c.kind,
                "phase": c.phase,
                "points": [
                    {
                        "threshold": p.threshold,
                        "costPerMonth": p.cost_per_month,
                        "riskPercent": p.risk_percent,
                    }
                    for p in c.points
                ],
            }
            for c in curves
        ]
    }


def read_curves_document(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _write_metric_csv(path: str, rows: list[tuple[str, int, str, float]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "threshold", "metric", "value"])
        for kind, threshold, metric, value in rows:
            writer.writerow([kind, threshold, metric, f"{value:.6g}"])


@click.group()
def cli() -> None:
    """Quantitative analysis of key-update strategies."""
    _setup_logging()


@cli.command()
@click.argument("kind")
@click.argument("threshold", type=int)
@click.option("--set", "overrides", multiple=True, help="Parameter override key=value.")
@click.option("--json", "json_path", type=click.Path(dir_okay=False), help="Write the record as JSON.")
@click.option("--plot", "plot_path", type=click.Path(dir_okay=False), help="Render the risk timeline figure.")
def analyze(kind, threshold, overrides, json_path, plot_path) -> None:
    """Full risk and cost analysis of one strategy instance."""
    params, erlang_k = _parse_overrides(overrides)
    spec = _make_spec(kind, threshold, erlang_k)
    a = analyze_strategy(spec, params)
    record = _analysis_record(a)
    click.echo(f"{spec.kind} threshold {spec.threshold} (max={params.max})")
    click.echo(f"  states {a.state_count}, transitions {a.merged_edge_count}")
    click.echo(f"  steady risk          {a.risk.steady_risk:.6f}")
    click.echo(f"  max monthly risk     {a.risk.max_risk:.6f}")
    click.echo(f"  stabilisation month  {a.risk.stabilisation_month}")
    click.echo(f"  cost/month before    {a.cost.cost_pre_monthly:.6f}")
    click.echo(f"  cost/month after     {a.cost.cost_post_monthly:.6f}")
    click.echo(f"  solve time           {a.solve_seconds:.2f}s")
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(record, fh, indent=2)
        click.echo(f"record written to {json_path}")
    if plot_path:
        from .plotting import plot_risk_timeline

        plot_risk_timeline(a.risk, plot_path, title=f"{spec.kind} threshold {spec.threshold}")
        click.echo(f"figure written to {plot_path}")


@cli.command()
@click.option("--kinds", default="all", help="Comma-separated kinds or 'all'.")
@click.option("--thresholds", default=None, help="Comma-separated thresholds (default: published set per kind).")
@click.option("--set", "overrides", multiple=True)
@click.option("--out", "out_dir", default=".", type=click.Path(file_okay=False), help="Output directory.")
@click.option("--workers", default=os.cpu_count() or 1, show_default=True)
def sweep(kinds, thresholds, overrides, out_dir, workers) -> None:
    """Reproduce the risk, cost and stabilisation tables as CSV files."""
    params, erlang_k = _parse_overrides(overrides)
    kind_list = _parse_kinds(kinds)
    thr_map = _thresholds_for(kind_list, thresholds)
    pairs = [(k, t) for k in kind_list for t in thr_map[k]]
    analyses = run_analyses(pairs, params, workers=workers, erlang_k=erlang_k)
    os.makedirs(out_dir, exist_ok=True)
    risk_rows, cost_rows, stab_rows = [], [], []
    for kind, thr in pairs:
        a = analyses[(kind, thr)]
        risk_rows.append((kind, thr, "risk_max", a.risk.max_risk))
        risk_rows.append((kind, thr, "risk_average", a.risk.steady_risk))
        cost_rows.append((kind, thr, "cost_before_monthly", a.cost.cost_pre_monthly))
        cost_rows.append((kind, thr, "cost_after_monthly", a.cost.cost_post_monthly))
        stab_rows.append((kind, thr, "stabilisation_month", float(a.risk.stabilisation_month)))
    for name, rows in (
        ("risk.csv", risk_rows),
        ("cost.csv", cost_rows),
        ("stabilisation.csv", stab_rows),
    ):
        path = os.path.join(out_dir, name)
        _write_metric_csv(path, rows)
        click.echo(f"wrote {path}")


@cli.command()
@click.option("--kinds", default="all")
@click.option("--thresholds", default=None)
@click.option("--phase", type=click.Choice(["before", "after", "both"]), default="both", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--set", "overrides", multiple=True)
@click.option("--out", "out_dir", default=".", type=click.Path(file_okay=False))
@click.option("--plot/--no-plot", default=True, show_default=True, help="Render the curves figure.")
@click.option("--workers", default=os.cpu_count() or 1, show_default=True)
def curves(kinds, thresholds, phase, fmt, overrides, out_dir, plot, workers) -> None:
    """Emit design-efficiency curve data (and a rendered figure)."""
    params, erlang_k = _parse_overrides(overrides)
    kind_list = _parse_kinds(kinds)
    thr_map = _thresholds_for(kind_list, thresholds)
    phases = PHASES if phase == "both" else (phase,)
    pairs = [(k, t) for k in kind_list for t in thr_map[k]]
    analyses = run_analyses(pairs, params, workers=workers, erlang_k=erlang_k)
    curve_list = curves_from_analyses(analyses, kind_list, thr_map, phases)
    os.makedirs(out_dir, exist_ok=True)
    if fmt == "json":
        path = os.path.join(out_dir, "curves.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(curves_document(curve_list), fh, indent=2)
    else:
        path = os.path.join(out_dir, "curves.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["kind", "phase", "threshold", "costPerMonth", "riskPercent"])
            for c in curve_list:
                for p in c.points:
                    writer.writerow(
                        [c.kind, c.phase, p.threshold, f"{p.cost_per_month:.6g}", f"{p.risk_percent:.6g}"]
                    )
    click.echo(f"wrote {path}")
    if plot:
        from .plotting import plot_design_curves

        fig_path = os.path.join(out_dir, "curves.png")
        plot_design_curves(curve_list, fig_path)
        click.echo(f"wrote {fig_path}")


@cli.command()
@click.option("--kinds", default="all")
@click.option("--thresholds", default=None)
@click.option("--max", "max_values", default="50,100,500", show_default=True, help="Comma-separated network sizes.")
@click.option("--set", "overrides", multiple=True)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False), help="CSV output path (default: stdout).")
@click.option("--workers", default=os.cpu_count() or 1, show_default=True)
def statespace(kinds, thresholds, max_values, overrides, out_path, workers) -> None:
    """State and transition counts per (kind, threshold, network size)."""
    params, erlang_k = _parse_overrides(overrides)
    kind_list = _parse_kinds(kinds)
    thr_map = _thresholds_for(kind_list, thresholds)
    try:
        maxima = [int(v) for v in max_values.split(",") if v.strip()]
    except ValueError as exc:
        raise click.UsageError(f"bad --max list {max_values!r}") from exc
    from concurrent.futures import ProcessPoolExecutor

    jobs = [
        ((kind, thr, mx), params, erlang_k)
        for kind in kind_list
        for thr in thr_map[kind]
        for mx in maxima
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_statespace_cell, jobs))
    else:
        results = [_statespace_cell(j) for j in jobs]
    lines = [["kind", "threshold", "max", "states", "transitions"]]
    for kind, thr, mx, states, transitions, note in results:
        if note:
            lines.append([kind, str(thr), str(mx), "cap-exceeded", "cap-exceeded"])
        else:
            lines.append([kind, str(thr), str(mx), str(states), str(transitions)])
    if out_path:
        with open(out_path, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh).writerows(lines)
        click.echo(f"wrote {out_path}")
    else:
        for line in lines:
            click.echo(",".join(line))


def _statespace_cell(args):
    (kind, thr, mx), params, erlang_k = args
    spec = StrategySpec(kind, thr, erlang_k) if erlang_k else StrategySpec(kind, thr)
    try:
        states, transitions = state_space_summary(spec, dataclasses.replace(params, max=mx))
        return kind, thr, mx, states, transitions, ""
    except StateSpaceCapExceeded as exc:
        return kind, thr, mx, -1, -1, str(exc)


@cli.command()
@click.option(
    "--scope",
    "scopes",
    multiple=True,
    type=click.Choice(["statespace", "risk-average", "risk-max", "cost-post", "cost-pre", "stabilisation", "all"]),
    default=("all",),
    show_default=True,
)
@click.option("--kinds", default="all")
@click.option("--max", "max_values", default="50,100,500", show_default=True)
@click.option("--set", "overrides", multiple=True)
@click.option("--json", "json_path", default=None, type=click.Path(dir_okay=False))
@click.option("--workers", default=os.cpu_count() or 1, show_default=True)
def verify(scopes, kinds, max_values, overrides, json_path, workers) -> None:
    """Compare computed values against the published tables; exit 2 on any
    mismatch."""
    params, erlang_k = _parse_overrides(overrides)
    if erlang_k is not None:
        raise click.UsageError("verify compares against published values; k cannot be overridden")
    kind_list = _parse_kinds(kinds)
    if "all" in scopes:
        scope_list = ("statespace", "risk-average", "risk-max", "cost-post", "cost-pre", "stabilisation")
    else:
        scope_list = tuple(dict.fromkeys(scopes))
    try:
        maxima = tuple(int(v) for v in max_values.split(",") if v.strip())
    except ValueError as exc:
        raise click.UsageError(f"bad --max list {max_values!r}") from exc
    report = run_verification(
        scope_list, kind_list, params, workers=workers, statespace_max=maxima
    )
    for line in report.lines():
        click.echo(line)
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump([dataclasses.asdict(e) for e in report.entries], fh, indent=2)
        click.echo(f"report written to {json_path}")
    if not report.passed:
        sys.exit(EXIT_VERIFY)


@cli.command()
@click.argument("kind")
@click.argument("threshold", type=int)
@click.option("--trials", default=100_000, show_default=True)
@click.option("--horizon-days", default=360.0, show_default=True)
@click.option("--seed", required=True, type=int, help="RNG seed (explicit for reproducibility).")
@click.option("--set", "overrides", multiple=True)
def simulate(kind, threshold, trials, horizon_days, seed, overrides) -> None:
    """Monte Carlo cross-check of one strategy instance."""
    params, erlang_k = _parse_overrides(overrides)
    spec = _make_spec(kind, threshold, erlang_k)
    result = monte_carlo_estimate(spec, params, horizon_days, trials, seed)
    for t, p, hw in zip(result.checkpoints_days, result.risk_at_checkpoints, result.risk_half_widths):
        click.echo(f"risk at {t:g} days: {p:.5f} +- {hw:.5f} (95% CI)")
    click.echo(
        f"updates in [0, {horizon_days:g}]: {result.mean_updates:.4f} +- {result.updates_half_width:.4f} (95% CI)"
    )


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8350, show_default=True)
def serve(host, port) -> None:
    """Run the local HTTP analysis service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port, log_level="info")


def main(argv: list[str] | None = None) -> int:
    """Entry point with the stable exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    except StateSpaceCapExceeded as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except SolverError as exc:
        click.echo(f"solver failure: {exc}", err=True)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
