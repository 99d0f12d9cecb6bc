"""Risk, cost and design-efficiency analysis of a key-update strategy.

The pipeline per (strategy, threshold):

  1. long-run risk: steady-state probability of the compromised states;
  2. monthly risk: transient probability of Comp at 30, 60, ... days;
  3. stabilisation month S: first month from which the monthly risk stays
     within a band (default 0.001) of the steady-state risk, capped at the
     horizon (120 months);
  4. cost: expected key updates accumulated to month S and to month S+12,
     normalized to per-month figures before and after stabilisation.

Design-efficiency curves pair cost per month (x) with risk percentage (y),
one point per threshold: the before-stabilisation phase uses the maximum
monthly risk up to S and the pre-stabilisation cost; the after phase uses
the steady risk and the post-stabilisation cost.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .ctmc import SparseCtmc, merged_edge_count
from .models import NetworkParams, StrategySpec, build_model
from .solvers import SolverConfig, steady_state, uniformized_pass

PHASE_BEFORE = "before"
PHASE_AFTER = "after"
PHASES = (PHASE_BEFORE, PHASE_AFTER)


@dataclass(frozen=True)
class AnalysisConfig:
    """Knobs of the risk/cost pipeline.

    Months are exactly 30 days. The stabilisation band is an absolute
    deviation from the steady-state risk by default; "successive" switches
    to month-over-month differences instead.
    """

    days_per_month: int = 30
    horizon_months: int = 120
    stabilisation_epsilon: float = 0.001
    observation_months: int = 12
    stabilisation_mode: str = "steady"
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self) -> None:
        if self.horizon_months < self.observation_months or self.observation_months < 1:
            raise ValueError("need horizon_months >= observation_months >= 1")
        if self.stabilisation_epsilon <= 0:
            raise ValueError("stabilisation_epsilon must be > 0")
        if self.stabilisation_mode not in ("steady", "successive"):
            raise ValueError("stabilisation_mode must be 'steady' or 'successive'")


@dataclass(frozen=True)
class RiskProfile:
    """Key-compromise risk of one strategy instance.

    monthly_risk[m-1] is the probability of Comp at exactly 30*m days.
    max_risk is the maximum monthly risk up to the stabilisation month.
    """

    steady_risk: float
    monthly_risk: np.ndarray
    max_risk: float
    stabilisation_month: int


@dataclass(frozen=True)
class CostProfile:
    """Expected key-update counts, cumulative and normalized per month."""

    cumulative_at_s: float
    cumulative_at_s_plus_12: float
    cost_pre_monthly: float
    cost_post_monthly: float


@dataclass(frozen=True)
class CurvePoint:
    threshold: int
    cost_per_month: float
    risk_percent: float


@dataclass(frozen=True)
class DesignCurve:
    kind: str
    phase: str  # "before" or "after"
    points: tuple[CurvePoint, ...]


@dataclass(frozen=True)
class StrategyAnalysis:
    """Full analysis record of one (kind, threshold) pair."""

    spec: StrategySpec
    params: NetworkParams
    risk: RiskProfile
    cost: CostProfile
    state_count: int
    merged_edge_count: int
    solve_seconds: float


def comp_mass(model: SparseCtmc, distribution: np.ndarray) -> float:
    return float(distribution[model.comp].sum())


def stabilisation_month(
    monthly_risk: np.ndarray, steady_risk: float, cfg: AnalysisConfig
) -> int:
    """Smallest month m such that the risk deviation stays below the band
    for every month from m to the horizon; the horizon itself when none.

    The deviation is |monthly - steady| in "steady" mode and the
    month-over-month change in "successive" mode.
    """
    horizon = cfg.horizon_months
    if len(monthly_risk) < horizon:
        raise ValueError(
            f"monthly risk series covers {len(monthly_risk)} months, "
            f"needs the full horizon of {horizon}"
        )
    series = np.asarray(monthly_risk[:horizon], dtype=np.float64)
    if cfg.stabilisation_mode == "steady":
        dev = np.abs(series - steady_risk)
    else:
        prev = np.concatenate(([0.0], series[:-1]))
        dev = np.abs(series - prev)
    month = horizon
    for m in range(horizon, 0, -1):
        if dev[m - 1] < cfg.stabilisation_epsilon:
            month = m
        else:
            break
    return month


def risk_profile(model: SparseCtmc, cfg: AnalysisConfig | None = None) -> RiskProfile:
    """Steady, monthly and maximum risk plus the stabilisation month."""
    cfg = cfg or AnalysisConfig()
    pi = steady_state(model, cfg.solver)
    steady = comp_mass(model, pi)
    checkpoints = np.arange(1, cfg.horizon_months + 1) * float(cfg.days_per_month)
    dists, _ = uniformized_pass(model, checkpoints, cfg.solver)
    monthly = np.array([comp_mass(model, d) for d in dists])
    s = stabilisation_month(monthly, steady, cfg)
    return RiskProfile(
        steady_risk=steady,
        monthly_risk=monthly,
        max_risk=float(monthly[:s].max()),
        stabilisation_month=s,
    )


def cost_profile(
    model: SparseCtmc, s: int, cfg: AnalysisConfig | None = None
) -> CostProfile:
    """Monthly key-update cost before and after stabilisation month s."""
    cfg = cfg or AnalysisConfig()
    if not 1 <= s <= cfg.horizon_months:
        raise ValueError(f"stabilisation month {s} outside 1..{cfg.horizon_months}")
    days = float(cfg.days_per_month)
    obs = cfg.observation_months
    _, rewards = uniformized_pass(
        model, [s * days, (s + obs) * days], cfg.solver, with_reward=True
    )
    at_s, at_s_plus = float(rewards[0]), float(rewards[1])
    return CostProfile(
        cumulative_at_s=at_s,
        cumulative_at_s_plus_12=at_s_plus,
        cost_pre_monthly=at_s / s,
        cost_post_monthly=(at_s_plus - at_s) / obs,
    )


def steady_cost_rate(model: SparseCtmc, cfg: AnalysisConfig | None = None) -> float:
    """Asymptotic key updates per month: 30 * (steady distribution . reward
    rates). Cross-validates the post-stabilisation cost column."""
    cfg = cfg or AnalysisConfig()
    if not model.reward_labels:
        return 0.0
    pi = steady_state(model, cfg.solver)
    return cfg.days_per_month * float(pi @ model.reward_rates())


def analyze_strategy(
    spec: StrategySpec,
    params: NetworkParams | None = None,
    cfg: AnalysisConfig | None = None,
    model: SparseCtmc | None = None,
) -> StrategyAnalysis:
    """Full risk + cost analysis in a single transient pass.

    The monthly distributions and the cumulative rewards share one
    uniformization run to month horizon + observation, so the cost at the
    stabilisation month comes for free once the risk series is known.
    """
    params = params or NetworkParams()
    cfg = cfg or AnalysisConfig()
    t0 = time.perf_counter()
    if model is None:
        model = build_model(spec, params)
    pi = steady_state(model, cfg.solver)
    steady = comp_mass(model, pi)
    total_months = cfg.horizon_months + cfg.observation_months
    checkpoints = np.arange(1, total_months + 1) * float(cfg.days_per_month)
    dists, rewards = uniformized_pass(model, checkpoints, cfg.solver, with_reward=True)
    monthly = np.array([comp_mass(model, d) for d in dists[: cfg.horizon_months]])
    s = stabilisation_month(monthly, steady, cfg)
    at_s = float(rewards[s - 1])
    at_s_plus = float(rewards[s + cfg.observation_months - 1])
    risk = RiskProfile(
        steady_risk=steady,
        monthly_risk=monthly,
        max_risk=float(monthly[:s].max()),
        stabilisation_month=s,
    )
    cost = CostProfile(
        cumulative_at_s=at_s,
        cumulative_at_s_plus_12=at_s_plus,
        cost_pre_monthly=at_s / s,
        cost_post_monthly=(at_s_plus - at_s) / cfg.observation_months,
    )
    return StrategyAnalysis(
        spec=spec,
        params=params,
        risk=risk,
        cost=cost,
        state_count=model.num_states,
        merged_edge_count=merged_edge_count(model),
        solve_seconds=time.perf_counter() - t0,
    )


def _analyze_job(args) -> StrategyAnalysis:
    spec, params, cfg = args
    return analyze_strategy(spec, params, cfg)


def run_analyses(
    pairs: list[tuple[str, int]],
    params: NetworkParams | None = None,
    cfg: AnalysisConfig | None = None,
    workers: int = 1,
    erlang_k: int | None = None,
) -> dict[tuple[str, int], StrategyAnalysis]:
    """Analyze many (kind, threshold) pairs, optionally across a process
    pool. Output order and content do not depend on completion order."""
    params = params or NetworkParams()
    cfg = cfg or AnalysisConfig()
    specs = [
        StrategySpec(kind, thr, erlang_k) if erlang_k else StrategySpec(kind, thr)
        for kind, thr in pairs
    ]
    jobs = [(spec, params, cfg) for spec in specs]
    if workers <= 1 or len(jobs) <= 1:
        results = [_analyze_job(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_analyze_job, jobs))
    return {(spec.kind, spec.threshold): res for spec, res in zip(specs, results)}


def curves_from_analyses(
    analyses: dict[tuple[str, int], StrategyAnalysis],
    kinds: list[str],
    thresholds_by_kind: dict[str, list[int]],
    phases: tuple[str, ...] = PHASES,
) -> list[DesignCurve]:
    """Assemble design-efficiency curves from completed analyses."""
    curves: list[DesignCurve] = []
    for phase in phases:
        if phase not in PHASES:
            raise ValueError(f"unknown phase {phase!r}; expected {PHASES}")
    for kind in kinds:
        thresholds = sorted(thresholds_by_kind[kind])
        for phase in phases:
            points = []
            for thr in thresholds:
                a = analyses[(kind, thr)]
                if phase == PHASE_BEFORE:
                    cost = a.cost.cost_pre_monthly
                    risk = a.risk.max_risk
                else:
                    cost = a.cost.cost_post_monthly
                    risk = a.risk.steady_risk
                points.append(
                    CurvePoint(
                        threshold=thr,
                        cost_per_month=cost,
                        risk_percent=100.0 * risk,
                    )
                )
            curves.append(DesignCurve(kind=kind, phase=phase, points=tuple(points)))
    return curves


def build_curves(
    kinds: list[str],
    thresholds_by_kind: dict[str, list[int]],
    params: NetworkParams | None = None,
    cfg: AnalysisConfig | None = None,
    phases: tuple[str, ...] = PHASES,
    workers: int = 1,
) -> list[DesignCurve]:
    """Analyze the requested strategies and return their curves: one curve
    per (kind, phase), points ordered by threshold."""
    if not kinds:
        raise ValueError("at least one strategy kind is required")
    pairs = [(kind, thr) for kind in kinds for thr in thresholds_by_kind[kind]]
    analyses = run_analyses(pairs, params, cfg, workers=workers)
    return curves_from_analyses(analyses, kinds, thresholds_by_kind, phases)


def with_solver(cfg: AnalysisConfig, **solver_changes) -> AnalysisConfig:
    """Copy of cfg with solver fields replaced."""
    return replace(cfg, solver=replace(cfg.solver, **solver_changes))
