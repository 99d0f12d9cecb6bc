"""Acceptance suite: reproduces the published tables at their stated
tolerances and runs the paper-independent oracle checks.

One shared sweep computes the 30 strategy analyses (full horizon plus the
12-month observation window) and is reused by every table criterion. Each
criterion records a PASS/FAIL line that pytest prints in its terminal
summary.

Two criteria are expected to fail; both failures are properties of the
models themselves, verified against independent solvers (sparse direct
solve, Krylov matrix exponential), not solver artifacts:

* stabilisation months: five table entries (TB 2/3/4, MB 1000/1500) do not
  follow from the persistent-band definition under exact arithmetic. The
  published values were found by manual inspection of oscillating,
  grid-aliased risk series (the TB timer and MB message counter cycle
  against the 30-day sampling grid) and no single detection rule
  reproduces all of them: TB/3 would need detection 6 months later, while
  MB/1500's published month 11 lies mid-ascent, 26 standard bands away
  from its steady risk.
* post-stabilisation cost cross-check: MB/2500 has not stabilised by the
  capped month 120 (risk still oscillates at amplitude ~2e-2), so its
  observed 12-month cost (0.5907, matching the published 0.591) sits
  1.017% from the asymptotic steady rate, just past the 1% band.
"""

import time

import numpy as np
import pytest

from conftest import record_criterion
from oracles import dense_steady_state, dense_transient
from keyflux import (
    KINDS,
    NetworkParams,
    StrategySpec,
    build_model,
    steady_state,
    transient_at,
)
from keyflux import reference
from keyflux.analysis import AnalysisConfig, curves_from_analyses, run_analyses
from keyflux.simulate import monte_carlo_estimate
from keyflux.verify import (
    COST_POST_REL_TOL,
    COST_PRE_REL_TOL,
    RISK_AVG_TOL,
    RISK_MAX_TOL,
    STABILISATION_TOL,
    STEADY_RATE_REL_TOL,
    verify_statespace,
    verify_tables,
)

WORKERS = 2
PARAMS = NetworkParams()
CFG = AnalysisConfig()


@pytest.fixture(scope="session")
def analyses():
    """Full analysis of all 30 (kind, threshold) pairs at the published
    scenario parameters: the dominant cost of the suite."""
    t0 = time.perf_counter()
    result = run_analyses(reference.table_pairs(), PARAMS, CFG, workers=WORKERS)
    print(f"\n[acceptance] 30-strategy sweep took {time.perf_counter() - t0:.0f}s")
    return result


def _failures(entries):
    return [
        f"{e.kind}/{e.threshold} {e.metric}: computed {e.computed:.6g} vs {e.expected:.6g}"
        for e in entries
        if not e.passed
    ]


class TestStateSpaceExactness:
    def test_all_counts_exact(self):
        t0 = time.perf_counter()
        report = verify_statespace(workers=WORKERS)
        elapsed = time.perf_counter() - t0
        ok, total = report.counts
        record_criterion(
            "state-space exactness (90 state + 90 transition cells)",
            report.passed,
            f"{ok}/{total} exact in {elapsed:.0f}s",
        )
        assert total == 180
        assert report.passed, _failures(report.entries)
        assert elapsed < 300, "state-space sweep exceeded the five-minute budget"


class TestLongRunRisk:
    def test_risk_average(self, analyses):
        report = verify_tables(analyses, scopes=("risk-average",))
        ok, total = report.counts
        record_criterion(
            f"long-run risk (30 values, +-{RISK_AVG_TOL})", report.passed, f"{ok}/{total}"
        )
        assert total == 30
        assert report.passed, _failures(report.entries)


class TestMaximumRisk:
    def test_risk_max(self, analyses):
        report = verify_tables(analyses, scopes=("risk-max",))
        ok, total = report.counts
        record_criterion(
            f"maximum risk (30 values, +-{RISK_MAX_TOL})", report.passed, f"{ok}/{total}"
        )
        assert total == 30
        assert report.passed, _failures(report.entries)

    def test_overshoot_pattern(self, analyses):
        # transient peaks must exceed the long-run value for TB at
        # threshold >= 3 and for every MB row
        overshoot_rows = [("TB", 3), ("TB", 4), ("TB", 5)] + [
            ("MB", t) for t in (500, 1000, 1500, 2000, 2500)
        ]
        bad = []
        for key in overshoot_rows:
            a = analyses[key]
            if not a.risk.max_risk > a.risk.steady_risk:
                bad.append(key)
        record_criterion(
            "overshoot pattern (max > average for TB>=3 and all MB)",
            not bad,
            "all reproduced" if not bad else f"missing for {bad}",
        )
        assert not bad


@pytest.fixture(scope="session")
def cost_post_report(analyses):
    """Table comparison plus the steady-rate cross-check; the cross-check
    re-solves each model's steady state, so share one pass."""
    return verify_tables(analyses, scopes=("cost-post",))


class TestPostStabilisationCost:
    def test_cost_post_table(self, cost_post_report):
        entries = [
            e for e in cost_post_report.entries if e.metric == "cost/month after"
        ]
        ok = sum(e.passed for e in entries)
        passed = all(e.passed for e in entries)
        record_criterion(
            f"post-stabilisation cost vs table (30 values, +-{COST_POST_REL_TOL:.0%})",
            passed,
            f"{ok}/{len(entries)}",
        )
        assert len(entries) == 30
        assert passed, _failures(entries)

    def test_cost_post_steady_rate_cross_check(self, cost_post_report):
        entries = [
            e for e in cost_post_report.entries if e.metric == "post vs steady rate"
        ]
        ok = sum(e.passed for e in entries)
        passed = all(e.passed for e in entries)
        record_criterion(
            f"post cost vs steady rate cross-check (+-{STEADY_RATE_REL_TOL:.0%})",
            passed,
            f"{ok}/{len(entries)}" if passed else "; ".join(_failures(entries)),
        )
        assert len(entries) == 30
        assert passed, _failures(entries)


class TestPreStabilisationCost:
    def test_cost_pre_where_month_matches(self, analyses):
        entries = verify_tables(analyses, scopes=("cost-pre",)).entries
        compared = [e for e in entries if e.tolerance != "not compared"]
        documented = [e for e in entries if e.tolerance == "not compared"]
        passed = all(e.passed for e in compared)
        record_criterion(
            f"pre-stabilisation cost (+-{COST_PRE_REL_TOL:.0%} where stabilisation matches)",
            passed,
            f"{sum(e.passed for e in compared)}/{len(compared)} compared, "
            f"{len(documented)} divergences documented",
        )
        assert len(entries) == 30
        assert passed, _failures(compared)
        for e in documented:
            assert "diverges" in e.note


class TestStabilisationMonths:
    def test_table_reproduction(self, analyses):
        report = verify_tables(analyses, scopes=("stabilisation",))
        ok, total = report.counts
        capped = [
            e
            for e in report.entries
            if e.expected == reference.CAPPED_STABILISATION
        ]
        capped_ok = sum(e.passed for e in capped)
        record_criterion(
            f"stabilisation months (+-{STABILISATION_TOL} month, capped exact)",
            report.passed,
            f"{ok}/{total} rows, capped {capped_ok}/{len(capped)}",
        )
        assert total == 30
        # Five table entries are irreproducible under the persistent-band
        # definition (see the module docstring); this assertion states the
        # criterion faithfully and is expected to fail on exactly those.
        assert report.passed, _failures(report.entries)


class TestOracleSuites:
    def test_dense_solve_vs_gauss_seidel(self):
        cases = [
            (StrategySpec("LB", 2), NetworkParams(max=5)),
            (StrategySpec("JB", 1), NetworkParams(max=8)),
            (StrategySpec("JLB", 3), NetworkParams(max=4)),
            (StrategySpec("MB", 4), NetworkParams(max=3)),
            (StrategySpec("TB", 1, erlang_k=3), NetworkParams(max=3)),
            (StrategySpec("HY", 2, erlang_k=2), NetworkParams(max=2)),
        ]
        worst = 0.0
        for spec, params in cases:
            model = build_model(spec, params)
            assert model.num_states <= 50
            gap = float(np.abs(steady_state(model) - dense_steady_state(model)).max())
            worst = max(worst, gap)
        record_criterion(
            "oracle: dense solve vs Gauss-Seidel (<= 1e-8, models <= 50 states)",
            worst <= 1e-8,
            f"worst gap {worst:.2e}",
        )
        assert worst <= 1e-8

    def test_matrix_exponential_vs_uniformization(self):
        cases = [
            (StrategySpec("LB", 1), NetworkParams(max=6)),
            (StrategySpec("MB", 3), NetworkParams(max=4)),
            (StrategySpec("HY", 2, erlang_k=2), NetworkParams(max=2)),
        ]
        worst = 0.0
        for spec, params in cases:
            model = build_model(spec, params)
            for t in (0.7, 12.0, 90.0):
                gap = float(
                    np.abs(transient_at(model, t) - dense_transient(model, t)).max()
                )
                worst = max(worst, gap)
        record_criterion(
            "oracle: truncated-series expm vs uniformization (<= 1e-7)",
            worst <= 1e-7,
            f"worst gap {worst:.2e}",
        )
        assert worst <= 1e-7

    @pytest.mark.parametrize("kind,thr", [("LB", 1), ("LB", 3), ("JB", 1), ("JB", 3)])
    def test_monte_carlo_vs_analytic(self, analyses, kind, thr):
        a = analyses[(kind, thr)]
        t = 360.0
        analytic = float(a.risk.monthly_risk[11])  # month 12 = 360 days
        result = monte_carlo_estimate(
            StrategySpec(kind, thr), PARAMS, t, trials=100_000, seed=20260810, checkpoints_days=[t]
        )
        gap = abs(result.risk_at_checkpoints[0] - analytic)
        limit = 3 * max(result.risk_half_widths[0], 1e-6)
        record_criterion(
            f"oracle: Monte Carlo 1e5 trials vs analytic risk ({kind}/{thr})",
            gap < limit,
            f"|{result.risk_at_checkpoints[0]:.5f} - {analytic:.5f}| vs 3sigma {limit:.5f}",
        )
        assert gap < limit

    def test_structural_invariants_all_models(self):
        bad = []
        for kind, thr in reference.table_pairs():
            model = build_model(StrategySpec(kind, thr), PARAMS)
            size = model.state_vars["size"]
            n = model.num_states
            for group, target in (
                ("leave", PARAMS.r_leave * size),
                ("message", PARAMS.r_message * size),
                ("join", PARAMS.r_join * (PARAMS.max - size)),
            ):
                ids = [i for i, name in enumerate(model.labels) if name.startswith(group)]
                mask = np.isin(model.label_id, np.array(ids, dtype=np.int16))
                flux = np.zeros(n)
                np.add.at(flux, model.src[mask], model.rate[mask])
                if not np.allclose(flux, target, rtol=0, atol=1e-9):
                    bad.append(f"{kind}/{thr}: {group} flux broken")
            for name, arr in (model.state_vars or {}).items():
                if name.startswith("c_") and arr.size and arr.max() > thr - 1:
                    bad.append(f"{kind}/{thr}: counter {name} reaches threshold")
            reward_ids = model.reward_label_ids()
            rmask = np.isin(model.label_id, reward_ids)
            if model.comp[model.tgt[rmask]].any():
                bad.append(f"{kind}/{thr}: reward action leaves Comp set")
        record_criterion(
            "oracle: flux conservation + counter/Comp-reset invariants (30 models)",
            not bad,
            "all hold" if not bad else "; ".join(bad),
        )
        assert not bad


class TestConvergenceInvariant:
    # Chains are expected to be near their long-run behavior by ten years.
    # Two message-counter models provably are not: their counter phase
    # stays coherent long past the horizon, so the monthly risk still
    # oscillates at month 120 (amplitude 2e-3 for MB/2000, 2e-2 for
    # MB/2500; confirmed against an independent Krylov matrix
    # exponential). The test pins the exact violation set so any solver
    # regression or model change shows up in either direction.
    KNOWN_UNCONVERGED = {("MB", 2000), ("MB", 2500)}

    def test_transient_reaches_steady_by_ten_years(self, analyses):
        violations = set()
        for key, a in analyses.items():
            gap = abs(float(a.risk.monthly_risk[119]) - a.risk.steady_risk)
            if gap >= 1e-3:
                violations.add(key)
        assert violations == self.KNOWN_UNCONVERGED


class TestCurveData:
    def test_after_phase_figure_reconstruction(self, analyses):
        from keyflux.models import DEFAULT_THRESHOLDS

        thresholds = {k: list(v) for k, v in DEFAULT_THRESHOLDS.items()}
        curves = curves_from_analyses(analyses, list(KINDS), thresholds, phases=("after",))
        assert len(curves) == 6
        bad = []
        points = 0
        for curve in curves:
            for p in curve.points:
                points += 1
                exp_cost = reference.COST[(curve.kind, p.threshold)][1]
                exp_risk_pct = 100.0 * reference.RISK[(curve.kind, p.threshold)][1]
                if abs(p.cost_per_month - exp_cost) > COST_POST_REL_TOL * exp_cost:
                    bad.append(f"{curve.kind}/{p.threshold} cost {p.cost_per_month:.4f} vs {exp_cost}")
                if abs(p.risk_percent - exp_risk_pct) > 100.0 * RISK_AVG_TOL:
                    bad.append(f"{curve.kind}/{p.threshold} risk% {p.risk_percent:.3f} vs {exp_risk_pct}")
        record_criterion(
            "curve data: after-phase reconstruction (6 curves x 5 points)",
            not bad and points == 30,
            f"{points - len(bad)}/{points} points",
        )
        assert points == 30
        assert not bad, bad
