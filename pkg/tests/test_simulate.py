"""Monte Carlo simulator: determinism, exact edge cases, and agreement
with the analytic solvers on small models."""

import numpy as np
import pytest

from keyflux import NetworkParams, SolverConfig, StrategySpec, build_model
from keyflux import expected_reward, transient_at
from keyflux.simulate import monte_carlo_estimate, simulate_model

SMALL = NetworkParams(max=6)


class TestDeterminism:
    def test_same_seed_identical(self):
        spec = StrategySpec("LB", 2)
        a = monte_carlo_estimate(spec, SMALL, 90.0, trials=500, seed=42)
        b = monte_carlo_estimate(spec, SMALL, 90.0, trials=500, seed=42)
        assert (a.risk_at_checkpoints == b.risk_at_checkpoints).all()
        assert a.mean_updates == b.mean_updates

    def test_different_seed_differs(self):
        spec = StrategySpec("LB", 2)
        a = monte_carlo_estimate(spec, SMALL, 90.0, trials=500, seed=1)
        b = monte_carlo_estimate(spec, SMALL, 90.0, trials=500, seed=2)
        assert a.mean_updates != b.mean_updates


class TestEdgeCases:
    def test_zero_pcomp_exactly_zero_risk(self):
        spec = StrategySpec("JB", 1)
        result = monte_carlo_estimate(
            spec, NetworkParams(max=6, p_comp=0.0), 360.0, trials=2000, seed=7
        )
        assert (result.risk_at_checkpoints == 0.0).all()

    def test_rejects_bad_arguments(self):
        spec = StrategySpec("LB", 1)
        with pytest.raises(ValueError):
            monte_carlo_estimate(spec, SMALL, 10.0, trials=0, seed=1)
        with pytest.raises(ValueError):
            monte_carlo_estimate(spec, SMALL, -5.0, trials=10, seed=1)
        with pytest.raises(ValueError):
            monte_carlo_estimate(spec, SMALL, 10.0, trials=10, seed=1, checkpoints_days=[5.0, 1.0])

    def test_checkpoint_zero_reads_initial_state(self):
        spec = StrategySpec("LB", 1)
        result = monte_carlo_estimate(
            spec, SMALL, 30.0, trials=100, seed=3, checkpoints_days=[0.0, 30.0]
        )
        assert result.risk_at_checkpoints[0] == 0.0  # initial state is uncompromised

    def test_mean_updates_nonnegative_and_bounded(self):
        spec = StrategySpec("JLB", 1)
        result = monte_carlo_estimate(spec, SMALL, 60.0, trials=300, seed=5)
        assert result.mean_updates >= 0
        assert result.updates_half_width >= 0


class TestAgreementWithSolvers:
    def test_risk_within_confidence_band(self):
        spec = StrategySpec("LB", 1)
        params = NetworkParams(max=10)
        model = build_model(spec, params)
        t = 120.0
        analytic = float(transient_at(model, t)[model.comp].sum())
        result = monte_carlo_estimate(spec, params, t, trials=20000, seed=11, checkpoints_days=[t])
        hw = max(result.risk_half_widths[0], 1e-4)
        assert abs(result.risk_at_checkpoints[0] - analytic) < 3 * hw

    def test_updates_within_confidence_band(self):
        spec = StrategySpec("MB", 20)
        params = NetworkParams(max=5)
        model = build_model(spec, params)
        t = 90.0
        analytic = expected_reward(model, t)
        result = monte_carlo_estimate(spec, params, t, trials=20000, seed=13)
        assert abs(result.mean_updates - analytic) < 3 * result.updates_half_width

    def test_self_loop_rewards_counted(self):
        # single-state chain whose only event is a rewarded self-loop at
        # rate 2: expected count over t=5 is 10
        from keyflux import from_action_list

        model = from_action_list(1, [(0, 0, 2.0, "fire")], reward_labels={"fire"})
        result = simulate_model(model, 5.0, trials=20000, seed=17)
        assert result.mean_updates == pytest.approx(10.0, rel=0.05)
