"""Event-driven Monte Carlo simulation of a strategy model.

Statistically independent of the numerical solvers: trials race the
exponential clocks of the enabled actions (equivalently, sample the total
exit rate and pick the action proportionally to its rate). Used to
cross-check the analytic risk and cost figures.

Actions that neither change state nor carry reward (pure message
self-loops) are skipped: they cannot influence the state trajectory or the
update count, and dropping them keeps the event rate per trial low. All
trials advance in lockstep through vectorized Gillespie steps, one event
per live trial per step, which is exact because trials are independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ctmc import SparseCtmc
from .models import NetworkParams, StrategySpec, build_model


@dataclass(frozen=True)
class MonteCarloResult:
    """Point estimates with 95% confidence half-widths.

    risk_at_checkpoints[i] estimates the probability of Comp at
    checkpoints_days[i]; mean_updates estimates the expected reward-labeled
    firings in [0, horizon].
    """

    checkpoints_days: np.ndarray
    risk_at_checkpoints: np.ndarray
    risk_half_widths: np.ndarray
    mean_updates: float
    updates_half_width: float
    trials: int
    seed: int


def _effective_action_table(model: SparseCtmc):
    """Per-state CSR of simulable actions with a global rate cumsum so one
    searchsorted picks both row and action."""
    reward_ids = model.reward_label_ids()
    is_reward = np.isin(model.label_id, reward_ids) if reward_ids.size else np.zeros(
        model.num_actions, dtype=bool
    )
    keep = (model.src != model.tgt) | is_reward
    src = model.src[keep]
    order = np.argsort(src, kind="stable")
    src = src[order]
    tgt = model.tgt[keep][order]
    rate = model.rate[keep][order]
    rewarded = is_reward[keep][order]
    counts = np.bincount(src, minlength=model.num_states)
    offsets = np.concatenate(([0], np.cumsum(counts)))
    total_rate = np.bincount(src, weights=rate, minlength=model.num_states)
    cum = np.cumsum(rate)
    base = np.concatenate(([0.0], cum))[offsets[:-1]]
    return tgt, rate, rewarded, offsets, total_rate, cum, base


def simulate_model(
    model: SparseCtmc,
    horizon_days: float,
    trials: int,
    seed: int,
    checkpoints_days: list[float] | np.ndarray | None = None,
) -> MonteCarloResult:
    """Simulate `trials` trajectories of an already-built model."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if horizon_days < 0 or not np.isfinite(horizon_days):
        raise ValueError("horizon must be finite and non-negative")
    checkpoints = (
        np.array([horizon_days], dtype=np.float64)
        if checkpoints_days is None
        else np.asarray(checkpoints_days, dtype=np.float64)
    )
    if checkpoints.size and (
        (np.diff(checkpoints) < 0).any() or checkpoints[0] < 0
    ):
        raise ValueError("checkpoints must be ascending and non-negative")

    tgt, rate, rewarded, offsets, total_rate, cum, base = _effective_action_table(model)
    rng = np.random.default_rng(seed)

    state = np.full(trials, model.initial_state, dtype=np.int64)
    now = np.zeros(trials)
    updates = np.zeros(trials, dtype=np.int64)
    comp_at = np.zeros((checkpoints.size, trials), dtype=bool)
    next_cp = np.zeros(trials, dtype=np.int64)  # first unrecorded checkpoint

    alive = np.arange(trials)
    while alive.size:
        s = state[alive]
        r_tot = total_rate[s]
        movable = r_tot > 0
        if not movable.all():
            # absorbing for simulation purposes: freeze at the horizon
            stuck = alive[~movable]
            comp_flag = model.comp[state[stuck]]
            while True:
                rec = next_cp[stuck] < checkpoints.size
                if not rec.any():
                    break
                idx = stuck[rec]
                comp_at[next_cp[idx], idx] = comp_flag[rec]
                next_cp[idx] += 1
                comp_flag = comp_flag[rec]
                stuck = idx
            now[alive[~movable]] = np.inf
            alive = alive[movable]
            if not alive.size:
                break
            s = state[alive]
            r_tot = total_rate[s]
        dt = rng.exponential(1.0 / r_tot)
        t_new = now[alive] + dt
        # record Comp at every checkpoint passed by this jump: the state
        # during [now, t_new) is the current one
        crossing = alive
        t_cross = t_new
        while crossing.size:
            j = next_cp[crossing]
            due = (j < checkpoints.size) & (t_cross > checkpoints[np.minimum(j, checkpoints.size - 1)])
            if not due.any():
                break
            hit = crossing[due]
            comp_at[next_cp[hit], hit] = model.comp[state[hit]]
            next_cp[hit] += 1
            crossing = hit
            t_cross = t_cross[due]
        # pick the action by inverting the per-state rate cumsum
        u = base[s] + rng.random(alive.size) * r_tot
        j = np.searchsorted(cum, u, side="left")
        j = np.clip(j, offsets[s], offsets[s + 1] - 1)
        fired_in_horizon = t_new <= horizon_days
        updates[alive] += rewarded[j] & fired_in_horizon
        state[alive] = tgt[j]
        now[alive] = t_new
        alive = alive[t_new < max(horizon_days, checkpoints[-1] if checkpoints.size else 0.0)]

    risk = comp_at.mean(axis=1)
    risk_hw = 1.96 * np.sqrt(risk * (1.0 - risk) / trials)
    mean_updates = float(updates.mean())
    std = float(updates.std(ddof=1)) if trials > 1 else 0.0
    return MonteCarloResult(
        checkpoints_days=checkpoints,
        risk_at_checkpoints=risk,
        risk_half_widths=risk_hw,
        mean_updates=mean_updates,
        updates_half_width=1.96 * std / np.sqrt(trials),
        trials=trials,
        seed=seed,
    )


def monte_carlo_estimate(
    spec: StrategySpec,
    params: NetworkParams,
    horizon_days: float,
    trials: int,
    seed: int,
    checkpoints_days: list[float] | np.ndarray | None = None,
) -> MonteCarloResult:
    """Build the strategy model and simulate it. Deterministic given seed."""
    model = build_model(spec, params, keep_state_vars=False)
    return simulate_model(model, horizon_days, trials, seed, checkpoints_days)
