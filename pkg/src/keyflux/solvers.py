"""Numerical solvers for sparse CTMCs.

Transient distributions are computed by uniformization: with q at least the
maximum exit rate, P = I + Q/q is a stochastic matrix and

    pi(t) = sum_i  Poisson(qt; i) * pi(0) P^i.

Expected accumulated reward over [0, t] uses the same vector iteration with
complementary-Poisson-cdf weights,

    E[reward in [0,t]] = (1/q) * sum_i  Pr[N_qt > i] * (pi(0) P^i) . r,

where r is the per-state reward accrual rate. Both sums are truncated to a
Poisson window whose discarded tail mass is below the configured tolerance,
and both detect convergence of the iterated vector: once it stops changing,
the remaining Poisson mass is assigned to the converged vector.

The steady-state distribution solves pi Q = 0, sum(pi) = 1 with Gauss-Seidel
sweeps over the balance equations pi(s) * exit(s) = incoming flux, updating
in place in state order and renormalizing after every sweep.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np
import scipy.sparse as sp
from scipy.special import gammaln
from scipy.stats import poisson as poisson_dist

from .ctmc import SparseCtmc, exit_rates, generator_offdiag, strongly_connected


class SolverError(RuntimeError):
    """Base class for solver failures."""


class NotErgodicError(SolverError):
    """Steady-state analysis requires a single strongly connected component."""


class ConvergenceError(SolverError):
    """Iteration budget exhausted before meeting the tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class SolverConfig:
    """Numerical knobs shared by the transient and steady-state solvers.

    truncation_tolerance: Poisson tail mass discarded by uniformization.
    convergence_tolerance: max-norm threshold for iteration convergence.
    max_iterations: sweep/step budget.
    uniformization_slack: multiplier >= 1 applied to the max exit rate;
        strictly above 1 keeps the uniformized diagonal positive.
    """

    truncation_tolerance: float = 1e-10
    convergence_tolerance: float = 1e-9
    max_iterations: int = 1_000_000
    uniformization_slack: float = 1.02

    def __post_init__(self) -> None:
        if not 0 < self.truncation_tolerance < 1:
            raise ValueError("truncation_tolerance must be in (0, 1)")
        if not 0 < self.convergence_tolerance < 1:
            raise ValueError("convergence_tolerance must be in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.uniformization_slack < 1.0:
            raise ValueError("uniformization_slack must be >= 1")


def poisson_weights(qt: float, tol: float) -> tuple[int, int, np.ndarray]:
    """Poisson(qt) probabilities over a window [left, right] that discards
    total tail mass <= tol.

    Weights are evaluated in log space, which stays stable for qt well past
    2e5. Returns (left, right, weights) with weights[i] = pmf(left + i) and
    sum(weights) in [1 - tol, 1].
    """
    if not np.isfinite(qt) or qt < 0:
        raise ValueError(f"qt must be finite and non-negative, got {qt}")
    if not 0 < tol < 1:
        raise ValueError("tol must be in (0, 1)")
    if qt == 0:
        return 0, 0, np.array([1.0])
    # quantiles at tol/4 each side leave at most tol/2 of mass outside
    left = int(poisson_dist.ppf(tol / 4, qt))
    right = int(poisson_dist.isf(tol / 4, qt))
    ks = np.arange(left, right + 1, dtype=np.float64)
    weights = np.exp(ks * np.log(qt) - qt - gammaln(ks + 1.0))
    # The log-space formula carries a small systematic gammaln bias for
    # very large qt; pin the window mass to the cdf difference, which the
    # cephes incomplete-gamma path evaluates to near machine precision.
    below = float(poisson_dist.cdf(left - 1, qt)) if left > 0 else 0.0
    window_mass = float(poisson_dist.cdf(right, qt)) - below
    total = weights.sum()
    if total > 0.0 and window_mass > 0.0:
        weights *= window_mass / total
    return left, right, weights


@dataclass(frozen=True)
class UniformizedChain:
    """Uniformized transition matrix P^T and reward vector, built once per
    (model, config) and reused across segments of one analysis."""

    q: float
    pt: sp.csr_matrix | None  # transpose of P = I + Q/q; None when q == 0
    reward_idx: np.ndarray
    reward_val: np.ndarray
    num_states: int
    initial_state: int
    convergence_tolerance: float
    truncation_tolerance: float
    max_iterations: int

    def reward_dot(self, vec: np.ndarray) -> float:
        if self.reward_idx.size == 0:
            return 0.0
        return float(vec[self.reward_idx] @ self.reward_val)


def build_uniformized(model: SparseCtmc, cfg: SolverConfig) -> UniformizedChain:
    exits = exit_rates(model)
    max_exit = float(exits.max()) if exits.size else 0.0
    rew = model.reward_rates()
    idx = np.flatnonzero(rew)
    if max_exit == 0.0:
        pt = None
        q = 0.0
    else:
        q = cfg.uniformization_slack * max_exit
        off = generator_offdiag(model)
        n = model.num_states
        pt = (off / q + sp.diags(1.0 - exits / q)).T.tocsr()
        pt.sort_indices()
    return UniformizedChain(
        q=q,
        pt=pt,
        reward_idx=idx.astype(np.int64),
        reward_val=rew[idx],
        num_states=model.num_states,
        initial_state=model.initial_state,
        convergence_tolerance=cfg.convergence_tolerance,
        truncation_tolerance=cfg.truncation_tolerance,
        max_iterations=cfg.max_iterations,
    )


def _run_segment(
    uni: UniformizedChain, start: np.ndarray, dt: float, want_reward: bool
) -> tuple[np.ndarray, float]:
    """Advance a distribution by dt days; also return the expected reward
    accumulated over the segment when requested."""
    if dt == 0.0:
        return start, 0.0
    if uni.q == 0.0:
        # every action is a self-loop: the distribution is frozen, but
        # reward-bearing self-loops still accrue at a constant rate
        return start, uni.reward_dot(start) * dt if want_reward else 0.0
    qt = uni.q * dt
    left, right, weights = poisson_weights(qt, uni.truncation_tolerance)
    if want_reward:
        # Pr[N > i] for i = 0..right: cdf built from the left tail plus the
        # in-window cumulative sum; below the window the survival is ~1.
        left_tail = float(poisson_dist.cdf(left - 1, qt)) if left > 0 else 0.0
        cdf_window = left_tail + np.cumsum(weights)
        survivals = np.clip(1.0 - cdf_window, 0.0, 1.0)
        survival_below = 1.0
    acc = np.zeros_like(start)
    reward = 0.0
    survival_spent = 0.0
    vec = start
    tol = uni.convergence_tolerance
    for i in range(right + 1):
        if i >= left:
            acc += weights[i - left] * vec
        if want_reward:
            s_i = survivals[i - left] if i >= left else survival_below
            if uni.reward_idx.size:
                reward += s_i * uni.reward_dot(vec)
            survival_spent += s_i
        if i == right:
            break
        nxt = uni.pt @ vec
        # Steady-state detection on the L1 norm of the step difference
        # (which bounds the max-norm): once the iterated vector stops
        # changing, the remaining Poisson mass multiplies the converged
        # vector. The L1 norm keeps the aggregate drift bounded by
        # tol / spectral gap even on very large chains. Checked every
        # step early, then strided to keep the reduction off spmv's back.
        if (i < 4 or (i & 7) == 0) and float(np.abs(nxt - vec).sum()) < tol:
            if i + 1 <= left:
                remaining = float(weights.sum())
            else:
                remaining = float(weights[i + 1 - left :].sum())
            acc += remaining * nxt
            if want_reward and uni.reward_idx.size:
                # the survivals over all i sum to E[N] = qt exactly
                reward += (qt - survival_spent) * uni.reward_dot(nxt)
            return acc, reward / uni.q if want_reward else 0.0
        vec = nxt
    return acc, reward / uni.q if want_reward else 0.0


def uniformized_pass(
    model: SparseCtmc,
    checkpoints_days: np.ndarray | list[float],
    cfg: SolverConfig,
    with_reward: bool = False,
) -> tuple[list[np.ndarray], np.ndarray]:
    """One forward pass through ascending checkpoints.

    Returns the distribution at each checkpoint and, when requested, the
    cumulative expected reward accrued by each checkpoint. Each checkpoint's
    distribution seeds the next segment, so the whole series costs one
    uniformization of the final horizon.
    """
    checkpoints = np.asarray(checkpoints_days, dtype=np.float64)
    if checkpoints.size and (not np.isfinite(checkpoints).all() or checkpoints[0] < 0):
        raise ValueError("checkpoints must be finite and non-negative")
    if checkpoints.size > 1 and (np.diff(checkpoints) < 0).any():
        raise ValueError("checkpoints must be ascending")
    uni = build_uniformized(model, cfg)
    vec = np.zeros(model.num_states)
    vec[model.initial_state] = 1.0
    dists: list[np.ndarray] = []
    cum_rewards = np.zeros(checkpoints.size)
    t_prev = 0.0
    total_reward = 0.0
    for k, t in enumerate(checkpoints):
        vec, seg_reward = _run_segment(uni, vec, float(t) - t_prev, with_reward)
        total_reward += seg_reward
        dists.append(vec.copy())
        cum_rewards[k] = total_reward
        t_prev = float(t)
    return dists, cum_rewards


def transient_at(model: SparseCtmc, t_days: float, cfg: SolverConfig | None = None) -> np.ndarray:
    """Distribution at time t starting from the initial state."""
    cfg = cfg or SolverConfig()
    if not np.isfinite(t_days) or t_days < 0:
        raise ValueError(f"t must be finite and non-negative, got {t_days}")
    dists, _ = uniformized_pass(model, [t_days], cfg)
    return dists[0]


def transient_series(
    model: SparseCtmc, checkpoints_days, cfg: SolverConfig | None = None
) -> list[np.ndarray]:
    """Distributions at each ascending checkpoint, computed in one pass."""
    cfg = cfg or SolverConfig()
    dists, _ = uniformized_pass(model, checkpoints_days, cfg)
    return dists


def expected_reward(model: SparseCtmc, t_days: float, cfg: SolverConfig | None = None) -> float:
    """Expected count of reward-labeled action firings in [0, t]."""
    cfg = cfg or SolverConfig()
    if not np.isfinite(t_days) or t_days < 0:
        raise ValueError(f"t must be finite and non-negative, got {t_days}")
    if t_days == 0.0 or not model.reward_labels:
        return 0.0
    _, rewards = uniformized_pass(model, [t_days], cfg, with_reward=True)
    return float(rewards[0])


@numba.njit(cache=True)
def _gs_sweeps(indptr, indices, rates, exit_rate, pi, prev, tol, max_sweeps):
    """Gauss-Seidel sweeps over pi(s) * exit(s) = incoming flux, in place,
    renormalized each sweep. Returns (sweeps_run, max_diff, residual)."""
    n = pi.size
    sweeps = 0
    diff = np.inf
    residual = np.inf
    while sweeps < max_sweeps:
        for s in range(n):
            acc = 0.0
            for j in range(indptr[s], indptr[s + 1]):
                acc += rates[j] * pi[indices[j]]
            pi[s] = acc / exit_rate[s]
        total = 0.0
        for s in range(n):
            total += pi[s]
        diff = 0.0
        for s in range(n):
            pi[s] /= total
            d = abs(pi[s] - prev[s])
            if d > diff:
                diff = d
            prev[s] = pi[s]
        sweeps += 1
        if diff < tol:
            residual = 0.0
            for s in range(n):
                acc = 0.0
                for j in range(indptr[s], indptr[s + 1]):
                    acc += rates[j] * pi[indices[j]]
                r = abs(acc - pi[s] * exit_rate[s])
                if r > residual:
                    residual = r
            if residual < 10.0 * tol:
                return sweeps, diff, residual
    return sweeps, diff, residual


def steady_state(model: SparseCtmc, cfg: SolverConfig | None = None) -> np.ndarray:
    """Long-run distribution pi with pi Q = 0 and sum(pi) = 1.

    Refuses models that are not a single strongly connected component; no
    bottom-SCC decomposition is attempted. Raises ConvergenceError when the
    sweep budget runs out, reporting the last balance residual.
    """
    cfg = cfg or SolverConfig()
    if not strongly_connected(model):
        raise NotErgodicError(
            "steady-state analysis needs one strongly connected component; "
            "this chain has unreachable or non-returning states"
        )
    n = model.num_states
    if n == 1:
        return np.array([1.0])
    # incoming edges grouped by target, in CSC layout of the off-diagonal
    # rate matrix; sweep order is state index order (BFS discovery order
    # for built models).
    incoming = generator_offdiag(model).T.tocsr()
    incoming.sort_indices()
    exits = exit_rates(model)
    pi = np.full(n, 1.0 / n)
    prev = pi.copy()
    sweeps, diff, residual = _gs_sweeps(
        incoming.indptr,
        incoming.indices,
        incoming.data,
        exits,
        pi,
        prev,
        cfg.convergence_tolerance,
        cfg.max_iterations,
    )
    if not (diff < cfg.convergence_tolerance and residual < 10 * cfg.convergence_tolerance):
        raise ConvergenceError(
            f"Gauss-Seidel did not converge in {sweeps} sweeps "
            f"(last sweep diff {diff:.3e}, balance residual {residual:.3e})",
            residual=float(residual),
        )
    return pi
