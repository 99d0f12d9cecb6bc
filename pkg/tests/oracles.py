"""Independent reference implementations used to cross-check the solvers.

These deliberately avoid the code paths they validate: the steady-state
oracle is a dense direct linear solve, the transient oracle a scaled
Taylor-series matrix exponential, and the reachability oracle a plain
dictionary-based depth-first enumeration over Python tuples.
"""

from __future__ import annotations

import numpy as np

from keyflux.ctmc import SparseCtmc


def dense_generator(model: SparseCtmc) -> np.ndarray:
    """Dense Q with merged off-diagonal rates and -exit on the diagonal."""
    n = model.num_states
    q = np.zeros((n, n))
    for s, t, r, _ in model.iter_actions():
        if s != t:
            q[s, t] += r
    np.fill_diagonal(q, -q.sum(axis=1))
    return q


def dense_steady_state(model: SparseCtmc) -> np.ndarray:
    """Solve pi Q = 0, sum(pi) = 1 by replacing one equation."""
    q = dense_generator(model)
    n = model.num_states
    a = q.T.copy()
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    return np.linalg.solve(a, b)


def taylor_expm(a: np.ndarray, terms: int = 60, squarings: int | None = None) -> np.ndarray:
    """exp(a) via scaling-and-squaring with a truncated Taylor series."""
    norm = np.abs(a).sum(axis=1).max()
    if squarings is None:
        squarings = max(0, int(np.ceil(np.log2(max(norm, 1e-300)))) + 1)
    small = a / (2.0**squarings)
    n = a.shape[0]
    result = np.eye(n)
    term = np.eye(n)
    for k in range(1, terms + 1):
        term = term @ small / k
        result = result + term
    for _ in range(squarings):
        result = result @ result
    return result


def dense_transient(model: SparseCtmc, t: float) -> np.ndarray:
    """Distribution at time t via the dense matrix exponential."""
    q = dense_generator(model)
    p0 = np.zeros(model.num_states)
    p0[model.initial_state] = 1.0
    return p0 @ taylor_expm(q * t)


def dense_expected_reward(model: SparseCtmc, t: float, steps: int = 20000) -> float:
    """Expected reward-labeled firings in [0, t] by composite-Simpson
    quadrature of the instantaneous reward rate pi(u) . r."""
    if t == 0:
        return 0.0
    q = dense_generator(model)
    r = model.reward_rates()
    p0 = np.zeros(model.num_states)
    p0[model.initial_state] = 1.0
    if steps % 2:
        steps += 1
    # transition over one slice, reused across the grid
    du = t / steps
    step = taylor_expm(q * du)
    values = np.empty(steps + 1)
    vec = p0.copy()
    for i in range(steps + 1):
        values[i] = vec @ r
        if i < steps:
            vec = vec @ step
    weights = np.ones(steps + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return float(du / 3.0 * (weights @ values))


def enumerate_reachable(spec, params) -> tuple[set[tuple], list[tuple[tuple, tuple, float, str]]]:
    """Brute-force reachability for tiny cases: explicit per-kind guarded
    commands over plain tuples, no numpy, no shared code with the builder.

    State tuples: (size, counter(s)..., phase?, comp) per kind, mirroring
    the module variables of each strategy.
    """
    p = params
    t = spec.threshold
    k = spec.erlang_k

    def lb(s):
        size, c, comp = s
        out = []
        if size < p.max:
            out.append((("join"), (size + 1, c, comp), p.r_join * (p.max - size)))
        if size > 0 and c < t - 1:
            out.append((("leave"), (size - 1, c + 1, comp), p.r_leave * (1 - p.p_comp) * size))
            out.append((("leaveC"), (size - 1, c + 1, True), p.r_leave * p.p_comp * size))
        if size > 0 and c == t - 1:
            out.append((("leaveR"), (size - 1, 0, False), p.r_leave * size))
        if size > 0:
            out.append((("message"), s, p.r_message * (1 - p.p_comp) * size))
            out.append((("messageC"), (size, c, True), p.r_message * p.p_comp * size))
        return out

    def jb(s):
        size, c, comp = s
        out = []
        if size < p.max and c < t - 1:
            out.append((("join"), (size + 1, c + 1, comp), p.r_join * (p.max - size)))
        if size < p.max and c == t - 1:
            out.append((("joinR"), (size + 1, 0, False), p.r_join * (p.max - size)))
        if size > 0:
            out.append((("leave"), (size - 1, c, comp), p.r_leave * (1 - p.p_comp) * size))
            out.append((("leaveC"), (size - 1, c, True), p.r_leave * p.p_comp * size))
            out.append((("message"), s, p.r_message * (1 - p.p_comp) * size))
            out.append((("messageC"), (size, c, True), p.r_message * p.p_comp * size))
        return out

    def jlb(s):
        size, c, comp = s
        out = []
        if size < p.max and c < t - 1:
            out.append((("join"), (size + 1, c + 1, comp), p.r_join * (p.max - size)))
        if size < p.max and c == t - 1:
            out.append((("joinR"), (size + 1, 0, False), p.r_join * (p.max - size)))
        if size > 0 and c < t - 1:
            out.append((("leave"), (size - 1, c + 1, comp), p.r_leave * (1 - p.p_comp) * size))
            out.append((("leaveC"), (size - 1, c + 1, True), p.r_leave * p.p_comp * size))
        if size > 0 and c == t - 1:
            out.append((("leaveR"), (size - 1, 0, False), p.r_leave * size))
        if size > 0:
            out.append((("message"), s, p.r_message * (1 - p.p_comp) * size))
            out.append((("messageC"), (size, c, True), p.r_message * p.p_comp * size))
        return out

    def tb(s):
        size, phase, comp = s
        tick = k / (30.0 * t)
        out = []
        if size > 0:
            out.append((("leave"), (size - 1, phase, comp), p.r_leave * (1 - p.p_comp) * size))
            out.append((("leaveC"), (size - 1, phase, True), p.r_leave * p.p_comp * size))
            out.append((("message"), s, p.r_message * (1 - p.p_comp) * size))
            out.append((("messageC"), (size, phase, True), p.r_message * p.p_comp * size))
        if size < p.max:
            out.append((("join"), (size + 1, phase, comp), p.r_join * (p.max - size)))
        if phase < k:
            out.append((("tick"), (size, phase + 1, comp), tick))
        if phase == k:
            out.append((("reset"), (size, 1, False), tick))
        return out

    def mb(s):
        size, c, comp = s
        out = []
        if size < p.max:
            out.append((("join"), (size + 1, c, comp), p.r_join * (p.max - size)))
        if size > 0:
            out.append((("leave"), (size - 1, c, comp), p.r_leave * (1 - p.p_comp) * size))
            out.append((("leaveC"), (size - 1, c, True), p.r_leave * p.p_comp * size))
        if size > 0 and c < t - 1:
            out.append((("message"), (size, c + 1, comp), p.r_message * (1 - p.p_comp) * size))
            out.append((("messageC"), (size, c + 1, True), p.r_message * p.p_comp * size))
        if size > 0 and c == t - 1:
            out.append((("messageR"), (size, 0, False), p.r_message * size))
        return out

    def hy(s):
        size, cj, cl, phase, comp = s
        tick = k / (30.0 * t)
        reset_state = lambda sz: (sz, 0, 0, 1, False)
        out = []
        if size < p.max and cj < t - 1:
            out.append((("join"), (size + 1, cj + 1, cl, phase, comp), p.r_join * (p.max - size)))
        if size < p.max and cj == t - 1:
            out.append((("joinR"), reset_state(size + 1), p.r_join * (p.max - size)))
        if size > 0 and cl < t - 1:
            out.append((("leave"), (size - 1, cj, cl + 1, phase, comp), p.r_leave * (1 - p.p_comp) * size))
            out.append((("leaveC"), (size - 1, cj, cl + 1, phase, True), p.r_leave * p.p_comp * size))
        if size > 0 and cl == t - 1:
            out.append((("leaveR"), reset_state(size - 1), p.r_leave * size))
        if size > 0:
            out.append((("message"), s, p.r_message * (1 - p.p_comp) * size))
            out.append((("messageC"), (size, cj, cl, phase, True), p.r_message * p.p_comp * size))
        if phase < k:
            out.append((("tick"), (size, cj, cl, phase + 1, comp), tick))
        if phase == k:
            out.append((("reset"), reset_state(size), tick))
        return out

    successors = {"LB": lb, "JB": jb, "JLB": jlb, "TB": tb, "MB": mb, "HY": hy}[spec.kind]
    if spec.kind == "HY":
        init = (p.max, 0, 0, 1, False)
    elif spec.kind == "TB":
        init = (p.max, 1, False)
    else:
        init = (p.max, 0, False)
    seen = {init}
    stack = [init]
    actions = []
    while stack:
        state = stack.pop()
        for label, nxt, rate in successors(state):
            if rate <= 0:
                continue
            actions.append((state, nxt, rate, label))
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen, actions
