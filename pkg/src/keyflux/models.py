"""Builders for the six key-update-strategy CTMCs.

Each strategy is a pair of synchronized reactive modules: a device pool
(network size, leave/join/message events, each event possibly leaking the
key) and a coordinator tracking a strategy-specific counter or timer that
triggers key updates. A labeled action fires only when both sides enable it,
at the product of the module rates (an omitted rate is 1). The product of
the two guarded-command sets is flattened here into one command table per
strategy kind; comments on each command give the composed guard and rate.

State spaces are generated by breadth-first reachability from the initial
state (full network, fresh key, counters cleared, timer at phase 1). States
are indexed in FIFO discovery order and only reachable states are emitted.
The exploration is layered and vectorized: every state is a mixed-radix
code over the declared variable ranges, and each BFS layer applies every
command to the whole frontier at once.

Action labels ending in R update the key (and carry reward where the
strategy counts them); labels ending in C leak it. The unlabeled Erlang
phase advance of the timer-based strategies is named "tick" here.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .ctmc import SparseCtmc

KINDS = ("LB", "JB", "JLB", "TB", "MB", "HY")

DEFAULT_THRESHOLDS: dict[str, tuple[int, ...]] = {
    "LB": (1, 2, 3, 4, 5),
    "JB": (1, 2, 3, 4, 5),
    "JLB": (1, 2, 3, 4, 5),
    "TB": (1, 2, 3, 4, 5),
    "MB": (500, 1000, 1500, 2000, 2500),
    "HY": (1, 2, 3, 4, 5),
}

THRESHOLD_UNITS: dict[str, str] = {
    "LB": "Device",
    "JB": "Device",
    "JLB": "Device",
    "TB": "Month",
    "MB": "Message",
    "HY": "Device and Month",
}

DEFAULT_ERLANG_PHASES = 100
DEFAULT_STATE_CAP = 10_000_000


class StateSpaceCapExceeded(RuntimeError):
    """Raised when reachability exploration passes the configured cap."""


@dataclass(frozen=True)
class NetworkParams:
    """Scenario constants: network capacity and per-device event rates.

    Rates are per day. p_comp is the probability that a single leave or
    message event leaks the current key.
    """

    max: int = 50
    r_join: float = 0.5
    r_leave: float = 0.00274
    r_message: float = 1.0
    p_comp: float = 0.0001

    def __post_init__(self) -> None:
        if self.max < 1:
            raise ValueError("max must be >= 1")
        for name in ("r_join", "r_leave", "r_message"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 <= self.p_comp <= 1.0:
            raise ValueError("p_comp must be in [0, 1]")


@dataclass(frozen=True)
class StrategySpec:
    """A strategy kind plus its update threshold.

    The threshold unit depends on the kind: devices for LB/JB/JLB, months
    for TB, messages for MB, and a tied device-and-month value for HY.
    erlang_k is the Erlang phase count of the TB/HY timer.
    """

    kind: str
    threshold: int
    erlang_k: int = DEFAULT_ERLANG_PHASES

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}; expected one of {KINDS}")
        if self.threshold < 1:
            raise ValueError("threshold must be >= 1")
        if self.erlang_k < 1:
            raise ValueError("erlang_k must be >= 1")


def normalize_kind(text: str) -> str:
    """Map user spellings (hy, Hy/MB, jlb, ...) to the canonical kind."""
    key = text.strip().upper().replace("/MB", "") if text.strip().upper() != "MB" else "MB"
    if key not in KINDS:
        raise ValueError(f"unknown strategy kind {text!r}; expected one of {KINDS}")
    return key


Fields = dict[str, np.ndarray]


@dataclass(frozen=True)
class _Command:
    """One composed guarded command: label, enabling guard, rate expression
    and variable updates, all vectorized over arrays of states."""

    label: str
    guard: Callable[[Fields], np.ndarray]
    rate: Callable[[Fields], np.ndarray]
    update: Callable[[Fields], Fields]


@dataclass(frozen=True)
class _Layout:
    """Mixed-radix packing of the state variables into a single int code."""

    names: tuple[str, ...]
    bases: tuple[int, ...]
    strides: tuple[int, ...] = field(init=False)
    capacity: int = field(init=False)

    def __post_init__(self) -> None:
        strides = []
        cap = 1
        for base in reversed(self.bases):
            strides.append(cap)
            cap *= base
        object.__setattr__(self, "strides", tuple(reversed(strides)))
        object.__setattr__(self, "capacity", cap)

    def encode(self, fields: Fields) -> np.ndarray:
        code = None
        for name, stride in zip(self.names, self.strides):
            term = np.asarray(fields[name], dtype=np.int64) * stride
            code = term if code is None else code + term
        return code

    def decode(self, codes: np.ndarray) -> Fields:
        out: Fields = {}
        for name, base, stride in zip(self.names, self.bases, self.strides):
            out[name] = (codes // stride) % base
        return out


def _updated(fields: Fields, **changes) -> Fields:
    new = dict(fields)
    for name, value in changes.items():
        new[name] = value
    return new


def _lb_commands(p: NetworkParams, n: int) -> list[_Command]:
    # leave-based: coordinator counts leaves, every n-th leave updates the key
    return [
        # join: Size<Max, rate R_join*(Max-Size); coordinator passes
        _Command(
            "join",
            lambda f: f["size"] < p.max,
            lambda f: p.r_join * (p.max - f["size"]),
            lambda f: _updated(f, size=f["size"] + 1),
        ),
        # leave: Size>0 and C_leave<N-1, rate R_leave*(1-P_comp)*Size
        _Command(
            "leave",
            lambda f: (f["size"] > 0) & (f["c_leave"] < n - 1),
            lambda f: p.r_leave * (1.0 - p.p_comp) * f["size"],
            lambda f: _updated(f, size=f["size"] - 1, c_leave=f["c_leave"] + 1),
        ),
        # leaveC: same guard, rate R_leave*P_comp*Size, leaks the key
        _Command(
            "leaveC",
            lambda f: (f["size"] > 0) & (f["c_leave"] < n - 1),
            lambda f: p.r_leave * p.p_comp * f["size"],
            lambda f: _updated(f, size=f["size"] - 1, c_leave=f["c_leave"] + 1, comp=1),
        ),
        # leaveR: Size>0 and C_leave=N-1, rate R_leave*Size, resets key
        _Command(
            "leaveR",
            lambda f: (f["size"] > 0) & (f["c_leave"] == n - 1),
            lambda f: p.r_leave * f["size"],
            lambda f: _updated(f, size=f["size"] - 1, c_leave=0, comp=0),
        ),
        # message: Size>0, rate R_message*(1-P_comp)*Size, no state change
        _Command(
            "message",
            lambda f: f["size"] > 0,
            lambda f: p.r_message * (1.0 - p.p_comp) * f["size"],
            lambda f: f,
        ),
        # messageC: Size>0, rate R_message*P_comp*Size, leaks the key
        _Command(
            "messageC",
            lambda f: f["size"] > 0,
            lambda f: p.r_message * p.p_comp * f["size"],
            lambda f: _updated(f, comp=1),
        ),
    ]


def _jb_commands(p: NetworkParams, j: int) -> list[_Command]:
    # join-based: every j-th join updates the key; leaves always pass through
    return [
        _Command(
            "join",
            lambda f: (f["size"] < p.max) & (f["c_join"] < j - 1),
            lambda f: p.r_join * (p.max - f["size"]),
            lambda f: _updated(f, size=f["size"] + 1, c_join=f["c_join"] + 1),
        ),
        _Command(
            "joinR",
            lambda f: (f["size"] < p.max) & (f["c_join"] == j - 1),
            lambda f: p.r_join * (p.max - f["size"]),
            lambda f: _updated(f, size=f["size"] + 1, c_join=0, comp=0),
        ),
        _Command(
            "leave",
            lambda f: f["size"] > 0,
            lambda f: p.r_leave * (1.0 - p.p_comp) * f["size"],
            lambda f: _updated(f, size=f["size"] - 1),
        ),
        _Command(
            "leaveC",
            lambda f: f["size"] > 0,
            lambda f: p.r_leave * p.p_comp * f["size"],
            lambda f: _updated(f, size=f["size"] - 1, comp=1),
        ),
        _Command(
            "message",
            lambda f: f["size"] > 0,
            lambda f: p.r_message * (1.0 - p.p_comp) * f["size"],
            lambda f: f,
        ),
        _Command(
            "messageC",
            lambda f: f["size"] > 0,
            lambda f: p.r_message * p.p_comp * f["size"],
            lambda f: _updated(f, comp=1),
        ),
    ]


def _jlb_commands(p: NetworkParams, jl: int) -> list[_Command]:
    # join-leave-based: one counter incremented by joins and leaves alike
    return [
        _Command(
            "join",
            lambda f: (f["size"] < p.max) & (f["c_jl"] < jl - 1),
            lambda f: p.r_join * (p.max - f["size"]),
            lambda f: _updated(f, size=f["size"] + 1, c_jl=f["c_jl"] + 1),
        ),
        _Command(
            "joinR",
            lambda f: (f["size"] < p.max) & (f["c_jl"] == jl - 1),
            lambda f: p.r_join * (p.max - f["size"]),
            lambda f: _updated(f, size=f["size"] + 1, c_jl=0, comp=0),
        ),
        _Command(
            "leave",
            lambda f: (f["size"] > 0) & (f["c_jl"] < jl - 1),
            lambda f: p.r_leave * (1.0 - p.p_comp) * f["size"],
            lambda f: _updated(f, size=f["size"] - 1, c_jl=f["c_jl"] + 1),
        ),
        _Command(
            "leaveC",
            lambda f: (f["size"] > 0) & (f["c_jl"] < jl - 1),
            lambda f: p.r_leave * p.p_comp * f["size"],
            lambda f: _updated(f, size=f["size"] - 1, c_jl=f["c_jl"] + 1, comp=1),
        ),
        _Command(
            "leaveR",
            lambda f: (f["size"] > 0) & (f["c_jl"] == jl - 1),
            lambda f: p.r_leave * f["size"],
            lambda f: _updated(f, size=f["size"] - 1, c_jl=0, comp=0),
        ),
        _Command(
            "message",
            lambda f: f["size"] > 0,
            lambda f: p.r_message * (1.0 - p.p_comp) * f["size"],
            lambda f: f,
        ),
        _Command(
            "messageC",
            lambda f: f["size"] > 0,
            lambda f: p.r_message * p.p_comp * f["size"],
            lambda f: _updated(f, comp=1),
        ),
    ]


def _tb_commands(p: NetworkParams, m: int, k: int) -> list[_Command]:
    # time-based: Erlang(k) timer with total mean 30*m days drives resets;
    # leaves and messages only move devices or leak the key
    tick_rate = float(k) / (30.0 * m)
    return [
        _Command(
            "leave",
            lambda f: f["size"] > 0,
            lambda f: p.r_leave * (1.0 - p.p_comp) * f["size"],
            lambda f: _updated(f, size=f["size"] - 1),
        ),
        _Command(
            "leaveC",
            lambda f: f["size"] > 0,
            lambda f: p.r_leave * p.p_comp * f["size"],
            lambda f: _updated(f, size=f["size"] - 1, comp=1),
        ),
        _Command(
            "join",
            lambda f: f["size"] < p.max,
            lambda f: p.r_join * (p.max - f["size"]),
            lambda f: _updated(f, size=f["size"] + 1),
        ),
        _Command(
            "message",
            lambda f: f["size"] > 0,
            lambda f: p.r_message * (1.0 - p.p_comp) * f["size"],
            lambda f: f,
        ),
        _Command(
            "messageC",
            lambda f: f["size"] > 0,
            lambda f: p.r_message * p.p_comp * f["size"],
            lambda f: _updated(f, comp=1),
        ),
        # Erlang phase advance, coordinator-internal
        _Command(
            "tick",
            lambda f: f["phase"] < k,
            lambda f: np.full(f["phase"].shape, tick_rate),
            lambda f: _updated(f, phase=f["phase"] + 1),
        ),
        # reset at the last phase: device side contributes rate 1
        _Command(
            "reset",
            lambda f: f["phase"] == k,
            lambda f: np.full(f["phase"].shape, tick_rate),
            lambda f: _updated(f, phase=1, comp=0),
        ),
    ]


def _mb_commands(p: NetworkParams, msg: int) -> list[_Command]:
    # message-based: every msg-th message updates the key; leaves never do
    return [
        _Command(
            "join",
            lambda f: f["size"] < p.max,
            lambda f: p.r_join * (p.max - f["size"]),
            lambda f: _updated(f, size=f["size"] + 1),
        ),
        _Command(
            "leave",
            lambda f: f["size"] > 0,
            lambda f: p.r_leave * (1.0 - p.p_comp) * f["size"],
            lambda f: _updated(f, size=f["size"] - 1),
        ),
        _Command(
            "leaveC",
            lambda f: f["size"] > 0,
            lambda f: p.r_leave * p.p_comp * f["size"],
            lambda f: _updated(f, size=f["size"] - 1, comp=1),
        ),
        _Command(
            "message",
            lambda f: (f["size"] > 0) & (f["c_msg"] < msg - 1),
            lambda f: p.r_message * (1.0 - p.p_comp) * f["size"],
            lambda f: _updated(f, c_msg=f["c_msg"] + 1),
        ),
        _Command(
            "messageC",
            lambda f: (f["size"] > 0) & (f["c_msg"] < msg - 1),
            lambda f: p.r_message * p.p_comp * f["size"],
            lambda f: _updated(f, c_msg=f["c_msg"] + 1, comp=1),
        ),
        _Command(
            "messageR",
            lambda f: (f["size"] > 0) & (f["c_msg"] == msg - 1),
            lambda f: p.r_message * f["size"],
            lambda f: _updated(f, c_msg=0, comp=0),
        ),
    ]


def _hy_commands(p: NetworkParams, j: int, k: int) -> list[_Command]:
    # hybrid: join counter, leave counter and Erlang timer all tied to j;
    # any of joinR/leaveR/reset performs the full reset
    tick_rate = float(k) / (30.0 * j)

    def full_reset(f: Fields, **extra) -> Fields:
        return _updated(f, c_join=0, c_leave=0, phase=1, comp=0, **extra)

    return [
        _Command(
            "join",
            lambda f: (f["size"] < p.max) & (f["c_join"] < j - 1),
            lambda f: p.r_join * (p.max - f["size"]),
            lambda f: _updated(f, size=f["size"] + 1, c_join=f["c_join"] + 1),
        ),
        _Command(
            "joinR",
            lambda f: (f["size"] < p.max) & (f["c_join"] == j - 1),
            lambda f: p.r_join * (p.max - f["size"]),
            lambda f: full_reset(f, size=f["size"] + 1),
        ),
        _Command(
            "leave",
            lambda f: (f["size"] > 0) & (f["c_leave"] < j - 1),
            lambda f: p.r_leave * (1.0 - p.p_comp) * f["size"],
            lambda f: _updated(f, size=f["size"] - 1, c_leave=f["c_leave"] + 1),
        ),
        _Command(
            "leaveC",
            lambda f: (f["size"] > 0) & (f["c_leave"] < j - 1),
            lambda f: p.r_leave * p.p_comp * f["size"],
            lambda f: _updated(f, size=f["size"] - 1, c_leave=f["c_leave"] + 1, comp=1),
        ),
        _Command(
            "leaveR",
            lambda f: (f["size"] > 0) & (f["c_leave"] == j - 1),
            lambda f: p.r_leave * f["size"],
            lambda f: full_reset(f, size=f["size"] - 1),
        ),
        _Command(
            "message",
            lambda f: f["size"] > 0,
            lambda f: p.r_message * (1.0 - p.p_comp) * f["size"],
            lambda f: f,
        ),
        _Command(
            "messageC",
            lambda f: f["size"] > 0,
            lambda f: p.r_message * p.p_comp * f["size"],
            lambda f: _updated(f, comp=1),
        ),
        _Command(
            "tick",
            lambda f: f["phase"] < k,
            lambda f: np.full(f["phase"].shape, tick_rate),
            lambda f: _updated(f, phase=f["phase"] + 1),
        ),
        _Command(
            "reset",
            lambda f: f["phase"] == k,
            lambda f: np.full(f["phase"].shape, tick_rate),
            lambda f: full_reset(f),
        ),
    ]


def _strategy_table(
    spec: StrategySpec, params: NetworkParams
) -> tuple[_Layout, Fields, list[_Command], frozenset[str]]:
    """Layout, initial state, command table and reward labels per kind.

    Variable bases follow the declared ranges: counters span [0..threshold]
    and the timer phase spans [1..k+1] (stored 0-based), even though the
    top value is never reachable; reachability trims them.
    """
    t = spec.threshold
    k = spec.erlang_k
    size_base = params.max + 1
    if spec.kind == "LB":
        layout = _Layout(("size", "c_leave", "comp"), (size_base, t + 1, 2))
        init = {"size": params.max, "c_leave": 0, "comp": 0}
        return layout, init, _lb_commands(params, t), frozenset({"leaveR"})
    if spec.kind == "JB":
        layout = _Layout(("size", "c_join", "comp"), (size_base, t + 1, 2))
        init = {"size": params.max, "c_join": 0, "comp": 0}
        return layout, init, _jb_commands(params, t), frozenset({"joinR"})
    if spec.kind == "JLB":
        layout = _Layout(("size", "c_jl", "comp"), (size_base, t + 1, 2))
        init = {"size": params.max, "c_jl": 0, "comp": 0}
        return layout, init, _jlb_commands(params, t), frozenset({"leaveR", "joinR"})
    if spec.kind == "TB":
        layout = _Layout(("size", "phase", "comp"), (size_base, k + 2, 2))
        init = {"size": params.max, "phase": 1, "comp": 0}
        return layout, init, _tb_commands(params, t, k), frozenset({"reset"})
    if spec.kind == "MB":
        layout = _Layout(("size", "c_msg", "comp"), (size_base, t + 1, 2))
        init = {"size": params.max, "c_msg": 0, "comp": 0}
        return layout, init, _mb_commands(params, t), frozenset({"messageR"})
    # HY
    layout = _Layout(
        ("size", "c_join", "c_leave", "phase", "comp"),
        (size_base, t + 1, t + 1, k + 2, 2),
    )
    init = {"size": params.max, "c_join": 0, "c_leave": 0, "phase": 1, "comp": 0}
    return layout, init, _hy_commands(params, t, k), frozenset({"joinR", "leaveR", "reset"})


def build_model(
    spec: StrategySpec,
    params: NetworkParams,
    state_cap: int = DEFAULT_STATE_CAP,
    keep_state_vars: bool = True,
) -> SparseCtmc:
    """Explore the reachable state space of a strategy and return its CTMC.

    Breadth-first from the initial state; indices in FIFO discovery order;
    two builds with identical inputs yield identical state orderings and
    action lists. Commands whose rate evaluates to zero (e.g. p_comp = 0)
    contribute no transitions.
    """
    layout, init, commands, reward_labels = _strategy_table(spec, params)
    n_cmd = len(commands)
    label_names = tuple(c.label for c in commands)

    index = np.full(layout.capacity, -1, dtype=np.int32)
    init_code = int(layout.encode({k: np.array([v]) for k, v in init.items()})[0])
    index[init_code] = 0
    num_states = 1
    code_chunks: list[np.ndarray] = [np.array([init_code], dtype=np.int64)]
    src_chunks: list[np.ndarray] = []
    tgt_codes_chunks: list[np.ndarray] = []
    rate_chunks: list[np.ndarray] = []
    label_chunks: list[np.ndarray] = []

    frontier = code_chunks[0]
    while frontier.size:
        fields = layout.decode(frontier)
        cand = np.full((frontier.size, n_cmd), -1, dtype=np.int64)
        cand_rate = np.zeros((frontier.size, n_cmd))
        for ci, cmd in enumerate(commands):
            mask = cmd.guard(fields)
            if not mask.any():
                continue
            rate = np.broadcast_to(
                np.asarray(cmd.rate(fields), dtype=np.float64), (frontier.size,)
            )
            mask = mask & (rate > 0)
            if not mask.any():
                continue
            sub = {name: arr[mask] for name, arr in fields.items()}
            cand[mask, ci] = layout.encode(cmd.update(sub))
            cand_rate[mask, ci] = rate[mask]

        flat = cand.ravel()  # state-major, command-minor: FIFO visit order
        enabled = flat >= 0
        tgt_codes = flat[enabled]
        src_idx = np.repeat(index[frontier], n_cmd)[enabled]
        rates = cand_rate.ravel()[enabled]
        labels = np.tile(np.arange(n_cmd, dtype=np.int16), frontier.size)[enabled]
        src_chunks.append(src_idx.astype(np.int32))
        tgt_codes_chunks.append(tgt_codes)
        rate_chunks.append(rates)
        label_chunks.append(labels)

        fresh = tgt_codes[index[tgt_codes] < 0]
        if fresh.size:
            _, first_pos = np.unique(fresh, return_index=True)
            new_codes = fresh[np.sort(first_pos)]
            index[new_codes] = np.arange(
                num_states, num_states + new_codes.size, dtype=np.int32
            )
            num_states += new_codes.size
            if num_states > state_cap:
                raise StateSpaceCapExceeded(
                    f"{spec.kind} threshold {spec.threshold} max {params.max}: "
                    f"more than {state_cap} reachable states"
                )
            code_chunks.append(new_codes)
            frontier = new_codes
        else:
            frontier = np.empty(0, dtype=np.int64)

    all_codes = np.concatenate(code_chunks)
    state_fields = layout.decode(all_codes)
    comp = state_fields["comp"].astype(bool)
    src = np.concatenate(src_chunks) if src_chunks else np.empty(0, dtype=np.int32)
    tgt = (
        index[np.concatenate(tgt_codes_chunks)]
        if tgt_codes_chunks
        else np.empty(0, dtype=np.int32)
    )
    rate = np.concatenate(rate_chunks) if rate_chunks else np.empty(0)
    label_id = (
        np.concatenate(label_chunks) if label_chunks else np.empty(0, dtype=np.int16)
    )
    state_vars = None
    if keep_state_vars:
        state_vars = {
            name: arr.astype(np.int32)
            for name, arr in state_fields.items()
            if name != "comp"
        }
    return SparseCtmc(
        num_states=num_states,
        initial_state=0,
        src=src,
        tgt=tgt.astype(np.int32),
        rate=rate,
        label_id=label_id,
        labels=label_names,
        comp=comp,
        reward_labels=reward_labels,
        state_vars=state_vars,
    )


def state_space_summary(
    spec: StrategySpec,
    params: NetworkParams,
    state_cap: int = DEFAULT_STATE_CAP,
) -> tuple[int, int]:
    """(state count, merged edge count) without retaining the model."""
    from .ctmc import merged_edge_count

    model = build_model(spec, params, state_cap=state_cap, keep_state_vars=False)
    return model.num_states, merged_edge_count(model)
