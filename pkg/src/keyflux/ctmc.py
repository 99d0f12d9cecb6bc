"""Sparse continuous-time Markov chain representation and structural operations.

A chain is stored in columnar form: four parallel arrays describe the
action-labeled transitions (source, target, rate, label id), which keeps
multi-million-transition models cheap to build and to hand to the solvers.
Self-loop actions are legal and are kept in the action list because they can
carry reward, but they never contribute to exit rates: a CTMC self-loop does
not alter the distribution.

Distributions are plain float64 numpy arrays with one probability per state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


class ModelError(ValueError):
    """Raised when a chain violates a structural invariant."""


@dataclass(frozen=True)
class SparseCtmc:
    """Action-labeled sparse CTMC with compromise flags and reward labels.

    Attributes:
        num_states: number of reachable states.
        initial_state: index of the state holding probability 1 at time 0.
        src, tgt: int32 arrays, per-action source and target state indices.
        rate: float64 array, per-action rate in events/day (strictly positive).
        label_id: int16 array indexing into ``labels``.
        labels: tuple of action names.
        comp: bool array, per state, true iff the state is compromised.
        reward_labels: action names that carry reward 1 per firing.
        state_vars: optional per-state variable columns (size, counters,
            phase, comp) attached by the model builders for diagnostics.
    """

    num_states: int
    initial_state: int
    src: np.ndarray
    tgt: np.ndarray
    rate: np.ndarray
    label_id: np.ndarray
    labels: tuple[str, ...]
    comp: np.ndarray
    reward_labels: frozenset[str] = frozenset()
    state_vars: dict[str, np.ndarray] | None = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        n = self.num_states
        if n < 1:
            raise ModelError("a chain needs at least one state")
        if not 0 <= self.initial_state < n:
            raise ModelError(f"initial state {self.initial_state} out of range")
        if not (len(self.src) == len(self.tgt) == len(self.rate) == len(self.label_id)):
            raise ModelError("action columns have mismatched lengths")
        if len(self.src) and (self.src.min() < 0 or self.src.max() >= n):
            raise ModelError("action source index out of range")
        if len(self.tgt) and (self.tgt.min() < 0 or self.tgt.max() >= n):
            raise ModelError("action target index out of range")
        if len(self.rate) and not (np.isfinite(self.rate).all() and (self.rate > 0).all()):
            raise ModelError("action rates must be strictly positive and finite")
        if len(self.comp) != n:
            raise ModelError("comp flag array length must equal num_states")
        unknown = self.reward_labels - set(self.labels)
        if unknown:
            raise ModelError(f"reward labels not present in actions: {sorted(unknown)}")

    @property
    def num_actions(self) -> int:
        return len(self.src)

    def iter_actions(self):
        """Yield (source, target, rate, label) tuples; for small models only."""
        for s, t, r, l in zip(self.src, self.tgt, self.rate, self.label_id):
            yield int(s), int(t), float(r), self.labels[l]

    def reward_label_ids(self) -> np.ndarray:
        return np.array(
            [i for i, name in enumerate(self.labels) if name in self.reward_labels],
            dtype=np.int16,
        )

    def reward_rates(self) -> np.ndarray:
        """Per-state reward accrual rate: summed rates of reward-labeled
        actions leaving the state, self-loops included."""
        r = np.zeros(self.num_states)
        ids = self.reward_label_ids()
        if ids.size:
            mask = np.isin(self.label_id, ids)
            np.add.at(r, self.src[mask], self.rate[mask])
        return r


def from_action_list(
    num_states: int,
    actions: list[tuple[int, int, float, str]],
    comp_states: list[int] | None = None,
    reward_labels: frozenset[str] | set[str] = frozenset(),
    initial_state: int = 0,
) -> SparseCtmc:
    """Build a chain from an explicit action list. Convenience for tests
    and hand-written examples; model builders use the columnar path."""
    labels: list[str] = []
    label_index: dict[str, int] = {}
    lid = np.empty(len(actions), dtype=np.int16)
    src = np.empty(len(actions), dtype=np.int32)
    tgt = np.empty(len(actions), dtype=np.int32)
    rate = np.empty(len(actions), dtype=np.float64)
    for i, (s, t, r, name) in enumerate(actions):
        if name not in label_index:
            label_index[name] = len(labels)
            labels.append(name)
        src[i], tgt[i], rate[i], lid[i] = s, t, r, label_index[name]
    comp = np.zeros(num_states, dtype=bool)
    if comp_states:
        comp[list(comp_states)] = True
    return SparseCtmc(
        num_states=num_states,
        initial_state=initial_state,
        src=src,
        tgt=tgt,
        rate=rate,
        label_id=lid,
        labels=tuple(labels),
        comp=comp,
        reward_labels=frozenset(reward_labels),
    )


def merged_edges(model: SparseCtmc) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Merge parallel actions with identical (source, target) by summing rates.

    Self-loops are retained as entries. The number of merged edges is the
    transition count reported for a model. Returns (src, tgt, rate) arrays
    sorted by (source, target).
    """
    if model.num_actions == 0:
        empty_i = np.empty(0, dtype=np.int64)
        return empty_i, empty_i.copy(), np.empty(0, dtype=np.float64)
    key = model.src.astype(np.int64) * model.num_states + model.tgt
    uniq, inverse = np.unique(key, return_inverse=True)
    summed = np.bincount(inverse, weights=model.rate, minlength=len(uniq))
    return uniq // model.num_states, uniq % model.num_states, summed


def merged_edge_count(model: SparseCtmc) -> int:
    """Count of distinct (source, target) pairs, self-loops included."""
    if model.num_actions == 0:
        return 0
    key = model.src.astype(np.int64) * model.num_states + model.tgt
    return int(np.unique(key).size)


def exit_rates(model: SparseCtmc) -> np.ndarray:
    """Per-state total rate to *other* states. Self-loop rates are excluded,
    so an absorbing state (no outgoing non-self edges) has exit rate 0.
    The generator Q has Q(s, s) = -exit_rate(s)."""
    moving = model.src != model.tgt
    return np.bincount(
        model.src[moving], weights=model.rate[moving], minlength=model.num_states
    ).astype(np.float64)


def generator_offdiag(model: SparseCtmc) -> sp.csr_matrix:
    """Off-diagonal part of the generator as CSR over merged edges
    (self-loops dropped): entry (s, t) = summed rate s -> t for s != t."""
    ms, mt, mr = merged_edges(model)
    moving = ms != mt
    return sp.csr_matrix(
        (mr[moving], (ms[moving], mt[moving])),
        shape=(model.num_states, model.num_states),
    )


def strongly_connected(model: SparseCtmc) -> bool:
    """True iff the merged-edge digraph (self-loops ignored) is a single
    strongly connected component."""
    if model.num_states == 1:
        return True
    moving = model.src != model.tgt
    if not moving.any():
        return False
    graph = sp.csr_matrix(
        (
            np.ones(int(moving.sum()), dtype=np.int8),
            (model.src[moving], model.tgt[moving]),
        ),
        shape=(model.num_states, model.num_states),
    )
    n_comp, _ = connected_components(graph, directed=True, connection="strong")
    return n_comp == 1
