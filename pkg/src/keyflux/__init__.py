"""keyflux: quantitative analysis of key-update strategies for sensor networks.

Builds the six strategy CTMCs, solves them for key-compromise risk and
key-update cost, and assembles design-efficiency curves (risk percentage
versus monthly update cost) for security designers.
"""

from .ctmc import (
    ModelError,
    SparseCtmc,
    exit_rates,
    from_action_list,
    merged_edge_count,
    merged_edges,
    strongly_connected,
)
from .models import (
    DEFAULT_THRESHOLDS,
    KINDS,
    THRESHOLD_UNITS,
    NetworkParams,
    StateSpaceCapExceeded,
    StrategySpec,
    build_model,
    normalize_kind,
    state_space_summary,
)
from .solvers import (
    ConvergenceError,
    NotErgodicError,
    SolverConfig,
    SolverError,
    expected_reward,
    poisson_weights,
    steady_state,
    transient_at,
    transient_series,
)

__all__ = [
    "ModelError",
    "SparseCtmc",
    "exit_rates",
    "from_action_list",
    "merged_edge_count",
    "merged_edges",
    "strongly_connected",
    "DEFAULT_THRESHOLDS",
    "KINDS",
    "THRESHOLD_UNITS",
    "NetworkParams",
    "StateSpaceCapExceeded",
    "StrategySpec",
    "build_model",
    "normalize_kind",
    "state_space_summary",
    "ConvergenceError",
    "NotErgodicError",
    "SolverConfig",
    "SolverError",
    "expected_reward",
    "poisson_weights",
    "steady_state",
    "transient_at",
    "transient_series",
]

__version__ = "0.1.0"
