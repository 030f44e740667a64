"""Finite-capacity truck-platoon dispatch under per-truck deadlines.

Submodules:
  states     state model, parameters, enumeration
  dynamics   within-slot mechanics (decrement, arrival, dispatch)
  costs      per-slot cost breakdown and cost-ordering checks
  solver     average-cost recursion, policy extraction, exact evaluation
  structure  monotonicity and reachability checks on policies
  policies   heuristic policy family and threshold search
  simulate   coupled replication simulation
  stats      replication summaries and comparisons
  cli        command-line entry points
"""

from .costs import (
    CostBreakdown,
    InvalidSizeError,
    OrderingViolation,
    check_cost_ordering,
    instantaneous_cost,
    platoon_cost,
)
from .dynamics import (
    Action,
    InvalidStateError,
    SlotOutcome,
    decrement_phase,
    transition,
    transition_distribution,
)
from .policies import (
    DeltaSearchResult,
    Policy,
    deadline_decide,
    deadline_policy,
    delta_decide,
    delta_policy,
    greedy_decide,
    greedy_policy,
    optimize_delta,
    table_policy,
)
from .simulate import (
    ArrivalStream,
    RunResult,
    arrival_fraction_check,
    coupled_experiment,
    replication_seeds,
    simulate_run,
)
from .solver import (
    MissingValueError,
    PolicyTable,
    SingularChainError,
    SolveReport,
    ValueTable,
    exact_average_cost,
    q_value,
    value_iterate,
)
from .states import (
    EMPTY,
    UNOCCUPIED,
    ModelParams,
    State,
    StateSpace,
    UnknownStateError,
    cardinality,
    enumerate_states,
    space_for,
    state_index,
)
from .stats import Comparison, InsufficientDataError, PolicySummary, compare, summarize
from .structure import (
    GridRow,
    PropertyReport,
    ReachabilitySet,
    Violation,
    check_diagonal_monotonicity,
    check_dispatch_monotonicity,
    check_tail_monotonicity,
    check_unreachable_diagonal,
    check_unreachable_tail,
    export_policy_grid,
    reachable_set,
    run_all_checks,
)

__version__ = "0.1.0"
