"""Average-cost dynamic programming over the decision states.

The recursion accumulates total expected cost over a growing horizon:
``Q_{n+1}(s, a) = E_arrival[ cost(s, a, e) + V_n(successor) ]`` with
``V_0 = 0`` and ``V_{n+1} = min_a Q_{n+1}``. Undiscounted values grow
linearly with the horizon, so the solver monitors the extracted policy
rather than the values and stops once the policy has stayed fixed for a
configurable window of sweeps. The slope ``V_{n+1}(empty) - V_n(empty)``
estimates the long-run average cost per slot; ``exact_average_cost``
provides an independent check through the stationary distribution of the
chain a fixed policy induces.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .costs import check_cost_ordering, instantaneous_cost
from .dynamics import Action, transition
from .states import EMPTY, ModelParams, State, StateSpace, UnknownStateError, space_for

# Ties between HOLD and RELEASE resolve to HOLD whenever |delta| falls
# within this margin; keeps the extracted policy stable under float noise.
TIE_EPS = 1e-12


class MissingValueError(KeyError):
    """Successor state has no entry in the supplied value table."""


class SingularChainError(RuntimeError):
    """The induced chain's stationary system could not be solved to tolerance."""


@dataclass(frozen=True, eq=False)
class ValueTable:
    """Expected total cost over ``horizon`` slots, per decision state.

    Values are stored in enumeration order. Lookups on a transient full
    state resolve through its automatic dispatch to the empty state.
    """

    space: StateSpace
    horizon: int
    values: np.ndarray

    @classmethod
    def zeros(cls, space: StateSpace) -> "ValueTable":
        return cls(space, 0, np.zeros(space.decision_count))

    def value(self, s: State) -> float:
        if s.occupancy == self.space.L:
            return float(self.values[0])
        try:
            idx = self.space.index(s)
        except UnknownStateError as err:
            raise MissingValueError(str(err)) from None
        return float(self.values[idx])

    def items(self):
        for i, s in enumerate(self.space.decision_states):
            yield s, float(self.values[i])


@dataclass(frozen=True, eq=False)
class PolicyTable:
    """Extracted stationary policy with its HOLD-minus-RELEASE margins.

    ``delta(s)`` is Q(s, HOLD) - Q(s, RELEASE) at the final sweep; the
    stored action is RELEASE exactly when that margin exceeds TIE_EPS.
    """

    space: StateSpace
    actions: np.ndarray
    deltas: np.ndarray
    label: str = "optimal"

    def decide(self, s: State) -> Action:
        return Action(int(self.actions[self.space.index(s)]))

    def delta(self, s: State) -> float:
        return float(self.deltas[self.space.index(s)])

    def items(self):
        for i, s in enumerate(self.space.decision_states):
            yield s, Action(int(self.actions[i]))


@dataclass(frozen=True)
class SolveReport:
    iterations_run: int
    policy_stable_at: int
    average_cost_estimate: float
    warnings: tuple[str, ...]
    converged: bool


def q_value(s: State, action: Action, v_prev: ValueTable, params: ModelParams) -> float:
    """One-step lookahead cost: expected slot cost plus previous-horizon value."""
    p = params.p
    quiet = transition(s, action, False, params)
    busy = transition(s, action, True, params)
    cost_quiet = instantaneous_cost(s, action, False, params).total
    cost_busy = instantaneous_cost(s, action, True, params).total
    return (1.0 - p) * (cost_quiet + v_prev.value(quiet.next_state)) + p * (
        cost_busy + v_prev.value(busy.next_state)
    )


def _stage_arrays(params: ModelParams, space: StateSpace):
    """Per-state slot costs and successor indices for both actions/events."""
    n = space.decision_count
    cost = np.zeros((n, 2, 2))
    succ = np.zeros((n, 2, 2), dtype=np.int64)
    for i, s in enumerate(space.decision_states):
        for a in (Action.HOLD, Action.RELEASE):
            for e in (0, 1):
                out = transition(s, a, bool(e), params)
                cost[i, a, e] = instantaneous_cost(s, a, bool(e), params).total
                succ[i, a, e] = space.index(out.next_state)
    return cost, succ


def value_iterate(
    params: ModelParams,
    max_iters: int = 5000,
    stability_window: int = 25,
) -> tuple[ValueTable, PolicyTable, SolveReport]:
    """Sweep the recursion until the extracted policy stops changing.

    Stops after the policy has been identical for ``stability_window``
    consecutive sweeps, or at ``max_iters`` (then flagged: converged=False
    and a NO_CONVERGENCE warning; tables are still returned). Each sweep
    reads only the previous sweep's table and writes a fresh one.
    """
    space = space_for(params.L, params.T)
    cost, succ = _stage_arrays(params, space)
    p = params.p
    v = np.zeros(space.decision_count)
    release_prev: np.ndarray | None = None
    stable = 0
    policy_stable_at = 0
    iterations = 0
    avg_estimate = 0.0
    delta = np.zeros(space.decision_count)

    while iterations < max_iters:
        iterations += 1
        q = (1.0 - p) * (cost[:, :, 0] + v[succ[:, :, 0]]) + p * (cost[:, :, 1] + v[succ[:, :, 1]])
        v_next = q.min(axis=1)
        delta = q[:, 0] - q[:, 1]
        release = delta > TIE_EPS
        if release_prev is not None and np.array_equal(release, release_prev):
            stable += 1
        else:
            stable = 0
            policy_stable_at = iterations
        avg_estimate = float(v_next[0] - v[0])
        v = v_next
        release_prev = release
        if stable >= stability_window:
            break

    converged = stable >= stability_window
    warnings = [str(violation) for violation in check_cost_ordering(params)]
    if not converged:
        warnings.append(
            f"NO_CONVERGENCE: policy still changing after {iterations} sweeps "
            f"(stability window {stability_window})"
        )
    values = ValueTable(space, iterations, v)
    policy = PolicyTable(space, release.astype(np.int8), delta)
    report = SolveReport(iterations, policy_stable_at, avg_estimate, tuple(warnings), converged)
    return values, policy, report


def _decide_fn(policy):
    return policy.decide if hasattr(policy, "decide") else policy


def _policy_chain(policy, params: ModelParams):
    """Breadth-first closure of the induced chain from the empty state.

    Returns the visited decision states, each state's two successor indices
    (no-arrival, arrival), and its expected slot cost under the policy.
    """
    decide = _decide_fn(policy)
    p = params.p
    states: list[State] = [EMPTY]
    index: dict[State, int] = {EMPTY: 0}
    succ: list[tuple[int, int]] = []
    mean_cost: list[float] = []
    queue: deque[State] = deque([EMPTY])
    while queue:
        s = queue.popleft()
        a = decide(s)
        out_quiet = transition(s, a, False, params)
        out_busy = transition(s, a, True, params)
        cost = (1.0 - p) * instantaneous_cost(s, a, False, params).total + p * instantaneous_cost(
            s, a, True, params
        ).total
        pair = []
        for nxt in (out_quiet.next_state, out_busy.next_state):
            if nxt not in index:
                index[nxt] = len(states)
                states.append(nxt)
                queue.append(nxt)
            pair.append(index[nxt])
        succ.append((pair[0], pair[1]))
        mean_cost.append(cost)
    return states, succ, np.asarray(mean_cost)


def _stationary_distribution(succ: list[tuple[int, int]], p: float) -> np.ndarray:
    """Stationary row vector of the two-successor chain, by direct solve.

    Solves mu (P - I) = 0 with the last balance equation replaced by the
    normalization sum(mu) = 1. Duplicate triplets (self-loops meeting the
    diagonal -1) are summed by the sparse constructor.
    """
    m = len(succ)
    if m == 1:
        return np.ones(1)
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for i, (j_quiet, j_busy) in enumerate(succ):
        for j, w in ((j_quiet, 1.0 - p), (j_busy, p)):
            if j != m - 1:  # row m-1 is reserved for the normalization
                rows.append(j)
                cols.append(i)
                vals.append(w)
    for i in range(m - 1):
        rows.append(i)
        cols.append(i)
        vals.append(-1.0)
    rows.extend([m - 1] * m)
    cols.extend(range(m))
    vals.extend([1.0] * m)
    b = np.zeros(m)
    b[m - 1] = 1.0
    matrix = sp.coo_matrix((vals, (rows, cols)), shape=(m, m)).tocsc()
    try:
        mu = spsolve(matrix, b)
    except Exception as err:  # pragma: no cover - scipy failure path
        raise SingularChainError(f"stationary solve failed: {err}") from err
    if not np.all(np.isfinite(mu)):
        raise SingularChainError("stationary solve produced non-finite mass")
    if mu.min() < -1e-9:
        raise SingularChainError(f"stationary solve produced negative mass {mu.min()}")
    mu = np.clip(mu, 0.0, None)
    total = mu.sum()
    if not np.isfinite(total) or total <= 0:
        raise SingularChainError("stationary mass does not normalize")
    mu = mu / total
    # residual check against the balance equations
    flow = np.zeros(m)
    for i, (j_quiet, j_busy) in enumerate(succ):
        flow[j_quiet] += mu[i] * (1.0 - p)
        flow[j_busy] += mu[i] * p
    if np.abs(flow - mu).max() > 1e-9:
        raise SingularChainError("stationary residual exceeds tolerance")
    return mu


def exact_average_cost(policy, params: ModelParams) -> float:
    """Long-run expected cost per slot of a fixed policy.

    Builds the chain the policy induces over the decision states reachable
    from the empty station, solves its stationary distribution, and averages
    the expected slot cost. The empty state's recurrent class is the whole
    reachable closure: every state drains to empty on an arrival-free
    stretch, so the chain restricted to that closure is irreducible.
    """
    _, succ, mean_cost = _policy_chain(policy, params)
    mu = _stationary_distribution(succ, params.p)
    return float(mu @ mean_cost)
