"""Structural checks on dispatch policies.

A well-behaved threshold-style policy should not flip back to HOLD as
deadlines loosen, should keep releasing as deadlines tighten, and should
make the states "behind" a release point unreachable from an empty start.
These checkers verify those shapes computationally for any policy that
exposes ``decide(state) -> Action``; they report facts and never assume the
policy was produced by the solver. For capacities above 3 the same checks
run in an advisory capacity (the shapes are only guaranteed at capacity 3).

Check identifiers:
  a  tail monotonicity      HOLD at single-truck deadline d implies HOLD at d+1
  b  diagonal monotonicity  HOLD survives shifting every deadline up by one
  c  dispatch monotonicity  RELEASE survives tightening deadlines by one
  d  tail reachability      deadlines below a single-truck release point never occur
  e  diagonal reachability  diagonal predecessors of a release point never occur

The monotonicity checks (a, b, c) compare only states whose earliest
deadline is 2 or more. A truck one slot from its deadline departs this slot
whichever action is taken, so at earliest-deadline-1 states the comparison
between holding and releasing concerns the other trucks alone and the
threshold shape carries no promise there; those states are covered by the
reachability checks (d, e) instead, which typically prove them unvisited.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .dynamics import Action, transition
from .states import EMPTY, ModelParams, State, space_for


@dataclass(frozen=True)
class Violation:
    state: State
    neighbor: State
    action: Action
    neighbor_action: Action

    def to_json_dict(self) -> dict:
        return {
            "state": self.state.text(),
            "neighbor": self.neighbor.text(),
            "action": self.action.name,
            "neighbor_action": self.neighbor_action.name,
        }


@dataclass(frozen=True)
class PropertyReport:
    property_id: str
    violations: tuple[Violation, ...]
    checked: int

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json_dict(self) -> dict:
        return {
            "property": self.property_id,
            "violations": [v.to_json_dict() for v in self.violations],
            "checked": self.checked,
        }


@dataclass(frozen=True)
class ReachabilitySet:
    """Decision states visitable from an empty station under one policy."""

    states: frozenset[State]

    def __contains__(self, s: State) -> bool:
        return s in self.states

    def __len__(self) -> int:
        return len(self.states)


def _decide_fn(policy):
    return policy.decide if hasattr(policy, "decide") else policy


def reachable_set(policy, params: ModelParams) -> ReachabilitySet:
    """Closure of the empty state under the policy's slot transitions.

    Transient full states resolve inside the transition, so the closure
    contains decision states only. Always contains the empty state.
    """
    decide = _decide_fn(policy)
    seen: set[State] = {EMPTY}
    queue: deque[State] = deque([EMPTY])
    while queue:
        s = queue.popleft()
        a = decide(s)
        for arrival in (False, True):
            nxt = transition(s, a, arrival, params).next_state
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return ReachabilitySet(frozenset(seen))


def check_tail_monotonicity(policy, params: ModelParams) -> PropertyReport:
    """HOLD at a lone truck with deadline d must persist at deadline d+1.

    Starts at d=2: a deadline-1 truck departs this slot either way, so the
    hold/release comparison at d=1 is about a possible arrival, not the truck.
    """
    decide = _decide_fn(policy)
    violations: list[Violation] = []
    checked = 0
    if params.L >= 2:  # no single-truck decision states at capacity 1
        for d in range(2, params.T):
            s = State((d,))
            neighbor = State((d + 1,))
            checked += 1
            if decide(s) == Action.HOLD and decide(neighbor) != Action.HOLD:
                violations.append(Violation(s, neighbor, Action.HOLD, Action.RELEASE))
    return PropertyReport("a", tuple(violations), checked)


def check_diagonal_monotonicity(policy, params: ModelParams) -> PropertyReport:
    """HOLD must survive shifting every deadline up by one (when in range)."""
    decide = _decide_fn(policy)
    space = space_for(params.L, params.T)
    violations: list[Violation] = []
    checked = 0
    for s in space.decision_states:
        # earliest deadline 2+: a deadline-1 truck leaves regardless of action
        if s.occupancy < 2 or s.deadlines[0] < 2 or s.deadlines[-1] >= params.T:
            continue
        neighbor = State(tuple(d + 1 for d in s.deadlines))
        checked += 1
        if decide(s) == Action.HOLD and decide(neighbor) != Action.HOLD:
            violations.append(Violation(s, neighbor, Action.HOLD, Action.RELEASE))
    return PropertyReport("b", tuple(violations), checked)


def _tightened_neighbors(s: State) -> list[State]:
    """States one decrement tighter: each single coordinate, then all at once.

    Candidates whose earliest deadline would drop below 2 are skipped, along
    with ones that would break the strict deadline ordering.
    """
    out: list[State] = []
    ds = s.deadlines
    for i, d in enumerate(ds):
        lower = d - 1
        floor = 2 if i == 0 else ds[i - 1] + 1
        if lower < floor:
            continue
        out.append(State(ds[:i] + (lower,) + ds[i + 1 :]))
    if ds[0] > 2:
        out.append(State(tuple(d - 1 for d in ds)))
    return out


def check_dispatch_monotonicity(policy, params: ModelParams) -> PropertyReport:
    """RELEASE at a multi-truck state must survive tightening the deadlines.

    Neighbors tighten one coordinate by one slot, or all coordinates at
    once; both endpoints of a comparison must keep their earliest deadline
    at 2 or above, since a deadline-1 truck departs whichever action is
    taken and the release incentive no longer tracks the threshold shape.
    """
    decide = _decide_fn(policy)
    space = space_for(params.L, params.T)
    violations: list[Violation] = []
    checked = 0
    for s in space.decision_states:
        if s.occupancy < 2 or s.deadlines[0] < 2 or decide(s) != Action.RELEASE:
            continue
        for neighbor in _tightened_neighbors(s):
            checked += 1
            if decide(neighbor) != Action.RELEASE:
                violations.append(Violation(s, neighbor, Action.RELEASE, Action.HOLD))
    return PropertyReport("c", tuple(violations), checked)


def check_unreachable_tail(policy, params: ModelParams, reach: ReachabilitySet) -> PropertyReport:
    """Single-truck states below a release deadline must stay unreachable."""
    decide = _decide_fn(policy)
    violations: list[Violation] = []
    checked = 0
    if params.L >= 2:
        for d in range(1, params.T + 1):
            s = State((d,))
            if decide(s) != Action.RELEASE:
                continue
            for k in range(1, d):
                below = State((d - k,))
                checked += 1
                if below in reach:
                    violations.append(Violation(s, below, Action.RELEASE, decide(below)))
    return PropertyReport("d", tuple(violations), checked)


def check_unreachable_diagonal(policy, params: ModelParams, reach: ReachabilitySet) -> PropertyReport:
    """Diagonal predecessors of a multi-truck release must stay unreachable.

    For a released state, every state obtained by shifting all deadlines
    down by the same amount (keeping the earliest at 1 or above) would have
    led back to the release point and must not appear in the reachable set.
    """
    decide = _decide_fn(policy)
    space = space_for(params.L, params.T)
    violations: list[Violation] = []
    checked = 0
    for s in space.decision_states:
        if s.occupancy < 2 or decide(s) != Action.RELEASE:
            continue
        for k in range(1, s.deadlines[0]):
            below = State(tuple(d - k for d in s.deadlines))
            checked += 1
            if below in reach:
                violations.append(Violation(s, below, Action.RELEASE, decide(below)))
    return PropertyReport("e", tuple(violations), checked)


def run_all_checks(policy, params: ModelParams) -> list[PropertyReport]:
    """All five checks against one policy, reusing a single reachability pass."""
    reach = reachable_set(policy, params)
    return [
        check_tail_monotonicity(policy, params),
        check_diagonal_monotonicity(policy, params),
        check_dispatch_monotonicity(policy, params),
        check_unreachable_tail(policy, params, reach),
        check_unreachable_diagonal(policy, params, reach),
    ]


@dataclass(frozen=True)
class GridRow:
    state: State
    d1: int | None
    d2: int | None
    action: Action
    reachable: bool


def export_policy_grid(policy, params: ModelParams, reach: ReachabilitySet) -> list[GridRow]:
    """Plottable policy plane: the empty state, every single-truck state,
    and every two-truck state, each with its action and reachability flag."""
    decide = _decide_fn(policy)
    space = space_for(params.L, params.T)
    rows: list[GridRow] = []
    for s in space.decision_states:
        if s.occupancy > 2:
            break
        d1 = s.deadlines[0] if s.occupancy >= 1 else None
        d2 = s.deadlines[1] if s.occupancy >= 2 else None
        rows.append(GridRow(s, d1, d2, decide(s), s in reach))
    return rows
