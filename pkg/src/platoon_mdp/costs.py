"""Per-slot cost model: expiration penalty, dispatch penalty, waiting cost.

A platoon of the full size L ships free; smaller platoons pay a penalty that
shrinks linearly in the platoon size, scaled by gamma and the expiration
penalty. The intended operating regime orders the costs so that shipping a
full platoon beats waiting, waiting beats shipping a partial platoon, and
any dispatch beats an expiration. Violations of that ordering are reported,
never raised: the model stays well defined outside the regime.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dynamics import Action, transition
from .states import ModelParams, State


class InvalidSizeError(ValueError):
    """Platoon size outside 1..L."""


@dataclass(frozen=True)
class CostBreakdown:
    expiration: float
    dispatch: float
    waiting: float

    @property
    def total(self) -> float:
        return self.expiration + self.dispatch + self.waiting


def platoon_cost(size: int, params: ModelParams) -> float:
    """Dispatch penalty for a platoon of ``size`` trucks: free at size L,
    otherwise a linear fraction of gamma * c_ex."""
    if not 0 < size <= params.L:
        raise InvalidSizeError(f"platoon size must be in 1..{params.L}, got {size}")
    if size == params.L:
        return 0.0
    return (1.0 - size / params.L) * params.gamma * params.c_ex


@dataclass(frozen=True)
class OrderingViolation:
    size: int
    inequality: str
    lhs: float
    rhs: float

    def __str__(self) -> str:
        return f"cost ordering violated at size {self.size}: {self.inequality} ({self.lhs} vs {self.rhs})"


def check_cost_ordering(params: ModelParams) -> list[OrderingViolation]:
    """Report every breach of the intended cost regime.

    For each partial size 1 <= k < L the regime requires
    platoon_cost(L) < k*omega < platoon_cost(k) < c_ex.
    The returned list is empty when the regime holds (always so for L = 1).
    """
    violations: list[OrderingViolation] = []
    full = platoon_cost(params.L, params)
    for k in range(1, params.L):
        waiting = k * params.omega
        partial = platoon_cost(k, params)
        if not full < waiting:
            violations.append(OrderingViolation(k, f"platoon_cost(L) < {k}*omega", full, waiting))
        if not waiting < partial:
            violations.append(OrderingViolation(k, f"{k}*omega < platoon_cost({k})", waiting, partial))
        if not partial < params.c_ex:
            violations.append(OrderingViolation(k, f"platoon_cost({k}) < c_ex", partial, params.c_ex))
    return violations


def instantaneous_cost(s: State, action: Action, arrival: bool, params: ModelParams) -> CostBreakdown:
    """Cost of one slot from decision state ``s``.

    expiration: c_ex exactly when the earliest deadline is 1 (the truck
        departs alone during the slot), independent of action and arrival.
    dispatch: platoon_cost of the platoon actually released this slot;
        zero when nothing is released. An automatic full-capacity dispatch
        releases L trucks, whose platoon cost is zero by construction.
    waiting: omega per truck present after the decrement and arrival when
        the action is HOLD - charged even when the automatic dispatch then
        empties the station, since the controller chose to keep waiting.
        RELEASE never charges waiting.
    """
    outcome = transition(s, action, arrival, params)
    expiration = params.c_ex if (s.deadlines and s.deadlines[0] == 1) else 0.0
    if outcome.dispatched_size:
        dispatch = platoon_cost(outcome.dispatched_size, params)
    else:
        dispatch = 0.0
    if action == Action.HOLD:
        held = params.L if outcome.forced else outcome.next_state.occupancy
        waiting = held * params.omega
    else:
        waiting = 0.0
    return CostBreakdown(expiration, dispatch, waiting)
