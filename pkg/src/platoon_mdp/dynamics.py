"""Within-slot event mechanics: deadline decrement, arrival, dispatch.

Each slot unfolds in a fixed order: every waiting deadline drops by one and
a truck reaching zero departs alone (an expiration); a Bernoulli arrival, if
any, is inserted with the full deadline; then the chosen action is applied.
RELEASE dispatches every truck present, including a same-slot arrival, as a
single platoon. HOLD keeps them, except that an arrival filling the last
slot triggers an automatic full-capacity dispatch within the same slot, so
the station is never full at the next decision.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

from .states import EMPTY, ModelParams, State


class InvalidStateError(ValueError):
    """The state does not fit the model's capacity/deadline bounds."""


class Action(IntEnum):
    HOLD = 0
    RELEASE = 1


@dataclass(frozen=True)
class SlotOutcome:
    """What one slot did: successor state and the departure bookkeeping.

    dispatched_size counts the trucks that left as a platoon this slot
    (0 when none did); a truck departing alone on expiration is counted in
    ``expired``, never in the platoon. ``forced`` marks the automatic
    full-capacity dispatch under HOLD.
    """

    next_state: State
    expired: int
    dispatched_size: int
    forced: bool


def _require_member(s: State, params: ModelParams) -> None:
    if s.occupancy > params.L:
        raise InvalidStateError(f"occupancy {s.occupancy} exceeds capacity L={params.L}")
    if s.deadlines and s.deadlines[-1] > params.T:
        raise InvalidStateError(f"deadline {s.deadlines[-1]} exceeds horizon T={params.T}")
    if s.occupancy == params.L and s.deadlines[-1] != params.T:
        raise InvalidStateError(
            f"a full station must hold a fresh deadline T={params.T}, got {s.text()}"
        )


def decrement_phase(s: State) -> tuple[State, int]:
    """Advance time by one slot: all deadlines drop, a zero departs alone.

    Returns the post-decrement state and the number of expirations (0 or 1;
    deadlines are distinct, so at most one truck can reach zero per slot).
    """
    ds = s.deadlines
    if ds and ds[0] == 1:
        return State(tuple(d - 1 for d in ds[1:])), 1
    return State(tuple(d - 1 for d in ds)), 0


def transition(s: State, action: Action, arrival: bool, params: ModelParams) -> SlotOutcome:
    """Resolve one slot from decision state ``s`` under ``action``.

    A transient full state (occupancy L) resolves by its pending automatic
    dispatch alone; its slot's events already happened.
    """
    _require_member(s, params)
    if s.occupancy == params.L:
        return SlotOutcome(EMPTY, 0, params.L, True)
    after, expired = decrement_phase(s)
    if arrival:
        after = State(after.deadlines + (params.T,))
    if action == Action.RELEASE:
        return SlotOutcome(EMPTY, expired, after.occupancy, False)
    if after.occupancy == params.L:
        return SlotOutcome(EMPTY, expired, params.L, True)
    return SlotOutcome(after, expired, 0, False)


def transition_distribution(
    s: State, action: Action, params: ModelParams
) -> list[tuple[State, float]]:
    """Successor distribution over the arrival event: [(state, probability)].

    The no-arrival branch comes first; branches landing on the same state
    are merged, so the entries always describe distinct states and their
    probabilities sum to 1.
    """
    quiet = transition(s, action, False, params).next_state
    busy = transition(s, action, True, params).next_state
    if quiet == busy:
        return [(quiet, 1.0)]
    return [(quiet, 1.0 - params.p), (busy, params.p)]
