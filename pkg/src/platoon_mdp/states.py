"""Station state model: deadline vectors, problem parameters, enumeration.

A station holds up to ``L`` trucks. Every waiting truck carries a remaining
deadline in ``{1..T}`` slots, and because at most one truck arrives per slot
the deadlines present at any instant are pairwise distinct. A state stores
the occupied slots as a strictly increasing tuple of deadlines (earliest
first); slots beyond the occupancy are implicitly :data:`UNOCCUPIED`.

States with occupancy ``L`` exist only transiently, in the slot whose arrival
filled the station: the newest truck still carries the full deadline ``T``,
and an automatic dispatch empties the station before the next decision.
Decision states are exactly the states with occupancy below ``L``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations


class UnknownStateError(KeyError):
    """The state is not a member of the enumerated state set."""


class _Unoccupied:
    """Sentinel for an empty slot. Deliberately supports no arithmetic."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "UNOCCUPIED"


UNOCCUPIED = _Unoccupied()


@dataclass(frozen=True)
class State:
    """Deadlines of the trucks currently at the station, earliest first.

    Only occupied slots are stored. Entries are integers >= 1, strictly
    increasing; both properties are enforced at construction.
    """

    deadlines: tuple[int, ...]

    def __post_init__(self) -> None:
        ds = tuple(int(d) for d in self.deadlines)
        object.__setattr__(self, "deadlines", ds)
        if any(d < 1 for d in ds):
            raise ValueError(f"deadlines must be >= 1, got {ds}")
        if any(a >= b for a, b in zip(ds, ds[1:])):
            raise ValueError(f"deadlines must be strictly increasing, got {ds}")

    @property
    def occupancy(self) -> int:
        return len(self.deadlines)

    @property
    def is_empty(self) -> bool:
        return not self.deadlines

    @property
    def earliest(self) -> int | None:
        """Deadline of the next truck to expire, or None when empty."""
        return self.deadlines[0] if self.deadlines else None

    def slots(self, capacity: int):
        """The state as a fixed-length slot tuple, padded with UNOCCUPIED."""
        if len(self.deadlines) > capacity:
            raise ValueError(f"occupancy {len(self.deadlines)} exceeds capacity {capacity}")
        return self.deadlines + (UNOCCUPIED,) * (capacity - len(self.deadlines))

    def text(self) -> str:
        """Canonical text form, e.g. ``[]``, ``[3]``, ``[2,7]``."""
        return "[" + ",".join(str(d) for d in self.deadlines) + "]"

    @classmethod
    def from_text(cls, text: str) -> "State":
        body = text.strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise ValueError(f"not a state literal: {text!r}")
        inner = body[1:-1].strip()
        if not inner:
            return cls(())
        return cls(tuple(int(part) for part in inner.split(",")))

    def __str__(self) -> str:
        return self.text()


EMPTY = State(())


@dataclass(frozen=True)
class ModelParams:
    """Scalar parameters of the dispatch control problem.

    L       station capacity (platoon size ceiling), integer >= 1
    T       deadline horizon granted to a fresh arrival, integer >= 1
    p       per-slot arrival probability, 0 < p < 1
    c_ex    penalty for a truck that leaves with an expired deadline
    omega   per-truck, per-slot waiting cost
    gamma   dispatch-penalty shape factor, 0 < gamma <= 1
    """

    L: int
    T: int
    p: float
    c_ex: float
    omega: float
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if not (isinstance(self.L, int) and self.L >= 1):
            raise ValueError(f"L must be an integer >= 1, got {self.L!r}")
        if not (isinstance(self.T, int) and self.T >= 1):
            raise ValueError(f"T must be an integer >= 1, got {self.T!r}")
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must lie strictly between 0 and 1, got {self.p!r}")
        if not self.c_ex > 0:
            raise ValueError(f"c_ex must be positive, got {self.c_ex!r}")
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega!r}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma!r}")


def cardinality(params: ModelParams) -> int:
    """Number of states: all partial occupancies plus transient full states.

    Closed form: sum over occupancy k < L of C(T, k) strictly increasing
    deadline combinations, plus C(T-1, L-1) full configurations whose newest
    slot holds a fresh deadline T.
    """
    T, L = params.T, params.L
    return sum(math.comb(T, k) for k in range(L)) + math.comb(T - 1, L - 1)


class StateSpace:
    """Enumerated state set for one ``(L, T)`` pair.

    Enumeration order is deterministic: occupancy-major, then lexicographic
    on the deadline tuple, with the transient full states after all decision
    states. The empty state is always index 0, and the decision states form
    a prefix of the full enumeration, so value/policy arrays indexed by
    decision-state position stay valid against the full index.
    """

    def __init__(self, L: int, T: int):
        self.L = L
        self.T = T
        decision: list[State] = []
        for k in range(L):
            decision.extend(State(combo) for combo in combinations(range(1, T + 1), k))
        full = [State(combo + (T,)) for combo in combinations(range(1, T), L - 1)]
        self.decision_states: tuple[State, ...] = tuple(decision)
        self.full_states: tuple[State, ...] = tuple(full)
        self.all_states: tuple[State, ...] = self.decision_states + self.full_states
        self._index: dict[State, int] = {s: i for i, s in enumerate(self.all_states)}

    @property
    def decision_count(self) -> int:
        return len(self.decision_states)

    def __len__(self) -> int:
        return len(self.all_states)

    def __contains__(self, s: State) -> bool:
        return s in self._index

    def index(self, s: State) -> int:
        try:
            return self._index[s]
        except KeyError:
            raise UnknownStateError(f"state {s.text()} is not in the (L={self.L}, T={self.T}) state set") from None

    def is_decision(self, s: State) -> bool:
        return s in self._index and s.occupancy < self.L


@lru_cache(maxsize=64)
def space_for(L: int, T: int) -> StateSpace:
    """Shared, cached StateSpace for an ``(L, T)`` pair."""
    return StateSpace(L, T)


def enumerate_states(params: ModelParams, include_full: bool = True) -> list[State]:
    """All states in enumeration order; decision states only when asked."""
    space = space_for(params.L, params.T)
    return list(space.all_states if include_full else space.decision_states)


def state_index(s: State, params: ModelParams) -> int:
    """Position of ``s`` in the full enumeration (empty state is 0)."""
    return space_for(params.L, params.T).index(s)
