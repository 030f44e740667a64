"""Dispatch policies: capacity-greedy, deadline-threshold, table-driven.

The greedy policy never volunteers a dispatch; it rides the automatic
full-capacity dispatch. The deadline policy releases one slot before an
expiration would become unavoidable. The threshold family generalizes that
trigger to any deadline value and ``optimize_delta`` searches the family,
either exactly through the induced chain or by coupled simulation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

from .dynamics import Action
from .simulate import coupled_experiment
from .solver import PolicyTable, exact_average_cost
from .states import ModelParams, State


@dataclass(frozen=True)
class Policy:
    """A labeled stationary decision rule over decision states."""

    label: str
    decide: Callable[[State], Action]


def greedy_decide(s: State, params: ModelParams) -> Action:
    """RELEASE only at full capacity - which decision states never are."""
    return Action.RELEASE if s.occupancy >= params.L else Action.HOLD


def deadline_decide(s: State, params: ModelParams) -> Action:
    """RELEASE when the earliest deadline reaches 2: the last slot at which
    a voluntary dispatch still beats the expiration."""
    if s.occupancy >= params.L:
        return Action.RELEASE
    if s.deadlines and s.deadlines[0] == 2:
        return Action.RELEASE
    return Action.HOLD


def delta_decide(s: State, delta: int, params: ModelParams) -> Action:
    """RELEASE exactly when the earliest deadline equals ``delta``.

    Matching by equality suffices along the chain's own trajectories: a
    deadline cannot decrement past ``delta`` without first hitting it.
    """
    if not 1 <= delta <= params.T:
        raise ValueError(f"delta must lie in 1..{params.T}, got {delta}")
    if s.occupancy >= params.L:
        return Action.RELEASE
    if s.deadlines and s.deadlines[0] == delta:
        return Action.RELEASE
    return Action.HOLD


def greedy_policy(params: ModelParams) -> Policy:
    return Policy("greedy", lambda s: greedy_decide(s, params))


def deadline_policy(params: ModelParams) -> Policy:
    return Policy("deadline", lambda s: deadline_decide(s, params))


def delta_policy(delta: int, params: ModelParams) -> Policy:
    if not 1 <= delta <= params.T:
        raise ValueError(f"delta must lie in 1..{params.T}, got {delta}")
    return Policy(f"delta[{delta}]", lambda s: delta_decide(s, delta, params))


def table_policy(table: PolicyTable, label: str = "optimal") -> Policy:
    return Policy(label, table.decide)


@dataclass(frozen=True)
class DeltaSearchResult:
    best_delta: int
    cost_by_delta: dict[int, float] = field(compare=False)
    evaluation_mode: str = "exact"


def optimize_delta(
    params: ModelParams,
    evaluation_mode: str = "exact",
    delta_range: Iterable[int] | None = None,
    *,
    replications: int = 10,
    slots_per_run: int = 20_000,
    master_seed: int = 20240,
) -> DeltaSearchResult:
    """Best threshold over ``delta_range`` (default: every value 1..T).

    "exact" scores each threshold by the stationary average cost of its
    induced chain; "simulated" scores by the mean of coupled replications,
    every threshold seeing identical arrival streams. Ties go to the
    smallest threshold.
    """
    if evaluation_mode not in ("exact", "simulated"):
        raise ValueError(f"unknown evaluation mode {evaluation_mode!r}")
    deltas = list(delta_range) if delta_range is not None else list(range(1, params.T + 1))
    if not deltas:
        raise ValueError("delta_range is empty")
    for d in deltas:
        if not 1 <= d <= params.T:
            raise ValueError(f"delta {d} outside 1..{params.T}")

    cost_by_delta: dict[int, float] = {}
    if evaluation_mode == "exact":
        for d in deltas:
            cost_by_delta[d] = exact_average_cost(delta_policy(d, params), params)
    else:
        batches = coupled_experiment(
            [delta_policy(d, params) for d in deltas],
            params,
            replications=replications,
            slots_per_run=slots_per_run,
            master_seed=master_seed,
        )
        for d, runs in zip(deltas, batches):
            cost_by_delta[d] = sum(r.avg_cost_per_slot for r in runs) / len(runs)

    best = min(cost_by_delta, key=lambda d: (cost_by_delta[d], d))
    return DeltaSearchResult(best, cost_by_delta, evaluation_mode)
