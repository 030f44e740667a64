"""Replicated station simulation on shared, splittable arrival randomness.

Arrival streams use a counter-based generator (Philox keyed by the stream
seed), so the boolean sequence for a given (seed, length, p) is identical
on every platform and independent of how the stream is consumed. Coupled
experiments derive one stream per replication from a master seed and feed
the very same stream to every policy, which removes between-policy noise
from the comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import comb

import numpy as np

from .costs import instantaneous_cost
from .dynamics import transition
from .states import EMPTY, ModelParams, State


@dataclass(frozen=True)
class ArrivalStream:
    """One replication's worth of arrival randomness.

    The uniforms are generated once per stream object and shared by every
    policy simulated against it; thresholding by p yields the arrival
    booleans. Same (seed, length, p) always yields the same booleans.
    """

    seed: int
    length: int

    def __post_init__(self) -> None:
        if self.length < 1:
            raise ValueError(f"stream length must be >= 1, got {self.length}")

    @cached_property
    def uniforms(self) -> np.ndarray:
        bit_gen = np.random.Philox(key=self.seed)
        return np.random.Generator(bit_gen).random(self.length)

    def arrivals(self, p: float) -> np.ndarray:
        return self.uniforms < p


def replication_seeds(master_seed: int, replications: int) -> list[int]:
    """Deterministic per-replication stream seeds derived from one master."""
    return [
        int(np.random.SeedSequence(entropy=[int(master_seed), r]).generate_state(1, np.uint64)[0])
        for r in range(replications)
    ]


@dataclass(frozen=True)
class RunResult:
    """Aggregate of one simulated run.

    platoon_size_histogram[k] counts the dispatches of exactly k trucks
    (index 0 unused); its mass equals voluntary plus forced dispatches.
    """

    total_cost: float
    slots: int
    avg_cost_per_slot: float
    expirations: int
    forced_dispatches: int
    voluntary_dispatches: int
    platoon_size_histogram: tuple[int, ...]
    trace: tuple | None = None


def simulate_run(policy, params: ModelParams, stream, collect_trace: bool = False) -> RunResult:
    """Run one policy from an empty station over the stream's slots.

    Per-state slot resolutions are memoized: under a stationary policy the
    action and both event branches depend only on the current state.
    """
    decide = policy.decide if hasattr(policy, "decide") else policy
    arrivals = stream.arrivals(params.p).tolist()
    cache: dict[State, tuple] = {}
    s = EMPTY
    total = 0.0
    expirations = 0
    forced = 0
    voluntary = 0
    histogram = [0] * (params.L + 1)
    trace: list | None = [] if collect_trace else None

    for arrived in arrivals:
        entry = cache.get(s)
        if entry is None:
            action = decide(s)
            branches = []
            for event in (False, True):
                out = transition(s, action, event, params)
                cost = instantaneous_cost(s, action, event, params).total
                branches.append((out.next_state, cost, out.expired, out.dispatched_size, out.forced))
            entry = (action, branches[0], branches[1])
            cache[s] = entry
        action = entry[0]
        next_state, cost, expired, dispatched, was_forced = entry[2] if arrived else entry[1]
        total += cost
        expirations += expired
        if dispatched:
            histogram[dispatched] += 1
            if was_forced:
                forced += 1
            else:
                voluntary += 1
        if trace is not None:
            trace.append((s, action, arrived))
        s = next_state

    slots = len(arrivals)
    return RunResult(
        total_cost=total,
        slots=slots,
        avg_cost_per_slot=total / slots,
        expirations=expirations,
        forced_dispatches=forced,
        voluntary_dispatches=voluntary,
        platoon_size_histogram=tuple(histogram),
        trace=tuple(trace) if trace is not None else None,
    )


def coupled_experiment(
    policies,
    params: ModelParams,
    replications: int,
    slots_per_run: int,
    master_seed: int,
) -> list[list[RunResult]]:
    """Evaluate every policy on identical arrival streams, per replication.

    Returns one list of RunResults per policy, aligned with the input
    order; permuting the policies permutes the output without changing any
    run's numbers.
    """
    if replications < 2:
        raise ValueError(f"need at least 2 replications for an experiment, got {replications}")
    seeds = replication_seeds(master_seed, replications)
    results: list[list[RunResult]] = [[] for _ in policies]
    for seed in seeds:
        stream = ArrivalStream(seed, slots_per_run)
        for i, policy in enumerate(policies):
            results[i].append(simulate_run(policy, params, stream))
    return results


def arrival_fraction_check(p: float, n_slots: int, k: int) -> float:
    """Exact probability that at least ``k`` of ``n_slots`` Bernoulli(p)
    slots see an arrival; a quick sanity bound on observed arrival counts."""
    if k <= 0:
        return 1.0
    if k > n_slots:
        return 0.0
    return float(sum(comb(n_slots, i) * p**i * (1.0 - p) ** (n_slots - i) for i in range(k, n_slots + 1)))
