"""Replication statistics: normal-quantile confidence intervals, comparisons."""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from statistics import NormalDist, fmean, stdev


class InsufficientDataError(ValueError):
    """Fewer than two replications: no spread estimate is possible."""


@dataclass(frozen=True)
class PolicySummary:
    label: str
    mean: float
    ci_low: float
    ci_high: float
    replications: int


@dataclass(frozen=True)
class Comparison:
    """Which summary sits lower, and whether their intervals separate.

    ``lower`` is None on an exact tie of means. ``significant`` is True only
    when the two intervals are disjoint; identical or nested intervals are
    never significant.
    """

    lower: str | None
    significant: bool


def summarize(label: str, results, confidence: float = 0.99) -> PolicySummary:
    """Mean average cost across replications with a normal-quantile interval.

    Interval half-width is z * s / sqrt(n) with the sample (n-1) standard
    deviation; identical replications collapse the interval to a point.
    """
    costs = [r.avg_cost_per_slot for r in results]
    if len(costs) < 2:
        raise InsufficientDataError(f"need >= 2 replications, got {len(costs)}")
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    mean = fmean(costs)
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    half_width = z * stdev(costs) / sqrt(len(costs))
    return PolicySummary(label, mean, mean - half_width, mean + half_width, len(costs))


def compare(a: PolicySummary, b: PolicySummary) -> Comparison:
    if a.mean < b.mean:
        lower = a.label
    elif b.mean < a.mean:
        lower = b.label
    else:
        lower = None
    significant = a.ci_high < b.ci_low or b.ci_high < a.ci_low
    return Comparison(lower, significant)
