"""Experiment metrics: cost ratio between the rewritten and the input tree,
balance histograms over non-singleton clusters, replication aggregation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import mean, stdev

from .cost import total_cost
from .errors import AggregationError, DegenerateInputError, ParameterError
from .tree import Dendrogram, cluster_balance
from .types import SimilarityGraph

DEFAULT_BINS = 50


@dataclass
class Histogram:
    """Right-closed bins over [0, 1]; dataset_balance is the reference value
    a perfectly fair tree would concentrate on."""

    bins: int
    counts: list[int]
    dataset_balance: float

    def to_dict(self) -> dict:
        return {"bins": self.bins, "counts": list(self.counts)}

    def to_csv(self) -> str:
        lines = ["bin_midpoint,count"]
        for i, c in enumerate(self.counts):
            lines.append(f"{(i + 0.5) / self.bins},{c}")
        return "\n".join(lines) + "\n"


def bin_index(value: float, bins: int) -> int:
    """Bin of a balance value; bin i covers (i/bins, (i+1)/bins], bin 0 also
    contains 0. A hair of slack absorbs float noise at bin edges."""
    if value <= 0.0:
        return 0
    return min(bins - 1, math.ceil(value * bins - 1e-9) - 1)


def balance_histogram(tree: Dendrogram, color: int, bins: int = DEFAULT_BINS) -> Histogram:
    """Histogram of cluster_balance over all non-singleton clusters."""
    if bins < 1:
        raise ParameterError("need at least one bin")
    counts = [0] * bins
    for nid in tree.internal_nodes():
        if tree.leaf_count(nid) >= 2:
            counts[bin_index(cluster_balance(tree, nid, color), bins)] += 1
    return Histogram(bins=bins, counts=counts,
                     dataset_balance=cluster_balance(tree, tree.root, color))


def cost_ratio(vanilla: Dendrogram, fair: Dendrogram,
               graph: SimilarityGraph) -> float:
    """total_cost(fair) / total_cost(vanilla)."""
    base = total_cost(vanilla, graph)
    if base == 0.0:
        raise DegenerateInputError("vanilla tree has zero cost")
    return total_cost(fair, graph) / base


@dataclass
class RunReport:
    params: dict
    cost_vanilla: float
    cost_fair: float
    ratio_cost: float
    histogram: Histogram
    dataset_balance: list[float]
    audit: dict
    timings_ms: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "cost_vanilla": self.cost_vanilla,
            "cost_fair": self.cost_fair,
            "ratio_cost": self.ratio_cost,
            "histogram": self.histogram.to_dict(),
            "dataset_balance": list(self.dataset_balance),
            "audit": self.audit,
            "timings_ms": self.timings_ms,
        }


def aggregate(reports: list[RunReport]) -> dict:
    """Mean and standard error of ratio_cost plus merged histograms over
    replications that share all parameters except the seed."""
    if not reports:
        raise AggregationError("nothing to aggregate")

    def comparable(params: dict) -> dict:
        return {k: v for k, v in params.items() if k != "seed"}

    shared = comparable(reports[0].params)
    for r in reports[1:]:
        if comparable(r.params) != shared:
            raise AggregationError("reports have mismatched params")
        if r.histogram.bins != reports[0].histogram.bins:
            raise AggregationError("reports have mismatched histogram bins")
    ratios = [r.ratio_cost for r in reports]
    stderr = 0.0
    if len(ratios) > 1:
        stderr = stdev(ratios) / math.sqrt(len(ratios))
    merged = [sum(col) for col in zip(*(r.histogram.counts for r in reports))]
    return {
        "replications": len(reports),
        "ratio_cost_mean": mean(ratios),
        "ratio_cost_stderr": stderr,
        "histogram": {"bins": reports[0].histogram.bins, "counts": merged},
        "params": shared,
    }
