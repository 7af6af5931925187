"""Average-linkage agglomerative clustering: repeatedly merge the cluster pair
with maximum average inter-cluster similarity.

Ties are broken toward the lexicographically smallest (min id, max id) pair,
with cluster ids assigned in creation order (leaves 0..n-1, then merges).
Cross-weight sums follow the fixed association S(P+Q, X) = S(P, X) + S(Q, X)
with the smaller-id operand first, so the incremental fast path and the
recompute oracle agree bit-exactly and tie behavior is deterministic.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .tree import Dendrogram
from .types import SimilarityGraph


def average_linkage(graph: SimilarityGraph) -> Dendrogram:
    """Binary dendrogram over graph's points; node ids equal cluster ids."""
    n = graph.n
    if n < 2:
        raise InputError("average linkage needs at least 2 points")
    sums = graph.matrix.copy()              # cross-weight sums per slot pair
    sizes = np.ones(n, dtype=np.int64)
    cid = np.arange(n, dtype=np.int64)      # cluster id living in each slot
    active = np.ones(n, dtype=bool)
    avg = sums / np.outer(sizes, sizes)
    np.fill_diagonal(avg, -np.inf)

    merges: list[tuple[int, int]] = []
    for step in range(n - 1):
        best = avg.max()
        rows, cols = np.nonzero(avg == best)
        pair = None
        for r, c in zip(rows.tolist(), cols.tolist()):
            if r >= c:
                continue
            key = (min(cid[r], cid[c]), max(cid[r], cid[c]))
            if pair is None or key < pair[0]:
                pair = (key, r, c)
        assert pair is not None, "no active pair found"
        (a, b), r, c = pair
        keep, drop = (r, c) if cid[r] == a else (c, r)

        merges.append((int(a), int(b)))
        sums[keep, :] += sums[drop, :]
        sums[:, keep] = sums[keep, :]
        sizes[keep] += sizes[drop]
        active[drop] = False
        cid[keep] = n + step
        avg[drop, :] = -np.inf
        avg[:, drop] = -np.inf
        live = np.nonzero(active)[0]
        avg[keep, live] = sums[keep, live] / (sizes[keep] * sizes[live])
        avg[live, keep] = avg[keep, live]
        avg[keep, keep] = -np.inf

    tree = Dendrogram.from_merges(n, merges)
    return tree


def merge_sequence(tree: Dendrogram) -> list[tuple[int, int]]:
    """Recover the (min id, max id) merge sequence from a linkage tree."""
    n = tree.n_leaves
    out = []
    for nid in range(n, 2 * n - 1):
        a, b = tree.children(nid)
        out.append((min(a, b), max(a, b)))
    return out


def average_linkage_oracle(graph: SimilarityGraph) -> list[tuple[int, int]]:
    """Merge sequence by full rescan of all active pairs each step.

    Independent of the fast path: plain dicts, a recursive canonical
    cross-weight sum (decompose the newer cluster), and an explicit
    lexicographic scan implementing the shared tie rule.
    """
    n = graph.n
    if n < 2:
        raise InputError("average linkage needs at least 2 points")
    w = graph.matrix
    children: dict[int, tuple[int, int]] = {}
    sizes: dict[int, int] = {i: 1 for i in range(n)}
    memo: dict[tuple[int, int], float] = {}

    def cross(a: int, b: int) -> float:
        if a > b:
            a, b = b, a
        key = (a, b)
        if key not in memo:
            if b < n:
                memo[key] = float(w[a, b])
            else:
                p, q = children[b]
                memo[key] = cross(a, p) + cross(a, q)
        return memo[key]

    active = list(range(n))
    seq: list[tuple[int, int]] = []
    next_id = n
    while len(active) > 1:
        best_avg = None
        best_pair = None
        for i in range(len(active)):
            for j in range(i + 1, len(active)):
                a, b = active[i], active[j]
                cur = cross(a, b) / (sizes[a] * sizes[b])
                if best_avg is None or cur > best_avg:
                    best_avg, best_pair = cur, (a, b)
        assert best_pair is not None
        a, b = best_pair
        seq.append((a, b))
        children[next_id] = (a, b)
        sizes[next_id] = sizes[a] + sizes[b]
        active.remove(a)
        active.remove(b)
        active.append(next_id)
        active.sort()
        next_id += 1
    return seq
