"""Tree cost: every point pair contributes weight * size of the smallest
cluster containing both (the pair's lca cluster)."""

from __future__ import annotations

import numpy as np

from .errors import ShapeError
from .tree import Dendrogram, lca
from .types import SimilarityGraph


def _check_bijection(tree: Dendrogram, graph: SimilarityGraph) -> None:
    if tree.n_leaves != graph.n:
        raise ShapeError(f"tree has {tree.n_leaves} leaves, graph has {graph.n}")
    for point in range(graph.n):
        tree.leaf_node(point)


def edge_cost(tree: Dendrogram, graph: SimilarityGraph, i: int, j: int) -> float:
    """w(i, j) times the leaf count of the pair's lowest common ancestor."""
    return graph.weight(i, j) * tree.leaf_count(lca(tree, i, j))


def total_cost(tree: Dendrogram, graph: SimilarityGraph) -> float:
    """Sum of edge_cost over all unordered pairs, aggregated per node.

    Pairs whose lca is v contribute leaf_count(v) times the total weight
    crossing between distinct children of v; every pair is counted exactly
    once, so the whole computation touches each weight entry once.
    """
    _check_bijection(tree, graph)
    w = graph.matrix
    total = 0.0
    # post-order accumulation of per-node leaf index arrays
    leaf_idx: dict[int, np.ndarray] = {}
    for nid in tree._postorder():
        if tree.is_leaf(nid):
            leaf_idx[nid] = np.array([tree.point_of(nid)], dtype=np.intp)
            continue
        kids = tree.children(nid)
        arrays = [leaf_idx.pop(c) for c in kids]
        cross = 0.0
        for a in range(len(arrays)):
            for b in range(a + 1, len(arrays)):
                cross += float(w[np.ix_(arrays[a], arrays[b])].sum())
        total += tree.leaf_count(nid) * cross
        leaf_idx[nid] = np.concatenate(arrays)
    return total


def total_cost_pairwise(tree: Dendrogram, graph: SimilarityGraph) -> float:
    """Brute-force oracle: explicit lca lookup per unordered pair. O(n^2 * depth)."""
    _check_bijection(tree, graph)
    total = 0.0
    for i in range(graph.n):
        for j in range(i + 1, graph.n):
            total += edge_cost(tree, graph, i, j)
    return total
