"""Seeded random instance generators shared by the test modules."""

from __future__ import annotations

import numpy as np

from fairtree import Dendrogram, SimilarityGraph


def random_binary_tree(rng: np.random.Generator, n: int) -> Dendrogram:
    tree = Dendrogram()
    roots = [tree.add_leaf(i) for i in range(n)]
    while len(roots) > 1:
        a = roots.pop(int(rng.integers(len(roots))))
        b = roots.pop(int(rng.integers(len(roots))))
        roots.append(tree.add_internal([a, b]))
    tree.root = roots[0]
    return tree


def random_multiway_tree(rng: np.random.Generator, n: int,
                         max_arity: int = 5) -> Dendrogram:
    tree = Dendrogram()
    roots = [tree.add_leaf(i) for i in range(n)]
    while len(roots) > 1:
        take = min(len(roots), int(rng.integers(2, max_arity + 1)))
        picks = sorted(rng.choice(len(roots), size=take, replace=False).tolist(),
                       reverse=True)
        kids = [roots.pop(i) for i in picks]
        roots.append(tree.add_internal(kids))
    tree.root = roots[0]
    return tree


def left_comb_tree(n: int) -> Dendrogram:
    """Caterpillar: (((0,1),2),3)..."""
    tree = Dendrogram()
    acc = tree.add_leaf(0)
    for i in range(1, n):
        acc = tree.add_internal([acc, tree.add_leaf(i)])
    tree.root = acc
    return tree


def random_graph(rng: np.random.Generator, n: int) -> SimilarityGraph:
    w = rng.random((n, n))
    w = (w + w.T) / 2.0
    np.fill_diagonal(w, 0.0)
    return SimilarityGraph(w)


def unit_graph(n: int) -> SimilarityGraph:
    w = np.ones((n, n))
    np.fill_diagonal(w, 0.0)
    return SimilarityGraph(w)


def random_colors(rng: np.random.Generator, n: int, n_colors: int = 2,
                  minority_fraction: float | None = None) -> list[int]:
    if minority_fraction is not None:
        assert n_colors == 2
        k = max(1, round(n * minority_fraction))
        colors = [1] * k + [2] * (n - k)
        rng.shuffle(colors)
    else:
        colors = [int(c) for c in rng.integers(1, n_colors + 1, size=n)]
        for c in range(1, n_colors + 1):   # every color must occur
            if c not in colors:
                colors[c - 1] = c
    return colors


def leaf_signature(tree: Dendrogram) -> tuple:
    return (tuple(sorted(tree.leaves_under(tree.root))),
            tuple(tree.color_counts(tree.root)) if tree.n_colors else None)


def brute_lca_table(tree: Dendrogram) -> dict[tuple[int, int], int]:
    """(i, j) -> leaf count of the pair's lca, for every unordered pair."""
    points = sorted(tree.leaves_under(tree.root))
    table = {}
    for x in range(len(points)):
        for y in range(x + 1, len(points)):
            i, j = points[x], points[y]
            table[(i, j)] = tree.leaf_count(
                tree.lca_nodes(tree.leaf_node(i), tree.leaf_node(j)))
    return table
