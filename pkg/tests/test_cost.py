import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fairtree import (
    Dendrogram,
    ShapeError,
    SimilarityGraph,
    binarize,
    edge_cost,
    total_cost,
    total_cost_pairwise,
)
from helpers import random_binary_tree, random_graph, random_multiway_tree, unit_graph


def pair_tree() -> Dendrogram:
    t = Dendrogram()
    t.root = t.add_internal([t.add_leaf(0), t.add_leaf(1)])
    return t


def test_edge_cost_two_leaves():
    t = pair_tree()
    g = SimilarityGraph(np.array([[0.0, 0.5], [0.5, 0.0]]))
    assert edge_cost(t, g, 0, 1) == pytest.approx(1.0)   # 0.5 * 2


def test_edge_cost_zero_weight():
    t = pair_tree()
    g = SimilarityGraph(np.zeros((2, 2)))
    assert edge_cost(t, g, 0, 1) == 0.0


def test_edge_cost_balanced_cross_pair():
    t = Dendrogram()
    ab = t.add_internal([t.add_leaf(0), t.add_leaf(1)])
    cd = t.add_internal([t.add_leaf(2), t.add_leaf(3)])
    t.root = t.add_internal([ab, cd])
    g = unit_graph(4)
    assert edge_cost(t, g, 0, 2) == pytest.approx(4.0)


def test_total_cost_two_points():
    t = pair_tree()
    g = SimilarityGraph(np.array([[0.0, 0.5], [0.5, 0.0]]))
    assert total_cost(t, g) == pytest.approx(1.0)


def test_total_cost_four_point_hand_enumeration():
    # ((a,b),(c,d)) on complete unit weights: 2 + 2 + 4*4 = 20
    t = Dendrogram()
    ab = t.add_internal([t.add_leaf(0), t.add_leaf(1)])
    cd = t.add_internal([t.add_leaf(2), t.add_leaf(3)])
    t.root = t.add_internal([ab, cd])
    g = unit_graph(4)
    assert total_cost(t, g) == pytest.approx(20.0)
    assert total_cost_pairwise(t, g) == pytest.approx(20.0)


def test_total_cost_shape_mismatch():
    t = pair_tree()
    with pytest.raises(ShapeError):
        total_cost(t, unit_graph(3))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 64))
def test_aggregated_equals_pairwise(seed, n):
    rng = np.random.default_rng(seed)
    t = random_binary_tree(rng, n)
    g = random_graph(rng, n)
    fast = total_cost(t, g)
    slow = total_cost_pairwise(t, g)
    assert fast == pytest.approx(slow, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 32))
def test_binarize_never_increases_cost(seed, n):
    rng = np.random.default_rng(seed)
    t = random_multiway_tree(rng, n)
    g = random_graph(rng, n)
    assert total_cost(binarize(t), g) <= total_cost(t, g) + 1e-12
