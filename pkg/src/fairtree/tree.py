"""Mutable dendrogram over an id-stable node arena, plus the balance and
fairness predicates every rewriting step is checked against.

Mutation is single-owner: one writer at a time, no concurrent readers while
mutating. Read-only queries are safe from many threads on an unchanging tree.
"""

from __future__ import annotations

import json
from typing import Iterable, Iterator, Sequence

from .errors import (
    InvalidNodeError,
    InvalidPairError,
    PreconditionError,
    TreeInvariantError,
)
from .types import FairnessSpec

# Slack applied to balance comparisons so that a predicate evaluated after the
# fact agrees with the same predicate used as a loop condition (spec'd 1e-9
# relative tolerance on equality checks).
REL_TOL = 1e-9


class _Node:
    __slots__ = ("id", "parent", "children", "leaf", "leaf_count",
                 "color_counts", "alive", "dummy")

    def __init__(self, node_id: int):
        self.id = node_id
        self.parent: int | None = None
        self.children: list[int] = []
        self.leaf: int | None = None        # point id for leaves
        self.leaf_count: int = 0
        self.color_counts: list[int] | None = None
        self.alive = True
        self.dummy = False


class Dendrogram:
    """Rooted tree whose leaves biject with dataset points.

    Node ids are stable across edits: removed nodes are tombstoned, ids are
    never reused within a tree's lifetime.
    """

    def __init__(self) -> None:
        self._nodes: list[_Node | None] = []
        self.root: int = -1
        self.n_colors: int | None = None
        self._leaf_node: dict[int, int] = {}   # point id -> node id

    # ------------------------------------------------------------------
    # construction

    def _alloc(self) -> _Node:
        node = _Node(len(self._nodes))
        self._nodes.append(node)
        return node

    def add_leaf(self, point: int) -> int:
        if point in self._leaf_node:
            raise PreconditionError(f"point {point} already has a leaf")
        node = self._alloc()
        node.leaf = point
        node.leaf_count = 1
        self._leaf_node[point] = node.id
        if self.n_colors is not None:
            node.color_counts = [0] * self.n_colors
        return node.id

    def add_internal(self, children: Sequence[int]) -> int:
        node = self._alloc()
        for c in children:
            child = self._node(c)
            if child.parent is not None:
                raise PreconditionError(f"node {c} already has a parent")
            child.parent = node.id
            node.children.append(c)
            node.leaf_count += child.leaf_count
        if self.n_colors is not None:
            node.color_counts = self._sum_child_colors(node)
        return node.id

    def add_dummy(self) -> int:
        node = self._alloc()
        node.dummy = True
        if self.n_colors is not None:
            node.color_counts = [0] * self.n_colors
        return node.id

    @classmethod
    def from_merges(cls, n: int, merges: Iterable[tuple[int, int]]) -> "Dendrogram":
        """Build a tree from leaves 0..n-1 and a sequence of node-id merges."""
        tree = cls()
        for point in range(n):
            tree.add_leaf(point)
        last = n - 1
        for a, b in merges:
            last = tree.add_internal([a, b])
        tree.root = last
        return tree

    def _sum_child_colors(self, node: _Node) -> list[int]:
        assert self.n_colors is not None
        total = [0] * self.n_colors
        for c in node.children:
            cc = self._node(c).color_counts
            assert cc is not None
            for i, v in enumerate(cc):
                total[i] += v
        return total

    # ------------------------------------------------------------------
    # accessors

    def _node(self, node_id: int) -> _Node:
        if not (0 <= node_id < len(self._nodes)):
            raise InvalidNodeError(f"no node {node_id}")
        node = self._nodes[node_id]
        if node is None or not node.alive:
            raise InvalidNodeError(f"node {node_id} is dead")
        return node

    def has_node(self, node_id: int) -> bool:
        return (0 <= node_id < len(self._nodes)
                and self._nodes[node_id] is not None
                and self._nodes[node_id].alive)

    def parent(self, node_id: int) -> int | None:
        return self._node(node_id).parent

    def children(self, node_id: int) -> list[int]:
        return list(self._node(node_id).children)

    def is_leaf(self, node_id: int) -> bool:
        return self._node(node_id).leaf is not None

    def is_dummy(self, node_id: int) -> bool:
        return self._node(node_id).dummy

    def point_of(self, node_id: int) -> int:
        node = self._node(node_id)
        if node.leaf is None:
            raise InvalidNodeError(f"node {node_id} is not a leaf")
        return node.leaf

    def leaf_node(self, point: int) -> int:
        try:
            return self._leaf_node[point]
        except KeyError:
            raise InvalidNodeError(f"no leaf for point {point}") from None

    def leaf_count(self, node_id: int) -> int:
        return self._node(node_id).leaf_count

    @property
    def n_leaves(self) -> int:
        return len(self._leaf_node)

    def nodes(self) -> Iterator[int]:
        """Ids of all live nodes, ascending."""
        for node in self._nodes:
            if node is not None and node.alive:
                yield node.id

    def internal_nodes(self) -> Iterator[int]:
        for node_id in self.nodes():
            node = self._node(node_id)
            if node.leaf is None and not node.dummy:
                yield node_id

    def leaves_under(self, node_id: int) -> list[int]:
        """Point ids below node_id, in DFS child order (iterative)."""
        out: list[int] = []
        stack = [node_id]
        while stack:
            node = self._node(stack.pop())
            if node.leaf is not None:
                out.append(node.leaf)
            else:
                stack.extend(reversed(node.children))
        return out

    def subtree_nodes(self, node_id: int) -> list[int]:
        out: list[int] = []
        stack = [node_id]
        while stack:
            nid = stack.pop()
            out.append(nid)
            stack.extend(reversed(self._node(nid).children))
        return out

    def depth(self, node_id: int) -> int:
        d = 0
        cur = self._node(node_id).parent
        while cur is not None:
            d += 1
            cur = self._node(cur).parent
        return d

    def height(self) -> int:
        """Edge count of the longest root-to-leaf path."""
        best = 0
        stack = [(self.root, 0)]
        while stack:
            nid, d = stack.pop()
            node = self._node(nid)
            if not node.children:
                best = max(best, d)
            for c in node.children:
                stack.append((c, d + 1))
        return best

    def lca_nodes(self, a: int, b: int) -> int:
        """Lowest common ancestor of two node ids."""
        da, db = self.depth(a), self.depth(b)
        while da > db:
            a = self._node(a).parent  # type: ignore[assignment]
            da -= 1
        while db > da:
            b = self._node(b).parent  # type: ignore[assignment]
            db -= 1
        while a != b:
            a = self._node(a).parent  # type: ignore[assignment]
            b = self._node(b).parent  # type: ignore[assignment]
        return a

    # ------------------------------------------------------------------
    # colors

    def attach_colors(self, colors: Sequence[int], n_colors: int) -> None:
        """Install per-node color-count caches; colors are 1-based per point."""
        self.n_colors = n_colors
        order = self._postorder()
        for nid in order:
            node = self._node(nid)
            if node.leaf is not None:
                counts = [0] * n_colors
                counts[colors[node.leaf] - 1] += 1
                node.color_counts = counts
            elif node.dummy:
                node.color_counts = [0] * n_colors
            else:
                node.color_counts = self._sum_child_colors(node)

    def color_counts(self, node_id: int) -> list[int]:
        cc = self._node(node_id).color_counts
        if cc is None:
            raise PreconditionError("colors not attached to this tree")
        return list(cc)

    def _postorder(self) -> list[int]:
        order: list[int] = []
        stack: list[tuple[int, bool]] = [(self.root, False)]
        while stack:
            nid, expanded = stack.pop()
            if expanded:
                order.append(nid)
            else:
                stack.append((nid, True))
                for c in self._node(nid).children:
                    stack.append((c, False))
        return order

    # ------------------------------------------------------------------
    # structural mutation (single-owner)

    def _propagate(self, start: int | None, d_leaves: int,
                   d_colors: Sequence[int] | None) -> None:
        cur = start
        while cur is not None:
            node = self._node(cur)
            node.leaf_count += d_leaves
            if d_colors is not None and node.color_counts is not None:
                for i, v in enumerate(d_colors):
                    node.color_counts[i] += v
            cur = node.parent

    def _kill(self, node_id: int) -> None:
        node = self._node(node_id)
        node.alive = False
        node.parent = None
        node.children = []

    def detach_with_contraction(self, u: int) -> None:
        """Remove the subtree at u; contract u's sibling into their parent.

        u must not be the root and u's parent must be binary. Afterwards u is a
        floating subtree (parent None) awaiting reinsertion.
        """
        node_u = self._node(u)
        p = node_u.parent
        if p is None:
            raise PreconditionError("cannot delete the root")
        node_p = self._node(p)
        if len(node_p.children) != 2:
            raise PreconditionError("deleted node's parent must be binary")
        s = node_p.children[0] if node_p.children[1] == u else node_p.children[1]
        node_s = self._node(s)
        g = node_p.parent
        if g is None:
            # p was the root; the sibling becomes the new root
            self.root = s
            node_s.parent = None
        else:
            node_g = self._node(g)
            node_g.children[node_g.children.index(p)] = s
            node_s.parent = g
        self._kill(p)
        node_u.parent = None
        self._propagate(g, -node_u.leaf_count,
                        [-c for c in node_u.color_counts] if node_u.color_counts else None)

    def insert_between(self, v: int, u: int) -> int:
        """Splice a new parent p between v and v's parent; p's children are [v, u].

        If v is the root, p becomes the new root. Returns p's id.
        """
        node_v = self._node(v)
        node_u = self._node(u)
        if node_u.parent is not None:
            raise PreconditionError("inserted subtree must be detached")
        g = node_v.parent
        p = self._alloc()
        p.children = [v, u]
        p.leaf_count = node_v.leaf_count + node_u.leaf_count
        if self.n_colors is not None:
            p.color_counts = self._sum_child_colors(p)
        node_v.parent = p.id
        node_u.parent = p.id
        if g is None:
            self.root = p.id
        else:
            node_g = self._node(g)
            node_g.children[node_g.children.index(v)] = p.id
            p.parent = g
        self._propagate(g, node_u.leaf_count, node_u.color_counts)
        return p.id

    def replace_child(self, old: int, new: int) -> None:
        """Swap a (dummy) child for a detached subtree in place."""
        node_old = self._node(old)
        node_new = self._node(new)
        if node_new.parent is not None:
            raise PreconditionError("replacement subtree must be detached")
        p = node_old.parent
        if p is None:
            raise PreconditionError("cannot replace the root")
        node_p = self._node(p)
        node_p.children[node_p.children.index(old)] = new
        node_new.parent = p
        d_leaves = node_new.leaf_count - node_old.leaf_count
        d_colors = None
        if node_new.color_counts is not None and node_old.color_counts is not None:
            d_colors = [a - b for a, b in
                        zip(node_new.color_counts, node_old.color_counts)]
        self._kill(old)
        self._propagate(p, d_leaves, d_colors)

    def binarize_node(self, node_id: int) -> None:
        """Left-comb a multiway node in existing child order, in place."""
        node = self._node(node_id)
        while len(node.children) > 2:
            acc = node.children[0]
            for c in node.children[1:-1]:
                node_acc = self._node(acc)
                node_c = self._node(c)
                m = self._alloc()
                m.children = [acc, c]
                m.leaf_count = node_acc.leaf_count + node_c.leaf_count
                if self.n_colors is not None:
                    m.color_counts = self._sum_child_colors(m)
                node_acc.parent = m.id
                node_c.parent = m.id
                acc = m.id
            last = node.children[-1]
            node.children = [acc, last]
            self._node(acc).parent = node_id
            self._node(last).parent = node_id

    def make_trivial(self, node_id: int) -> None:
        """Rebuild the subtree at node_id as a root with all leaves as direct
        children (ascending point id). No-op on leaves."""
        node = self._node(node_id)
        if node.leaf is not None:
            return
        points = sorted(self.leaves_under(node_id))
        for nid in self.subtree_nodes(node_id):
            if nid != node_id and not self.is_leaf(nid):
                self._kill(nid)
        node.children = []
        for point in points:
            leaf_id = self._leaf_node[point]
            self._node(leaf_id).parent = node_id
            node.children.append(leaf_id)
        # leaf_count / color_counts at node_id and above are unchanged

    # ------------------------------------------------------------------
    # copying / serialization

    def copy(self) -> "Dendrogram":
        other = Dendrogram()
        other.root = self.root
        other.n_colors = self.n_colors
        other._leaf_node = dict(self._leaf_node)
        for node in self._nodes:
            if node is None:
                other._nodes.append(None)
                continue
            clone = _Node(node.id)
            clone.parent = node.parent
            clone.children = list(node.children)
            clone.leaf = node.leaf
            clone.leaf_count = node.leaf_count
            clone.color_counts = (list(node.color_counts)
                                  if node.color_counts is not None else None)
            clone.alive = node.alive
            clone.dummy = node.dummy
            other._nodes.append(clone)
        return other

    def to_json(self) -> str:
        nodes = []
        for nid in self.nodes():
            node = self._node(nid)
            if node.dummy:
                raise PreconditionError("cannot serialize a tree with dummy nodes")
            entry: dict = {"id": nid, "children": list(node.children)}
            if node.leaf is not None:
                entry["leaf"] = node.leaf
            nodes.append(entry)
        return json.dumps({"nodes": nodes, "root": self.root},
                          separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "Dendrogram":
        data = json.loads(text)
        tree = cls()
        max_id = max(entry["id"] for entry in data["nodes"])
        tree._nodes = [None] * (max_id + 1)
        for entry in data["nodes"]:
            node = _Node(entry["id"])
            node.children = list(entry["children"])
            if "leaf" in entry:
                node.leaf = entry["leaf"]
                tree._leaf_node[node.leaf] = node.id
            tree._nodes[node.id] = node
        tree.root = data["root"]
        for node in tree._nodes:
            if node is None:
                continue
            for c in node.children:
                tree._node(c).parent = node.id
        # rebuild cached counts bottom-up
        for nid in tree._postorder():
            node = tree._node(nid)
            if node.leaf is not None:
                node.leaf_count = 1
            else:
                node.leaf_count = sum(tree._node(c).leaf_count
                                      for c in node.children)
        tree.validate()
        return tree

    # ------------------------------------------------------------------
    # validation

    def validate(self, allow_dummies: bool = False) -> None:
        """Check every structural invariant; raise TreeInvariantError on failure."""
        if not self.has_node(self.root):
            raise TreeInvariantError("missing root")
        if self._node(self.root).parent is not None:
            raise TreeInvariantError("root has a parent")
        seen: set[int] = set()
        points: list[int] = []
        stack = [self.root]
        while stack:
            nid = stack.pop()
            if nid in seen:
                raise TreeInvariantError(f"node {nid} reached twice (cycle?)")
            seen.add(nid)
            node = self._node(nid)
            for c in node.children:
                if self._node(c).parent != nid:
                    raise TreeInvariantError(f"parent link broken at {c}")
                stack.append(c)
            if node.dummy:
                if not allow_dummies:
                    raise TreeInvariantError(f"dummy node {nid} outside split")
                if node.children or node.leaf_count != 0:
                    raise TreeInvariantError(f"dummy node {nid} not empty")
            elif node.leaf is not None:
                if node.children:
                    raise TreeInvariantError(f"leaf {nid} has children")
                if node.leaf_count != 1:
                    raise TreeInvariantError(f"leaf {nid} has leaf_count != 1")
                points.append(node.leaf)
            else:
                min_children = 1 if allow_dummies else 2
                if len(node.children) < min_children:
                    raise TreeInvariantError(f"internal node {nid} has "
                                             f"{len(node.children)} children")
                want = sum(self._node(c).leaf_count for c in node.children)
                if node.leaf_count != want:
                    raise TreeInvariantError(f"stale leaf_count at {nid}")
                if node.color_counts is not None:
                    if node.color_counts != self._sum_child_colors(node):
                        raise TreeInvariantError(f"stale color_counts at {nid}")
        for node in self._nodes:
            if node is not None and node.alive and node.id not in seen:
                raise TreeInvariantError(f"live node {node.id} unreachable")
        if sorted(points) != sorted(self._leaf_node):
            raise TreeInvariantError("leaf/point bijection broken")


# ----------------------------------------------------------------------
# spec-level queries


def leaf_count(tree: Dendrogram, v: int) -> int:
    """Number of leaf descendants of v (cached)."""
    return tree.leaf_count(v)


def lca(tree: Dendrogram, u: int, v: int) -> int:
    """Node id of the lowest common ancestor of two distinct leaf points."""
    if u == v:
        raise InvalidPairError("lca of a leaf with itself")
    return tree.lca_nodes(tree.leaf_node(u), tree.leaf_node(v))


def binarize(tree: Dendrogram) -> Dendrogram:
    """Copy of the tree with every multiway node left-combed in child order.

    Never increases the tree's cost: any pair's lca cluster can only shrink.
    """
    out = tree.copy()
    for nid in list(out.internal_nodes()):
        out.binarize_node(nid)
    return out


def cluster_balance(tree: Dendrogram, v: int, color: int) -> float:
    """Fraction of leaves under v carrying the given (1-based) color."""
    counts = tree.color_counts(v)
    size = tree.leaf_count(v)
    if size < 1:
        return 0.0
    return counts[color - 1] / size


def is_relatively_balanced(tree: Dendrogram, v: int, eps: float) -> bool:
    """True iff every child of v holds within (1/c +- eps) of v's leaves."""
    node_children = tree.children(v)
    if not node_children:
        raise InvalidNodeError(f"node {v} is a leaf")
    size = tree.leaf_count(v)
    c = len(node_children)
    slack = REL_TOL * size
    lo = (1.0 / c - eps) * size - slack
    hi = (1.0 / c + eps) * size + slack
    return all(lo <= tree.leaf_count(ch) <= hi for ch in node_children)


def is_fair(tree: Dendrogram, spec: FairnessSpec,
            trivial_exempt: set[int] | None = None
            ) -> tuple[bool, list[tuple[int, str]]]:
    """Check every non-singleton cluster against the per-color bounds and the
    leaf-children rule (a node with any leaf child has only leaf children).

    Returns (ok, violations); nodes listed in trivial_exempt have their bound
    violations reported with a 'trivial:' prefix and do not flip ok.
    """
    violations: list[tuple[int, str]] = []
    ok = True
    exempt = trivial_exempt or set()
    for nid in tree.internal_nodes():
        size = tree.leaf_count(nid)
        counts = tree.color_counts(nid)
        slack = REL_TOL * size
        for color in range(1, spec.n_colors + 1):
            cnt = counts[color - 1]
            hit = None
            if cnt < spec.lower[color - 1] * size - slack:
                hit = f"lower:{color}"
            elif cnt > spec.upper[color - 1] * size + slack:
                hit = f"upper:{color}"
            if hit is not None:
                if nid in exempt:
                    violations.append((nid, "trivial:" + hit))
                else:
                    violations.append((nid, hit))
                    ok = False
        kids = tree.children(nid)
        leaf_kids = sum(1 for c in kids if tree.is_leaf(c))
        if 0 < leaf_kids < len(kids):
            violations.append((nid, "mixed-leaf-children"))
            ok = False
    return ok, violations
