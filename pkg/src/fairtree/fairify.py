"""Rebalance-and-fold rewriting: split_root makes a subtree's root an
eps-relatively-balanced multiway split by repeatedly moving subtrees from its
largest child to its smallest; make_fair applies that top-down, interleaving
per-color shallow folds, to turn any binary hierarchy into a fair one.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .errors import (
    InputError,
    InternalInvariantError,
    ParameterError,
    PreconditionError,
    ShapeError,
    TooSmallError,
)
from .operators import SeparationEvent, SeparationLog, shallow_fold
from .tree import REL_TOL, Dendrogram, cluster_balance, is_relatively_balanced
from .types import FairParams, SimilarityGraph


@dataclass
class MoveRecord:
    """One subtree relocation inside split_root."""

    size: int               # leaves moved
    cap: float              # allowed maximum at move time (min deviation)
    while_unbalanced: bool  # root failed the balance predicate at move time
    excess_before: float
    excess_after: float


@dataclass
class SplitTrace:
    n: int
    arity: int
    eps: float
    iterations: int = 0
    moves: list[MoveRecord] = field(default_factory=list)


@dataclass
class FrameTrace:
    """Everything one recursion frame did, for auditing."""

    node: int
    level: int
    size: int
    proportions: list[float]
    base_case: bool
    too_small: bool = False
    eps_split: float | None = None
    split: SplitTrace | None = None
    folded_colors: list[int] = field(default_factory=list)
    child_sizes: list[int] = field(default_factory=list)
    child_balances: list[list[float]] = field(default_factory=list)  # per child, per color
    balanced_after: bool | None = None


@dataclass
class FairTrace:
    frames: list[FrameTrace] = field(default_factory=list)
    base_nodes: set[int] = field(default_factory=set)

    @property
    def depth(self) -> int:
        return max((f.level for f in self.frames), default=0)


def select_movable_subtree(tree: Dendrogram, start: int, cap: float) -> int:
    """Descend from start through heavier children (first child on ties) and
    return the first node whose leaf count is at most cap.

    The descent halts at a leaf in the worst case, so it always returns; when
    the returned node's parent exceeds cap the result has more than cap/2
    leaves (it is the heavier of two children summing past cap).
    """
    cur = start
    while tree.leaf_count(cur) > cap:
        kids = tree.children(cur)
        if not kids:
            break
        cur = max(kids, key=tree.leaf_count)  # max() keeps the first maximum
    return cur


def find_insertion_point(tree: Dendrogram, target: int, incoming: int) -> int:
    """Where to attach an incoming subtree of `incoming` leaves below target.

    A dummy target is returned as-is (the subtree will replace it). Otherwise
    descend through heavier children until the lighter child of the current
    node is smaller than the incoming subtree, and return that lighter child;
    reaching a leaf means inserting beside the leaf.
    """
    if tree.is_dummy(target):
        return target
    cur = target
    while True:
        kids = tree.children(cur)
        if not kids:
            return cur
        a, b = kids
        heavy, light = (a, b) if tree.leaf_count(a) >= tree.leaf_count(b) else (b, a)
        if tree.leaf_count(light) < incoming:
            return light
        cur = heavy


def _check_binary_below(tree: Dendrogram, root: int) -> None:
    for child in tree.children(root):
        if tree.is_dummy(child):
            continue
        for nid in tree.subtree_nodes(child):
            kids = tree.children(nid)
            if kids and len(kids) != 2:
                raise PreconditionError(
                    f"subtree below the split root must be binary (node {nid} "
                    f"has {len(kids)} children)")


def split_root(tree: Dendrogram, arity: int, eps: float, *, root: int | None = None,
               log: SeparationLog | None = None, level: int = 0) -> Dendrogram:
    """Give the (sub)tree root exactly `arity` children, eps-relatively
    balanced, by repeated subtree deletion/insertion. In place.

    Raises TooSmallError when integer granularity makes balancing impossible;
    the caller is expected to fall back to a trivial topology.
    """
    _split_root_traced(tree, root if root is not None else tree.root,
                       arity, eps, log=log, level=level)
    return tree


def _split_root_traced(tree: Dendrogram, root: int, arity: int, eps: float, *,
                       log: SeparationLog | None = None,
                       level: int = 0) -> SplitTrace:
    if arity < 2:
        raise ParameterError("split arity must be >= 2")
    n = tree.leaf_count(root)
    trace = SplitTrace(n=n, arity=arity, eps=eps)
    if n < arity:
        raise TooSmallError(f"{n} leaves cannot fill {arity} children")
    kids = tree.children(root)
    if len(kids) > arity:
        raise PreconditionError(f"root already has {len(kids)} > {arity} children")
    _check_binary_below(tree, root)

    root_node = tree._node(root)
    while len(root_node.children) < arity:
        d = tree.add_dummy()
        tree._node(d).parent = root
        root_node.children.append(d)

    target = n / arity
    slack = REL_TOL * n
    max_iterations = math.ceil(2 * (arity - 1) / eps) + arity

    while True:
        kids = tree.children(root)
        sizes = [tree.leaf_count(c) for c in kids]
        balanced = all(target - eps * n - slack <= s <= target + eps * n + slack
                       for s in sizes)
        if balanced and not any(tree.is_dummy(c) for c in kids):
            break
        if trace.iterations >= max_iterations:
            raise InternalInvariantError(
                f"split at node {root} exceeded {max_iterations} iterations")

        i_max = max(range(len(kids)), key=lambda i: sizes[i])
        i_min = min(range(len(kids)), key=lambda i: sizes[i])
        heavy, light = kids[i_max], kids[i_min]
        cap = min(target - sizes[i_min], sizes[i_max] - target)
        if cap < 1.0 or tree.is_leaf(heavy):
            raise TooSmallError(
                f"cannot rebalance node {root} at integer granularity "
                f"(movable budget {cap:.3f} leaves)")

        moved = select_movable_subtree(tree, heavy, cap)
        moved_size = tree.leaf_count(moved)
        excess_before = sum(max(0.0, s - target) for s in sizes)
        moved_leaves = (frozenset(tree.leaves_under(moved))
                        if log is not None else None)
        tree.detach_with_contraction(moved)
        if tree.is_dummy(light):
            tree.replace_child(light, moved)
        else:
            spot = find_insertion_point(tree, light, moved_size)
            tree.insert_between(spot, moved)
        if log is not None:
            assert moved_leaves is not None
            log.append(SeparationEvent(level=level, kind="move",
                                       parts=(moved_leaves,)))
        excess_after = sum(max(0.0, tree.leaf_count(c) - target)
                           for c in tree.children(root))
        trace.moves.append(MoveRecord(moved_size, cap, not balanced,
                                      excess_before, excess_after))
        trace.iterations += 1

    assert len(tree.children(root)) == arity
    assert not any(tree.is_dummy(c) for c in tree.children(root))
    return trace


def fold_passes(arity: int, fold_width: int, n_colors: int) -> list[int]:
    """Colors (1-based, ascending) whose fold pass will actually run.

    A pass folds the current children k-wise, shrinking their count from c to
    ceil(c/k); a pass that would leave fewer than 2 children (c <= k) is
    skipped, otherwise the recursion could stop shrinking.
    """
    c = arity
    passes = []
    for color in range(1, n_colors + 1):
        if c > fold_width:
            passes.append(color)
            c = math.ceil(c / fold_width)
    return passes


def fold_by_color(tree: Dendrogram, children: Sequence[int], color: int,
                  fold_width: int, *, log: SeparationLog | None = None,
                  level: int = 0) -> list[int]:
    """Sort siblings by their fraction of `color`, split the order into
    fold_width contiguous chunks, and fold the i-th member of every chunk
    together. Returns the surviving nodes (one per fold group).
    """
    if len(children) < fold_width:
        raise ParameterError(
            f"cannot fold {len(children)} children {fold_width}-wise")
    ordered = sorted(children,
                     key=lambda c: (cluster_balance(tree, c, color), c))
    q, r = divmod(len(ordered), fold_width)
    chunks = []
    pos = 0
    for i in range(fold_width):
        width = q + 1 if i < r else q
        chunks.append(ordered[pos:pos + width])
        pos += width
    out: list[int] = []
    for i in range(len(chunks[0])):
        group = [chunk[i] for chunk in chunks if i < len(chunk)]
        if len(group) >= 2:
            out.append(shallow_fold(tree, group, log=log, level=level))
        else:
            out.append(group[0])
    return out


def make_fair(tree: Dendrogram, graph: SimilarityGraph, colors: Sequence[int],
              params: FairParams, *, log: SeparationLog | None = None,
              trace: FairTrace | None = None, strict: bool = True) -> Dendrogram:
    """Rewrite a binary hierarchy into a fair, relatively balanced one.

    Top-down over recursion frames: frames below max(2*arity, ceil(1/eps))
    leaves are flattened to a trivial topology (root with all leaves as direct
    children); larger frames are split `arity`-wise with tightened slack
    eps / fold_width**p (p = number of fold passes, so the folded children
    still meet the eps balance bound), folded once per color in ascending
    color order, and recursed into. The input tree is left untouched; the
    rewritten copy is returned, preserving the leaf set exactly.
    """
    if tree.n_leaves == 0:
        raise InputError("empty input")
    if tree.n_leaves != graph.n or len(colors) != graph.n:
        raise ShapeError("tree leaves, graph vertices and colors must agree")
    n_colors = max(colors)
    params.check_colors(n_colors)

    out = tree.copy()
    out.attach_colors(colors, n_colors)
    before_counts = out.color_counts(out.root)
    before_leaves = sorted(out.leaves_under(out.root))

    passes = fold_passes(params.arity, params.fold_width, n_colors)
    eps_split = params.eps / params.fold_width ** len(passes)
    threshold = max(2 * params.arity, math.ceil(1.0 / params.eps))

    frames: deque[tuple[int, int]] = deque([(out.root, 0)])
    while frames:
        node, level = frames.popleft()
        if out.is_leaf(node):
            continue
        size = out.leaf_count(node)
        counts = out.color_counts(node)
        props = [c / size for c in counts]
        frame_leaves = frozenset(out.leaves_under(node)) if log is not None else None
        record = FrameTrace(node=node, level=level, size=size,
                            proportions=props, base_case=False)

        split_trace: SplitTrace | None = None
        if size >= threshold:
            try:
                split_trace = _split_root_traced(out, node, params.arity,
                                                 eps_split, log=log, level=level)
            except TooSmallError:
                record.too_small = True

        if split_trace is None:
            record.base_case = True
            out.make_trivial(node)
            if log is not None:
                assert frame_leaves is not None
                log.append(SeparationEvent(level=level, kind="frame",
                                           parts=(), frame=frame_leaves))
        else:
            record.eps_split = eps_split
            record.split = split_trace
            for color in passes:
                kids = out.children(node)
                assert len(kids) > params.fold_width
                fold_by_color(out, kids, color, params.fold_width,
                              log=log, level=level)
                record.folded_colors.append(color)
            kids = out.children(node)
            record.child_sizes = [out.leaf_count(c) for c in kids]
            record.child_balances = [
                [cluster_balance(out, c, col) for col in range(1, n_colors + 1)]
                for c in kids]
            record.balanced_after = is_relatively_balanced(out, node, params.eps)
            if log is not None:
                assert frame_leaves is not None
                log.append(SeparationEvent(
                    level=level, kind="frame",
                    parts=tuple(frozenset(out.leaves_under(c)) for c in kids),
                    frame=frame_leaves))
            for c in kids:
                frames.append((c, level + 1))

        if strict:
            if out.leaf_count(node) != size or out.color_counts(node) != counts:
                raise InternalInvariantError(
                    f"frame at node {node} changed its leaf/color counts")
        if trace is not None:
            trace.frames.append(record)
            if record.base_case:
                trace.base_nodes.add(node)

    if strict:
        out.validate()
        if (sorted(out.leaves_under(out.root)) != before_leaves
                or out.color_counts(out.root) != before_counts):
            raise InternalInvariantError("leaf or color conservation broken")
    return out
