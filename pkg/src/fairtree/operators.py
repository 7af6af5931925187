"""The two rewriting primitives (subtree delete/insert and shallow fold) and
the separation log that records which leaf pairs each rewrite touched."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .errors import PreconditionError
from .tree import Dendrogram


@dataclass(frozen=True)
class SeparationEvent:
    """One rewrite's footprint.

    kind = "move":  parts = (leaf set of the moved subtree,)
    kind = "fold":  parts = leaf sets of the folded sibling subtrees
    kind = "frame": parts = leaf sets of a recursion frame's final children
                    (empty tuple for a flattened base-case frame); frame is
                    the frame's own leaf set.
    """

    level: int
    kind: str
    parts: tuple[frozenset[int], ...]
    frame: frozenset[int] | None = None


class SeparationLog:
    """Append-only event list; pair-level views are materialized on demand."""

    def __init__(self) -> None:
        self.events: list[SeparationEvent] = []

    def append(self, event: SeparationEvent) -> None:
        self.events.append(event)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[SeparationEvent]:
        return iter(self.events)


def pair_separation_levels(log: SeparationLog) -> dict[tuple[int, int], list[int]]:
    """Recursion levels at which each leaf pair was split into different
    children (or flattened in a base case), from the frame events.

    A pair is separated at level L when its endpoints sit in the same frame at
    L but in different final children of that frame.
    """
    levels: dict[tuple[int, int], list[int]] = {}
    for ev in log:
        if ev.kind != "frame":
            continue
        assert ev.frame is not None
        part_of: dict[int, int] = {}
        for idx, part in enumerate(ev.parts):
            for point in part:
                part_of[point] = idx
        members = sorted(ev.frame)
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                i, j = members[a], members[b]
                if not ev.parts or part_of[i] != part_of[j]:
                    levels.setdefault((i, j), []).append(ev.level)
    return levels


def changed_pairs(event: SeparationEvent, before: Dendrogram,
                  after: Dendrogram) -> set[tuple[int, int]]:
    """Leaf pairs implicated by a move/fold event whose lca leaf count really
    changed between the two snapshots. Test-support materialization."""
    def lca_size(tree: Dendrogram, a: int, b: int) -> int:
        return tree.leaf_count(tree.lca_nodes(tree.leaf_node(a), tree.leaf_node(b)))

    candidates: set[tuple[int, int]] = set()
    if event.kind == "move":
        moved = event.parts[0]
        for i in moved:
            for j in range(before.n_leaves):
                if j not in moved:
                    candidates.add((min(i, j), max(i, j)))
    elif event.kind == "fold":
        for x in range(len(event.parts)):
            for y in range(x + 1, len(event.parts)):
                for i in event.parts[x]:
                    for j in event.parts[y]:
                        candidates.add((min(i, j), max(i, j)))
    else:
        raise PreconditionError(f"no pair materialization for kind {event.kind!r}")
    return {(a, b) for a, b in candidates
            if lca_size(before, a, b) != lca_size(after, a, b)}


def del_ins(tree: Dendrogram, u: int, v: int, *,
            log: SeparationLog | None = None, level: int = 0) -> Dendrogram:
    """Delete the subtree at u (contracting its sibling into their parent) and
    reinsert it as the sibling of v under a fresh parent, in place.

    v must be neither a descendant of u nor u's parent; if v is the root the
    fresh parent becomes the new root.
    """
    if u == tree.root:
        raise PreconditionError("cannot delete the root")
    parent_u = tree.parent(u)
    cur: int | None = v
    while cur is not None:
        if cur == u:
            raise PreconditionError("insertion point is a descendant of the deleted node")
        cur = tree.parent(cur)
    if v == parent_u:
        raise PreconditionError("insertion point is the deleted node's parent")
    moved = frozenset(tree.leaves_under(u)) if log is not None else None
    tree.detach_with_contraction(u)
    tree.insert_between(v, u)
    if log is not None:
        assert moved is not None
        log.append(SeparationEvent(level=level, kind="move", parts=(moved,)))
    return tree


def shallow_fold(tree: Dendrogram, roots: list[int], *,
                 log: SeparationLog | None = None, level: int = 0) -> int:
    """Replace sibling subtrees by one subtree whose root adopts all their
    children (a leaf member is adopted directly), left-comb binarized.

    Returns the id of the replacement node; the common parent's leaf count is
    unchanged.
    """
    if len(roots) < 2:
        raise PreconditionError("fold needs at least 2 subtrees")
    parents = {tree.parent(r) for r in roots}
    if len(parents) != 1 or None in parents:
        raise PreconditionError("folded subtrees must share one parent")
    if len(set(roots)) != len(roots):
        raise PreconditionError("folded subtrees must be distinct")
    p = parents.pop()
    assert p is not None
    if log is not None:
        log.append(SeparationEvent(
            level=level, kind="fold",
            parts=tuple(frozenset(tree.leaves_under(r)) for r in roots)))

    hoisted: list[int] = []
    for r in roots:
        if tree.is_leaf(r):
            hoisted.append(r)
        else:
            hoisted.extend(tree.children(r))

    node_p = tree._node(p)
    position = node_p.children.index(roots[0])
    for r in roots:
        node_p.children.remove(r)
        tree._node(r).parent = None
        if not tree.is_leaf(r):
            tree._kill(r)
    for h in hoisted:
        tree._node(h).parent = None

    folded = tree.add_internal(hoisted)
    node_p.children.insert(position, folded)
    tree._node(folded).parent = p
    tree.binarize_node(folded)
    return folded
