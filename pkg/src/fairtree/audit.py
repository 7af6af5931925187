"""Invariant auditing: relative-balance sweeps, fairness checks against an
explicit or synthesized per-color spec, conservation, per-frame fold bounds,
and the separation-level property."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fairify import FairTrace, FrameTrace
from .operators import SeparationLog, pair_separation_levels
from .tree import Dendrogram, is_fair, is_relatively_balanced
from .types import FairnessSpec, FairParams

_TOL = 1e-9


def fold_bound_factors(p: float, eps: float, arity: int,
                       fold_width: int) -> tuple[float, float]:
    """Multiplicative window a single split+fold level keeps a color's
    proportion within, given the color's incoming proportion p. The lower
    factor clamps at 0 (vacuous) when the fold cannot guarantee presence."""
    if p <= 0.0:
        return 0.0, 0.0
    lo = (1 - eps) / (1 + eps) ** 2 * (1 - fold_width * (1 + eps) / (p * arity))
    hi = (1 + eps) / (1 - eps) ** 2 * (1 + (1 - eps) / (p * fold_width))
    return max(lo, 0.0), hi


def synthesize_fairness_spec(dataset_fractions: list[float], params: FairParams,
                             depth: int) -> FairnessSpec:
    """Concrete per-color bounds: the dataset proportion drifted by the
    per-level fold window compounded over the measured recursion depth."""
    lower = []
    upper = []
    exponent = max(depth, 1)
    for p in dataset_fractions:
        lo_f, hi_f = fold_bound_factors(p, params.eps, params.arity,
                                        params.fold_width)
        lower.append(max(0.0, p * lo_f ** exponent))
        upper.append(min(1.0, p * hi_f ** exponent) if p > 0 else 0.0)
    return FairnessSpec(lower=tuple(lower), upper=tuple(upper))


def audited_colors(frame: FrameTrace, n_colors: int) -> list[int]:
    """Colors whose fold window applies at this frame: every folded color,
    plus the complement when the data is two-colored (the single sorted fold
    bounds both sides)."""
    if not frame.folded_colors:
        return []
    if n_colors == 2:
        return [1, 2]
    return list(frame.folded_colors)


def check_frame_fold_bounds(frame: FrameTrace, params: FairParams,
                            n_colors: int) -> list[str]:
    """Per-frame fold-window violations (empty = all children in bounds)."""
    problems = []
    for color in audited_colors(frame, n_colors):
        p = frame.proportions[color - 1]
        lo_f, hi_f = fold_bound_factors(p, params.eps, params.arity,
                                        params.fold_width)
        lo, hi = p * lo_f, p * hi_f
        for child_idx, balances in enumerate(frame.child_balances):
            b = balances[color - 1]
            if b < lo - _TOL or b > hi + _TOL:
                problems.append(
                    f"frame {frame.node} child#{child_idx} color {color}: "
                    f"balance {b:.4f} outside [{lo:.4f}, {hi:.4f}]")
    return problems


def check_split_moves(frame: FrameTrace) -> list[str]:
    """Move-size bounds for the frame's split: every moved subtree is at most
    the per-move budget, and (while the root was unbalanced) larger than
    eps*n / (2*(arity-1)) - 1; iteration count within its ceiling."""
    if frame.split is None:
        return []
    tr = frame.split
    problems = []
    floor = tr.eps * tr.n / (2 * (tr.arity - 1)) - 1
    for idx, move in enumerate(tr.moves):
        if move.size > move.cap + _TOL:
            problems.append(f"frame {frame.node} move#{idx}: size {move.size} "
                            f"exceeds budget {move.cap:.3f}")
        if move.while_unbalanced and move.size <= floor:
            problems.append(f"frame {frame.node} move#{idx}: size {move.size} "
                            f"below floor {floor:.3f}")
        if move.excess_after > move.excess_before - move.size + _TOL * tr.n:
            problems.append(f"frame {frame.node} move#{idx}: excess did not "
                            f"drop by the moved size")
    bound = math.ceil(2 * (tr.arity - 1) / tr.eps) + tr.arity
    if tr.iterations > bound:
        problems.append(f"frame {frame.node}: {tr.iterations} iterations "
                        f"exceed bound {bound}")
    return problems


def trivial_topology_nodes(tree: Dendrogram) -> set[int]:
    """Internal nodes whose children are all leaves (structural detection of
    base-case clusters when no trace is available)."""
    out = set()
    for nid in tree.internal_nodes():
        if all(tree.is_leaf(c) for c in tree.children(nid)):
            out.add(nid)
    return out


def check_balance_everywhere(tree: Dendrogram, eps: float) -> list[int]:
    """Internal nodes failing the relative-balance predicate."""
    return [nid for nid in tree.internal_nodes()
            if not is_relatively_balanced(tree, nid, eps)]


def check_conservation(tree: Dendrogram, colors: list[int]) -> list[str]:
    """Leaves must biject with points 0..n-1 and root color counts must match
    the dataset's."""
    problems = []
    points = sorted(tree.leaves_under(tree.root))
    if points != list(range(len(colors))):
        problems.append("leaves do not biject with dataset rows")
        return problems
    expected = [0] * max(colors)
    for c in colors:
        expected[c - 1] += 1
    if tree.color_counts(tree.root) != expected:
        problems.append("root color counts disagree with the dataset")
    return problems


@dataclass
class AuditResult:
    ok: bool
    details: dict

    def to_dict(self) -> dict:
        return {"ok": self.ok, **self.details}


def audit_run(tree: Dendrogram, colors: list[int], params: FairParams,
              trace: FairTrace, log: SeparationLog | None,
              spec: FairnessSpec | None = None) -> AuditResult:
    """Full post-run audit of a make_fair output."""
    n_colors = max(colors)
    fractions = [c / len(colors) for c in
                 (lambda cc: [cc.count(col) for col in range(1, n_colors + 1)])(colors)]
    depth = trace.depth
    used_spec = spec or synthesize_fairness_spec(fractions, params, depth)

    unbalanced = check_balance_everywhere(tree, params.eps)
    fair_ok, fair_violations = is_fair(tree, used_spec,
                                       trivial_exempt=trace.base_nodes)
    conservation = check_conservation(tree, colors)
    fold_problems: list[str] = []
    move_problems: list[str] = []
    for frame in trace.frames:
        if not frame.base_case:
            fold_problems.extend(check_frame_fold_bounds(frame, params, n_colors))
        move_problems.extend(check_split_moves(frame))

    separation_ok = True
    max_levels = 0
    if log is not None:
        per_pair = pair_separation_levels(log)
        max_levels = max((len(v) for v in per_pair.values()), default=0)
        separation_ok = max_levels <= 1

    details = {
        "balance_ok": not unbalanced,
        "unbalanced_nodes": unbalanced,
        "fairness_ok": fair_ok,
        "fairness_violations": [f"{nid}:{what}" for nid, what in fair_violations
                                if not what.startswith("trivial:")],
        "base_case_violations": [f"{nid}:{what}" for nid, what in fair_violations
                                 if what.startswith("trivial:")],
        "conservation_ok": not conservation,
        "conservation_problems": conservation,
        "fold_bounds_ok": not fold_problems,
        "fold_bound_problems": fold_problems,
        "split_bounds_ok": not move_problems,
        "split_bound_problems": move_problems,
        "separation_ok": separation_ok,
        "max_separation_levels": max_levels,
        "measured_depth": depth,
        "spec_lower": list(used_spec.lower),
        "spec_upper": list(used_spec.upper),
    }
    ok = (not unbalanced and fair_ok and not conservation and not fold_problems
          and not move_problems and separation_ok)
    return AuditResult(ok=ok, details=details)


def audit_tree_file(tree: Dendrogram, colors: list[int], eps: float,
                    spec: FairnessSpec | None, params: FairParams | None) -> AuditResult:
    """Audit a deserialized tree without a trace: structural base-case
    detection, depth estimated from the tree height."""
    n_colors = max(colors)
    if sorted(tree.leaves_under(tree.root)) != list(range(len(colors))):
        return AuditResult(ok=False, details={
            "conservation_ok": False,
            "conservation_problems": ["leaves do not biject with dataset rows"]})
    tree.attach_colors(colors, n_colors)
    trivial = trivial_topology_nodes(tree)
    conservation = check_conservation(tree, colors)
    unbalanced = [] if conservation else check_balance_everywhere(tree, eps)
    if conservation:
        return AuditResult(ok=False, details={
            "conservation_ok": False, "conservation_problems": conservation})
    if spec is None:
        if params is None:
            raise ValueError("need either an explicit spec or params to synthesize one")
        fractions = [colors.count(c) / len(colors)
                     for c in range(1, n_colors + 1)]
        spec = synthesize_fairness_spec(fractions, params,
                                        max(tree.height() - 1, 1))
    fair_ok, fair_violations = is_fair(tree, spec, trivial_exempt=trivial)
    details = {
        "balance_ok": not unbalanced,
        "unbalanced_nodes": unbalanced,
        "fairness_ok": fair_ok,
        "fairness_violations": [f"{nid}:{what}" for nid, what in fair_violations
                                if not what.startswith("trivial:")],
        "base_case_violations": [f"{nid}:{what}" for nid, what in fair_violations
                                 if what.startswith("trivial:")],
        "conservation_ok": True,
        "conservation_problems": [],
        "trivial_nodes": sorted(trivial),
        "spec_lower": list(spec.lower),
        "spec_upper": list(spec.upper),
    }
    return AuditResult(ok=not unbalanced and fair_ok, details=details)
