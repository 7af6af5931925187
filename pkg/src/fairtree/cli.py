"""Command line driver.

`fairtree run` executes the full pipeline on a CSV: ingest -> (subsample) ->
similarity -> average linkage -> fairness rewrite -> metrics, with optional
replications, and writes a JSON report (plus a histogram CSV next to it).
`fairtree audit` re-checks a serialized tree against its dataset.

Exit codes: 0 success, 1 usage, 2 data error, 3 invariant failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

from .audit import audit_run, audit_tree_file, synthesize_fairness_spec
from .data_io import IngestConfig, build_similarity, load_csv, subsample
from .errors import (
    FairTreeError,
    IngestError,
    InputError,
    InternalInvariantError,
    ShapeError,
    TreeInvariantError,
)
from .fairify import FairTrace, make_fair
from .linkage import average_linkage
from .metrics import DEFAULT_BINS, RunReport, aggregate, balance_histogram, cost_ratio
from .operators import SeparationLog
from .cost import total_cost
from .tree import Dendrogram
from .types import FairnessSpec, FairParams

USAGE_EXIT, DATA_EXIT, INVARIANT_EXIT = 1, 2, 3


def _parse_color_map(text: str) -> dict[str, int]:
    mapping = {}
    for part in text.split(","):
        if "=" not in part:
            raise IngestError(f"bad color-map entry {part!r}, want value=id")
        value, cid = part.split("=", 1)
        mapping[value.strip()] = int(cid)
    if not mapping:
        raise IngestError("empty color map")
    return mapping


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def eps_from_c(c: float, n: int) -> float:
    """The balance slack rule used throughout: eps = 1 / (c * log2 n)."""
    return 1.0 / (c * math.log2(n))


def _add_ingest_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="CSV file (header row, UTF-8)")
    p.add_argument("--numeric-cols", required=True,
                   help="comma-separated numeric feature columns")
    p.add_argument("--color-col", required=True, help="protected-attribute column")
    p.add_argument("--color-map", required=True,
                   help="value=colorId pairs, comma separated (ids are 1-based)")
    p.add_argument("--normalize", action="store_true",
                   help="min-max normalize features (off by default)")
    p.add_argument("--n", type=int, default=None, help="subsample size")
    p.add_argument("--seed", type=int, default=0, help="base RNG seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairtree")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="full pipeline: ingest to fairness report")
    _add_ingest_flags(run)
    run.add_argument("--replications", type=int, default=1)
    run.add_argument("--h", dest="arity", type=int, default=4,
                     help="split arity (children per balanced split)")
    run.add_argument("--k", dest="fold_width", type=int, default=2,
                     help="fold width (chunks merged per fold pass)")
    run.add_argument("--eps-c", dest="eps_c", type=float, default=8.0,
                     help="balance slack eps = 1/(c * log2 n)")
    run.add_argument("--alpha", type=_parse_floats, default=None,
                     help="explicit per-color fairness lower bounds")
    run.add_argument("--beta", type=_parse_floats, default=None,
                     help="explicit per-color fairness upper bounds")
    run.add_argument("--bins", type=int, default=DEFAULT_BINS)
    run.add_argument("--out", default=None, help="report JSON path (stdout if omitted)")
    run.add_argument("--emit-tree", default=None,
                     help="write the rewritten tree (first replication) as JSON")
    run.add_argument("--no-strict", action="store_true",
                     help="report invariant trips instead of failing")

    audit = sub.add_parser("audit", help="re-check a serialized tree")
    _add_ingest_flags(audit)
    audit.add_argument("--tree", required=True, help="tree JSON to audit")
    audit.add_argument("--h", dest="arity", type=int, default=4)
    audit.add_argument("--k", dest="fold_width", type=int, default=2)
    audit.add_argument("--eps-c", dest="eps_c", type=float, default=8.0)
    audit.add_argument("--alpha", type=_parse_floats, default=None)
    audit.add_argument("--beta", type=_parse_floats, default=None)
    return parser


def _ingest(args: argparse.Namespace) -> tuple[IngestConfig, "Dataset"]:
    config = IngestConfig(
        path=args.input,
        numeric_cols=[c.strip() for c in args.numeric_cols.split(",")],
        color_col=args.color_col,
        color_map=_parse_color_map(args.color_map),
        n=args.n,
        seed=args.seed,
        normalize=args.normalize,
    )
    return config, load_csv(config)


def _explicit_spec(args: argparse.Namespace, n_colors: int) -> FairnessSpec | None:
    if args.alpha is None and args.beta is None:
        return None
    if args.alpha is None or args.beta is None:
        raise InputError("--alpha and --beta must be given together")
    if len(args.alpha) != n_colors or len(args.beta) != n_colors:
        raise InputError(f"--alpha/--beta need {n_colors} entries")
    return FairnessSpec(lower=args.alpha, upper=args.beta)


def _run_once(dataset, args, seed: int, spec: FairnessSpec | None,
              params: FairParams, eps: float) -> tuple[RunReport, Dendrogram]:
    timings: dict[str, float] = {}

    def clock(name, fn, *fn_args, **fn_kwargs):
        start = time.perf_counter()
        result = fn(*fn_args, **fn_kwargs)
        timings[name] = (time.perf_counter() - start) * 1000.0
        return result

    sample = dataset
    if args.n is not None and args.n < dataset.n:
        sample = clock("subsample", subsample, dataset, args.n, seed)
    graph = clock("similarity", build_similarity, sample)
    vanilla = clock("linkage", average_linkage, graph)
    log = SeparationLog()
    trace = FairTrace()
    fair = clock("make_fair", make_fair, vanilla, graph, sample.colors, params,
                 log=log, trace=trace, strict=not args.no_strict)

    start = time.perf_counter()
    cost_v = total_cost(vanilla, graph)
    cost_f = total_cost(fair, graph)
    ratio = cost_ratio(vanilla, fair, graph)
    hist = balance_histogram(fair, color=1, bins=args.bins)
    audit = audit_run(fair, sample.colors, params, trace, log, spec=spec)
    timings["metrics"] = (time.perf_counter() - start) * 1000.0

    report = RunReport(
        params={
            "dataset": args.input,
            "numeric_cols": [c.strip() for c in args.numeric_cols.split(",")],
            "color_col": args.color_col,
            "color_map": _parse_color_map(args.color_map),
            "normalize": args.normalize,
            "n": sample.n,
            "seed": seed,
            "h": params.arity,
            "k": params.fold_width,
            "eps": eps,
            "eps_c": args.eps_c,
            "bins": args.bins,
        },
        cost_vanilla=cost_v,
        cost_fair=cost_f,
        ratio_cost=ratio,
        histogram=hist,
        dataset_balance=sample.color_fractions(),
        audit=audit.to_dict(),
        timings_ms=timings,
    )
    return report, fair


def _cmd_run(args: argparse.Namespace) -> int:
    _, dataset = _ingest(args)
    n_effective = args.n if args.n is not None else dataset.n
    if n_effective < 2:
        raise InputError("need at least 2 points")
    eps = eps_from_c(args.eps_c, n_effective)
    params = FairParams(arity=args.arity, fold_width=args.fold_width, eps=eps)
    params.check_colors(dataset.n_colors)
    spec = _explicit_spec(args, dataset.n_colors)

    reports: list[RunReport] = []
    first_tree: Dendrogram | None = None
    for rep in range(args.replications):
        report, fair = _run_once(dataset, args, args.seed + rep, spec, params, eps)
        reports.append(report)
        if first_tree is None:
            first_tree = fair

    if len(reports) == 1:
        payload = reports[0].to_dict()
        hist = reports[0].histogram
    else:
        payload = {
            "reports": [r.to_dict() for r in reports],
            "aggregate": aggregate(reports),
        }
        hist = reports[0].histogram

    text = json.dumps(payload, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        csv_path = Path(args.out).with_suffix(".hist.csv")
        csv_path.write_text(hist.to_csv(), encoding="utf-8")
    else:
        print(text)
    if args.emit_tree and first_tree is not None:
        Path(args.emit_tree).write_text(first_tree.to_json() + "\n",
                                        encoding="utf-8")

    failed = [i for i, r in enumerate(reports) if not r.audit.get("ok", False)]
    if failed and not args.no_strict:
        print(json.dumps({"error": {"phase": "audit",
                                    "message": f"invariant audit failed in "
                                               f"replications {failed}"}}),
              file=sys.stderr)
        return INVARIANT_EXIT
    return 0


def _cmd_audit(args: argparse.Namespace) -> int:
    _, dataset = _ingest(args)
    sample = dataset
    if args.n is not None and args.n < dataset.n:
        sample = subsample(dataset, args.n, args.seed)
    tree = Dendrogram.from_json(Path(args.tree).read_text(encoding="utf-8"))
    if tree.n_leaves != sample.n:
        raise ShapeError(f"tree has {tree.n_leaves} leaves, dataset sample "
                         f"has {sample.n}")
    eps = eps_from_c(args.eps_c, sample.n)
    params = FairParams(arity=args.arity, fold_width=args.fold_width, eps=eps)
    spec = _explicit_spec(args, sample.n_colors)
    result = audit_tree_file(tree, sample.colors, eps, spec, params)
    print(json.dumps(result.to_dict(), sort_keys=True, indent=2))
    return 0 if result.ok else INVARIANT_EXIT


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_EXIT if exc.code not in (0, None) else 0
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_audit(args)
    except (IngestError, InputError, ShapeError, TreeInvariantError,
            FileNotFoundError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": {"phase": "data", "message": str(exc)}}),
              file=sys.stderr)
        return DATA_EXIT
    except InternalInvariantError as exc:
        print(json.dumps({"error": {"phase": "invariant", "message": str(exc)}}),
              file=sys.stderr)
        return INVARIANT_EXIT
    except FairTreeError as exc:
        print(json.dumps({"error": {"phase": "usage", "message": str(exc)}}),
              file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
