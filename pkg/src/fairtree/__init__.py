"""fairtree: rewrite a hierarchical clustering into a fair, relatively
balanced hierarchy at bounded extra cost."""

from .audit import (
    audit_run,
    audit_tree_file,
    fold_bound_factors,
    synthesize_fairness_spec,
    trivial_topology_nodes,
)
from .cost import edge_cost, total_cost, total_cost_pairwise
from .data_io import (
    IngestConfig,
    build_similarity,
    fixture_path,
    load_csv,
    subsample,
    synthetic_two_color,
    write_csv,
)
from .errors import (
    AggregationError,
    DegenerateInputError,
    FairTreeError,
    IngestError,
    InputError,
    InternalInvariantError,
    InvalidNodeError,
    InvalidPairError,
    ParameterError,
    PreconditionError,
    ShapeError,
    TooSmallError,
    TreeInvariantError,
)
from .fairify import (
    FairTrace,
    find_insertion_point,
    fold_by_color,
    fold_passes,
    make_fair,
    select_movable_subtree,
    split_root,
)
from .linkage import average_linkage, average_linkage_oracle, merge_sequence
from .metrics import (
    Histogram,
    RunReport,
    aggregate,
    balance_histogram,
    cost_ratio,
)
from .operators import (
    SeparationEvent,
    SeparationLog,
    changed_pairs,
    del_ins,
    pair_separation_levels,
    shallow_fold,
)
from .tree import (
    Dendrogram,
    binarize,
    cluster_balance,
    is_fair,
    is_relatively_balanced,
    lca,
    leaf_count,
)
from .types import Dataset, FairnessSpec, FairParams, SimilarityGraph

__all__ = [
    "AggregationError", "Dataset", "DegenerateInputError", "Dendrogram",
    "FairnessSpec", "FairParams", "FairTrace", "FairTreeError", "Histogram",
    "IngestConfig", "IngestError", "InputError", "InternalInvariantError",
    "InvalidNodeError", "InvalidPairError", "ParameterError",
    "PreconditionError", "RunReport", "SeparationEvent", "SeparationLog",
    "ShapeError", "SimilarityGraph", "TooSmallError", "TreeInvariantError",
    "aggregate", "audit_run", "audit_tree_file", "average_linkage",
    "average_linkage_oracle", "balance_histogram", "binarize", "changed_pairs",
    "cluster_balance", "cost_ratio", "del_ins", "edge_cost",
    "find_insertion_point", "fixture_path", "fold_bound_factors",
    "fold_by_color", "fold_passes", "is_fair", "is_relatively_balanced",
    "lca", "leaf_count", "load_csv", "make_fair", "merge_sequence",
    "pair_separation_levels", "select_movable_subtree", "shallow_fold",
    "split_root", "subsample", "synthesize_fairness_spec",
    "synthetic_two_color", "total_cost", "total_cost_pairwise",
    "trivial_topology_nodes", "write_csv", "build_similarity",
]
