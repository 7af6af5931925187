"""Exception hierarchy. All package errors derive from FairTreeError."""


class FairTreeError(Exception):
    pass


class InvalidNodeError(FairTreeError):
    """Unknown, dead, or structurally illegal node id."""


class InvalidPairError(FairTreeError):
    """A leaf-pair query was given identical or non-leaf endpoints."""


class ShapeError(FairTreeError):
    """Leaves of a tree do not biject with the vertices of a graph/dataset."""


class PreconditionError(FairTreeError):
    """A tree operator was called outside its legal domain."""


class TreeInvariantError(FairTreeError):
    """A dendrogram failed structural validation."""


class ParameterError(FairTreeError):
    """Algorithm parameters out of range (e.g. h < k**n_colors)."""


class InputError(FairTreeError):
    """Bad problem input (too few points, exhausted quota, ...)."""


class IngestError(FairTreeError):
    """CSV ingestion failed (missing column, unmapped color, empty result)."""


class TooSmallError(FairTreeError):
    """Subtree too small to balance at integer granularity."""


class DegenerateInputError(FairTreeError):
    """Metric undefined for this input (e.g. zero vanilla cost)."""


class AggregationError(FairTreeError):
    """Reports with mismatched parameters cannot be aggregated."""


class InternalInvariantError(FairTreeError):
    """A runtime self-check tripped; indicates a bug, not bad input."""
