"""Shared value types: datasets, similarity graphs, fairness parameters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ParameterError


@dataclass
class Dataset:
    """Colored point set. Colors are 1-based ids in {1..n_colors}."""

    points: np.ndarray          # shape (n, d)
    colors: list[int]
    n_colors: int

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] < 1:
            raise InputError("points must be a (n, d) array with d >= 1")
        if len(self.colors) != self.points.shape[0]:
            raise InputError("one color per point required")
        seen = set(self.colors)
        if seen != set(range(1, self.n_colors + 1)):
            raise InputError(
                f"colors must cover 1..{self.n_colors}, got {sorted(seen)}"
            )

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def color_fractions(self) -> list[float]:
        """Dataset-wide fraction of each color, index 0 = color 1."""
        counts = [0] * self.n_colors
        for c in self.colors:
            counts[c - 1] += 1
        return [c / self.n for c in counts]


class SimilarityGraph:
    """Complete weighted graph over n points, symmetric nonnegative weights."""

    def __init__(self, weights: np.ndarray):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise InputError("weights must be a square matrix")
        if not np.allclose(w, w.T):
            raise InputError("weights must be symmetric")
        if np.any(w < 0):
            raise InputError("weights must be nonnegative")
        self.matrix = w.copy()
        np.fill_diagonal(self.matrix, 0.0)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def weight(self, i: int, j: int) -> float:
        if i == j:
            raise InputError("no self-loop weights")
        return float(self.matrix[i, j])


@dataclass(frozen=True)
class FairnessSpec:
    """Per-color cluster bounds: lower[c] * |C| <= count_c(C) <= upper[c] * |C|.

    A lower entry of 0 disables the corresponding lower bound (used by
    synthesized specs whose theoretical lower factor is vacuous).
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.lower) != len(self.upper):
            raise ParameterError("lower/upper must have one entry per color")
        for lo, hi in zip(self.lower, self.upper):
            if not (0.0 <= lo <= hi <= 1.0):
                raise ParameterError(f"need 0 <= lower <= upper <= 1, got ({lo}, {hi})")

    @property
    def n_colors(self) -> int:
        return len(self.lower)


@dataclass(frozen=True)
class FairParams:
    """Knobs of the rewriting pipeline.

    arity:       number of children every balanced split produces (h >= 2)
    fold_width:  number of chunks merged by each fold pass (k >= 2)
    eps:         relative-balance slack, in (0, 1/2)
    """

    arity: int
    fold_width: int
    eps: float

    def __post_init__(self) -> None:
        if self.arity < 2:
            raise ParameterError("arity must be >= 2")
        if self.fold_width < 2:
            raise ParameterError("fold_width must be >= 2")
        if not (0.0 < self.eps < 0.5):
            raise ParameterError("eps must lie in (0, 1/2)")

    def check_colors(self, n_colors: int) -> None:
        """The split arity must dominate fold_width ** n_colors."""
        if self.arity < self.fold_width**n_colors:
            raise ParameterError(
                f"arity {self.arity} < fold_width**n_colors "
                f"({self.fold_width}**{n_colors})"
            )
