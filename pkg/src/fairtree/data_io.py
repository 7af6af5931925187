"""Dataset ingestion: CSV loading with a value->color mapping, balance
preserving seeded subsampling, and similarity-graph construction
w(i, j) = 1 / (1 + euclidean(i, j))."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import IngestError, InputError
from .types import Dataset, SimilarityGraph


@dataclass
class IngestConfig:
    path: str
    numeric_cols: list[str]
    color_col: str
    color_map: dict[str, int]        # raw cell value -> 1-based color id
    n: int | None = None             # subsample size; None = all rows
    seed: int = 0
    replications: int = 1
    normalize: bool = False          # optional min-max feature normalization

    def __post_init__(self) -> None:
        if not self.numeric_cols:
            raise IngestError("at least one numeric column required")
        if self.n is not None and self.n < 2:
            raise IngestError("sample size must be >= 2")


def load_csv(config: IngestConfig) -> Dataset:
    """Read the CSV, drop rows with missing/non-numeric selected values, map
    the color column through config.color_map, and infer the color count."""
    path = Path(config.path)
    if not path.exists():
        raise IngestError(f"no such file: {path}")
    rows: list[list[float]] = []
    colors: list[int] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in [*config.numeric_cols, config.color_col]:
            if col not in header:
                raise IngestError(f"column {col!r} not in {header}")
        for raw in reader:
            values = []
            ok = True
            for col in config.numeric_cols:
                cell = (raw.get(col) or "").strip()
                try:
                    values.append(float(cell))
                except ValueError:
                    ok = False
                    break
            if not ok:
                continue
            cell = (raw.get(config.color_col) or "").strip()
            if not cell:
                continue
            if cell not in config.color_map:
                raise IngestError(f"unmapped color value {cell!r}")
            rows.append(values)
            colors.append(config.color_map[cell])
    if not rows:
        raise IngestError("no usable rows after filtering")
    points = np.asarray(rows, dtype=float)
    if config.normalize:
        lo = points.min(axis=0)
        span = points.max(axis=0) - lo
        span[span == 0.0] = 1.0
        points = (points - lo) / span
    n_colors = max(colors)
    if set(colors) != set(range(1, n_colors + 1)):
        raise IngestError("every color id in 1..max must occur")
    return Dataset(points=points, colors=colors, n_colors=n_colors)


def subsample(dataset: Dataset, n: int, seed: int) -> Dataset:
    """Per-color quotas floor(n * fraction) topped up by largest remainder,
    sampled uniformly within each color from a seeded generator."""
    if n > dataset.n:
        raise InputError(f"cannot sample {n} from {dataset.n} rows")
    by_color: dict[int, list[int]] = {c: [] for c in range(1, dataset.n_colors + 1)}
    for idx, c in enumerate(dataset.colors):
        by_color[c].append(idx)
    quotas = {}
    remainders = []
    for c, members in by_color.items():
        exact = n * len(members) / dataset.n
        quotas[c] = int(exact)
        remainders.append((exact - int(exact), -c))
    short = n - sum(quotas.values())
    for frac, neg_c in sorted(remainders, reverse=True)[:short]:
        quotas[-neg_c] += 1
    for c, quota in quotas.items():
        if quota > len(by_color[c]):
            raise InputError(f"color {c} quota {quota} exceeds "
                             f"{len(by_color[c])} available rows")
    rng = np.random.default_rng(seed)
    chosen: list[int] = []
    for c in sorted(by_color):
        members = by_color[c]
        pick = rng.choice(len(members), size=quotas[c], replace=False)
        chosen.extend(members[i] for i in pick)
    chosen.sort()
    return Dataset(points=dataset.points[chosen],
                   colors=[dataset.colors[i] for i in chosen],
                   n_colors=dataset.n_colors)


def build_similarity(dataset: Dataset) -> SimilarityGraph:
    """w(i, j) = 1 / (1 + d(i, j)), euclidean distance over the features."""
    if dataset.n == 1:
        return SimilarityGraph(np.zeros((1, 1)))
    dist = squareform(pdist(dataset.points, metric="euclidean"))
    weights = 1.0 / (1.0 + dist)
    np.fill_diagonal(weights, 0.0)
    return SimilarityGraph(weights)


def synthetic_two_color(n: int, minority_fraction: float, seed: int, *,
                        n_features: int = 4, offset: float = 0.75) -> Dataset:
    """Deterministic two-color stand-in for a census-style table: color 1
    (minority, `minority_fraction` of rows) is drawn from a shifted gaussian,
    color 2 from the standard one. `offset` controls how geometrically
    separated the colors are."""
    if not 0.0 < minority_fraction < 1.0:
        raise InputError("minority_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    n_minority = max(1, round(n * minority_fraction))
    points = rng.standard_normal((n, n_features))
    points[:n_minority, 0] += offset
    colors = [1] * n_minority + [2] * (n - n_minority)
    perm = rng.permutation(n)
    return Dataset(points=points[perm], colors=[colors[i] for i in perm],
                   n_colors=2)


def write_csv(dataset: Dataset, path: str | Path,
              color_names: dict[int, str] | None = None) -> None:
    """Write a dataset in the ingestible CSV layout (f0..fk, color)."""
    names = color_names or {c: str(c) for c in range(1, dataset.n_colors + 1)}
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        d = dataset.points.shape[1]
        writer.writerow([f"f{i}" for i in range(d)] + ["color"])
        for row, color in zip(dataset.points, dataset.colors):
            writer.writerow([repr(float(x)) for x in row] + [names[color]])


def fixture_path() -> Path:
    """Bundled 16-row example CSV."""
    return Path(__file__).parent / "data" / "fixture16.csv"
