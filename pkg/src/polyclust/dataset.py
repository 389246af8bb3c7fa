"""Tabular ingest, normalization and pairwise distances."""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial.distance import cdist

MISSING = {"", "NA"}
KINDS = ("numeric", "categorical", "binary")

# precompute the full matrix up to this many points
PRECOMPUTE_LIMIT = 5000


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown feature kind {self.kind!r} for {self.name!r}")


class DistanceProvider:
    """Euclidean distances over the clustering view.

    In ``precomputed_matrix`` mode the full N x N matrix is held in memory,
    otherwise blocks are computed when asked for.
    """

    def __init__(self, points: np.ndarray, mode: str | None = None):
        self.points = points
        self.metric = "euclidean"
        if mode is None:
            mode = "precomputed_matrix" if len(points) <= PRECOMPUTE_LIMIT else "on_demand"
        if mode not in ("precomputed_matrix", "on_demand"):
            raise ValueError(f"unknown distance mode {mode!r}")
        self.mode = mode
        self._matrix = None
        if mode == "precomputed_matrix":
            m = cdist(points, points)
            np.fill_diagonal(m, 0.0)
            # cdist is symmetric up to rounding; force exact symmetry
            m = np.minimum(m, m.T)
            m.setflags(write=False)
            self._matrix = m

    def __call__(self, t: int, j: int) -> float:
        n = len(self.points)
        if not (0 <= t < n and 0 <= j < n):
            raise IndexError(f"point index out of range: ({t}, {j}) with N={n}")
        if self._matrix is not None:
            return float(self._matrix[t, j])
        if t == j:
            return 0.0
        a, b = (t, j) if t < j else (j, t)
        return float(np.sqrt(np.sum((self.points[a] - self.points[b]) ** 2)))

    def columns(self, idx) -> np.ndarray:
        """Distances from every point to the points in ``idx`` (N x len(idx))."""
        idx = np.asarray(idx, dtype=int)
        if self._matrix is not None:
            return self._matrix[:, idx]
        block = cdist(self.points, self.points[idx])
        block[idx, np.arange(len(idx))] = 0.0
        return block

    def matrix(self) -> np.ndarray:
        if self._matrix is not None:
            return self._matrix
        return self.columns(np.arange(len(self.points)))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Normalized point matrix with a clustering view and an explanation view.

    ``columns``/``explain_columns`` name each output column; ``raw_min`` and
    ``raw_max`` hold the pre-normalization range of numeric explanation
    columns (NaN for one-hot and binarized columns) so thresholds can be
    mapped back to original units.
    """

    points: np.ndarray
    explain_points: np.ndarray
    columns: tuple
    explain_columns: tuple
    feature_specs: tuple = ()
    explain_specs: tuple = ()
    raw_min: np.ndarray | None = None
    raw_max: np.ndarray | None = None
    constant_columns: tuple = ()
    dropped_rows: int = 0
    distance_mode: str | None = field(default=None, compare=False)

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float)
        ex = np.ascontiguousarray(self.explain_points, dtype=float)
        if pts.ndim != 2 or ex.ndim != 2:
            raise ValueError("points must be 2-D")
        if pts.shape[0] < 2:
            raise ValueError("need at least two points")
        if pts.shape[1] < 1:
            raise ValueError("need at least one feature")
        if ex.shape[0] != pts.shape[0]:
            raise ValueError("clustering and explanation views have different row counts")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(ex))):
            raise ValueError("points contain NaN or infinite values")
        pts.setflags(write=False)
        ex.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "explain_points", ex)
        if len(self.columns) != pts.shape[1] or len(self.explain_columns) != ex.shape[1]:
            raise ValueError("column names do not match matrix widths")
        d = ex.shape[1]
        for attr in ("raw_min", "raw_max"):
            v = getattr(self, attr)
            v = np.full(d, np.nan) if v is None else np.asarray(v, dtype=float)
            if v.shape != (d,):
                raise ValueError(f"{attr} must have one entry per explanation column")
            v.setflags(write=False)
            object.__setattr__(self, attr, v)

    @classmethod
    def from_arrays(cls, points, explain_points=None, columns=None, explain_columns=None, **kw):
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        if columns is None:
            columns = tuple(f"x{d}" for d in range(points.shape[1]))
        if explain_points is None:
            explain_points = points
            if explain_columns is None:
                explain_columns = columns
        explain_points = np.asarray(explain_points, dtype=float)
        if explain_points.ndim == 1:
            explain_points = explain_points[:, None]
        if explain_columns is None:
            explain_columns = tuple(f"x{d}" for d in range(explain_points.shape[1]))
        return cls(points, explain_points, tuple(columns), tuple(explain_columns), **kw)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def d_explain(self) -> int:
        return self.explain_points.shape[1]

    @property
    def warnings(self) -> tuple:
        return tuple(f"constant column {c!r} mapped to zeros" for c in self.constant_columns)

    @cached_property
    def binary_columns(self) -> np.ndarray:
        """Mask of explanation columns whose values are all 0 or 1."""
        ex = self.explain_points
        return np.all((ex == 0.0) | (ex == 1.0), axis=0)

    @cached_property
    def dist(self) -> DistanceProvider:
        return DistanceProvider(self.points, self.distance_mode)

    def distance(self, t: int, j: int) -> float:
        return self.dist(t, j)

    def with_explain_view(self, explain_points, explain_columns, raw_min=None, raw_max=None):
        return Dataset(
            self.points, explain_points, self.columns, tuple(explain_columns),
            feature_specs=self.feature_specs, explain_specs=(),
            raw_min=raw_min, raw_max=raw_max,
            constant_columns=self.constant_columns, dropped_rows=self.dropped_rows,
            distance_mode=self.distance_mode,
        )


def _parse_float(s: str):
    try:
        return float(s)
    except ValueError:
        return None


def _load_schema(schema) -> dict:
    if schema is None:
        return {}
    if isinstance(schema, (str, Path)):
        import yaml

        with open(schema, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh) or {}
        return {str(k): str(v) for k, v in doc.items()}
    if isinstance(schema, Mapping):
        return {str(k): str(v) for k, v in schema.items()}
    return {fs.name: fs.kind for fs in schema}


def load_csv(path, schema=None) -> Dataset:
    """Read a CSV file with a header row into a normalized :class:`Dataset`.

    Numeric columns are max-min rescaled to [0, 1], categorical columns are
    one-hot encoded (categories in order of first appearance) and rows with
    any missing cell are dropped. ``schema`` may be a list of
    :class:`FeatureSpec`, a name->kind mapping, or a path to a YAML/JSON
    document with that mapping; unlisted columns are inferred.
    """
    kinds = _load_schema(schema)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or not any(c.strip() for c in rows[0]):
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r and any(c.strip() for c in r)]
    kept = []
    for r in body:
        if len(r) != len(header):
            raise ValueError(f"{path}: row has {len(r)} cells, header has {len(header)}")
        cells = [c.strip() for c in r]
        if any(c in MISSING for c in cells):
            continue
        kept.append(cells)
    if not kept:
        raise ValueError(f"{path}: no rows left after removing missing values")
    unknown = set(kinds) - set(header)
    if unknown:
        raise ValueError(f"schema names unknown columns: {sorted(unknown)}")

    specs, blocks, names, lo_hi, constant = [], [], [], [], []
    for c, name in enumerate(header):
        values = [r[c] for r in kept]
        parsed = [_parse_float(v) for v in values]
        kind = kinds.get(name)
        if kind is None:
            kind = "numeric" if all(p is not None for p in parsed) else "categorical"
        spec = FeatureSpec(name, kind)
        specs.append(spec)
        if kind == "categorical":
            cats = list(dict.fromkeys(values))
            onehot = np.array([[1.0 if v == cat else 0.0 for cat in cats] for v in values])
            blocks.append(onehot)
            names.extend(f"{name}={cat}" for cat in cats)
            lo_hi.extend([(np.nan, np.nan)] * len(cats))
            continue
        if any(p is None for p in parsed):
            raise ValueError(f"column {name!r} declared {kind} but has non-numeric values")
        col = np.array(parsed, dtype=float)
        if kind == "binary":
            if not np.all((col == 0) | (col == 1)):
                raise ValueError(f"binary column {name!r} has values other than 0/1")
            blocks.append(col[:, None])
            names.append(name)
            lo_hi.append((np.nan, np.nan))
            continue
        lo, hi = col.min(), col.max()
        if hi > lo:
            scaled = (col - lo) / (hi - lo)
        else:
            scaled = np.zeros_like(col)
            constant.append(name)
        blocks.append(scaled[:, None])
        names.append(name)
        lo_hi.append((lo, hi))

    if constant:
        warnings.warn(f"constant columns mapped to zeros: {constant}", stacklevel=2)
    X = np.hstack(blocks)
    lo_hi = np.array(lo_hi, dtype=float)
    return Dataset(
        X, X, tuple(names), tuple(names),
        feature_specs=tuple(specs), explain_specs=tuple(specs),
        raw_min=lo_hi[:, 0], raw_max=lo_hi[:, 1],
        constant_columns=tuple(constant), dropped_rows=len(body) - len(kept),
    )


def binarize(ds: Dataset, cuts: Mapping[str, Sequence[float]]) -> Dataset:
    """Replace the explanation view by thresholded indicator columns.

    ``cuts`` maps an explanation column name to cut points given in raw
    units when the column's range is known, else in normalized units. Each
    cut ``c`` yields a column ``"name >= c"``. Columns without cuts are kept
    as they are.
    """
    ex = ds.explain_points
    cols, names, lo, hi = [], [], [], []
    unknown = set(cuts) - set(ds.explain_columns)
    if unknown:
        raise ValueError(f"cuts given for unknown columns: {sorted(unknown)}")
    for d, name in enumerate(ds.explain_columns):
        if name not in cuts:
            cols.append(ex[:, d])
            names.append(name)
            lo.append(ds.raw_min[d])
            hi.append(ds.raw_max[d])
            continue
        rmin, rmax = ds.raw_min[d], ds.raw_max[d]
        for c in sorted(cuts[name]):
            if np.isfinite(rmin) and rmax > rmin:
                thr = (c - rmin) / (rmax - rmin)
            else:
                thr = c
            cols.append((ex[:, d] >= thr).astype(float))
            names.append(f"{name} >= {c:g}")
            lo.append(np.nan)
            hi.append(np.nan)
    return ds.with_explain_view(np.column_stack(cols), names, np.array(lo), np.array(hi))
