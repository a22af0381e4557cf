"""Compile decision trees into CAM arrays of interval cells.

A compiled array has one row per leaf path and one column per feature.
Cell (r, f) stores the interval a query must fall into on feature f for
row r to match; features never tested on the path are stored as don't-care
cells, which match anything and can be skipped by the processing engine.

Internally a CamArray is three dense float/bool grids rather than cell
objects; don't-care cells carry the trivially-matching interval
(-inf, +inf] so a whole row can be matched with two vectorized compares.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .tree_model import TreeModel

__all__ = [
    "Cell",
    "CamArray",
    "InconsistentTreeError",
    "DONTCARE",
    "active_cell",
    "compile_tree",
    "match_row",
    "match_all_rows",
    "quantize",
    "sparsity",
    "unit_bounds",
    "normalize_queries",
    "classify",
    "array_to_document",
    "array_from_document",
    "load_array",
    "save_array",
]


class InconsistentTreeError(ValueError):
    """A path intersects to an empty interval on some feature."""


@dataclass(frozen=True)
class Cell:
    """One CAM cell: either don't-care or an interval (lo, hi]."""

    kind: str  # "active" | "dontcare"
    lo: float = -math.inf
    hi: float = math.inf

    @property
    def is_active(self) -> bool:
        return self.kind == "active"


DONTCARE = Cell("dontcare")


def active_cell(lo: float, hi: float) -> Cell:
    return Cell("active", lo, hi)


@dataclass
class CamArray:
    """Grid of interval cells plus per-row class labels.

    Treated as immutable after construction; transforms return copies.
    """

    lo: np.ndarray  # (n_rows, n_cols) float64, -inf on dontcare
    hi: np.ndarray  # (n_rows, n_cols) float64, +inf on dontcare
    active: np.ndarray  # (n_rows, n_cols) bool
    row_labels: np.ndarray  # (n_rows,) int
    feature_bounds: np.ndarray  # (n_cols, 2) float64

    @property
    def n_rows(self) -> int:
        return self.lo.shape[0]

    @property
    def n_cols(self) -> int:
        return self.lo.shape[1]

    def cell(self, row: int, col: int) -> Cell:
        if self.active[row, col]:
            return Cell("active", float(self.lo[row, col]), float(self.hi[row, col]))
        return DONTCARE

    def __post_init__(self):
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        self.active = np.asarray(self.active, dtype=bool)
        self.row_labels = np.asarray(self.row_labels, dtype=int)
        self.feature_bounds = np.asarray(self.feature_bounds, dtype=float)
        r, c = self.lo.shape
        if self.hi.shape != (r, c) or self.active.shape != (r, c):
            raise ValueError("cell grids must share one shape")
        if self.row_labels.shape != (r,):
            raise ValueError("row_labels length must equal n_rows")
        if self.feature_bounds.shape != (c, 2):
            raise ValueError("feature_bounds must be (n_cols, 2)")


def unit_bounds(n_features: int) -> np.ndarray:
    """[0, 1] domain for every feature."""
    return np.tile(np.array([0.0, 1.0]), (n_features, 1))


def from_cells(cells, row_labels, feature_bounds) -> CamArray:
    """Build a CamArray from a row-major grid of Cell objects."""
    rows = len(cells)
    cols = len(cells[0]) if rows else 0
    lo = np.full((rows, cols), -math.inf)
    hi = np.full((rows, cols), math.inf)
    act = np.zeros((rows, cols), dtype=bool)
    for r, row in enumerate(cells):
        for c, cell in enumerate(row):
            if cell.is_active:
                lo[r, c], hi[r, c], act[r, c] = cell.lo, cell.hi, True
    return CamArray(lo, hi, act, np.asarray(row_labels), np.asarray(feature_bounds))


# ---------------------------------------------------------------------------
# Compilation
# ---------------------------------------------------------------------------

def compile_tree(model: TreeModel, feature_bounds) -> CamArray:
    """One row per leaf (left-first DFS order); cells are the intersected
    path constraints per feature, don't-care where a feature is untested."""
    bounds = np.asarray(feature_bounds, dtype=float)
    if bounds.shape != (model.n_features, 2):
        raise ValueError(f"feature_bounds must be ({model.n_features}, 2)")
    if not np.all(np.isfinite(bounds)):
        raise ValueError("feature_bounds must be finite")
    if not np.all(bounds[:, 0] < bounds[:, 1]):
        raise ValueError("feature_bounds must satisfy min < max")

    rows_lo: list[np.ndarray] = []
    rows_hi: list[np.ndarray] = []
    rows_tested: list[np.ndarray] = []
    labels: list[int] = []

    f_count = model.n_features
    lo0 = np.full(f_count, -math.inf)
    hi0 = np.full(f_count, math.inf)
    tested0 = np.zeros(f_count, dtype=bool)
    # Stack of (node id, lo, hi, tested); push right first for left-first order.
    stack = [(0, lo0, hi0, tested0)]
    while stack:
        node_id, lo, hi, tested = stack.pop()
        node = model.nodes[node_id]
        if node.is_leaf:
            rows_lo.append(lo)
            rows_hi.append(hi)
            rows_tested.append(tested)
            labels.append(node.class_label)  # type: ignore[arg-type]
            continue
        f, t = node.feature, node.threshold
        left_hi = hi.copy()
        left_hi[f] = min(hi[f], t)
        right_lo = lo.copy()
        right_lo[f] = max(lo[f], t)
        if not lo[f] < left_hi[f] or not right_lo[f] < hi[f]:
            raise InconsistentTreeError(f"split {node_id}: empty interval on feature {f}")
        tested_f = tested.copy()
        tested_f[f] = True
        stack.append((node.right, right_lo, hi, tested_f))
        stack.append((node.left, lo, left_hi, tested_f))

    lo = np.vstack(rows_lo)
    hi = np.vstack(rows_hi)
    active = np.vstack(rows_tested)
    lo[~active] = -math.inf
    hi[~active] = math.inf
    return CamArray(lo, hi, active, np.asarray(labels), bounds)


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------

def match_row(array: CamArray, row: int, query) -> bool:
    """Brute-force row match: every cell matches (don't-care always does,
    active cells need lo < q <= hi). This is the oracle all processing
    strategies are checked against."""
    if not 0 <= row < array.n_rows:
        raise IndexError(f"row {row} out of range")
    q = np.asarray(query, dtype=float)
    if q.shape != (array.n_cols,):
        raise ValueError(f"query has shape {q.shape}, expected ({array.n_cols},)")
    return bool(np.all((array.lo[row] < q) & (q <= array.hi[row])))


def match_all_rows(array: CamArray, query) -> np.ndarray:
    """Boolean match vector over all rows for one query."""
    q = np.asarray(query, dtype=float)
    if q.shape != (array.n_cols,):
        raise ValueError(f"query has shape {q.shape}, expected ({array.n_cols},)")
    return np.all((array.lo < q) & (q <= array.hi), axis=1)


def classify(array: CamArray, query) -> int | None:
    """Label of the lowest-index matching row, or None when nothing matches.

    Quantized arrays may match several rows because quantization widens
    intervals; the lowest row index keeps classification deterministic.
    """
    matches = np.flatnonzero(match_all_rows(array, query))
    if matches.size == 0:
        return None
    return int(array.row_labels[matches[0]])


# ---------------------------------------------------------------------------
# Quantization
# ---------------------------------------------------------------------------

def quantize(array: CamArray, levels: int) -> CamArray:
    """Snap active intervals onto a uniform conductance grid.

    Each feature's domain maps affinely onto [0, 1]; active bounds land on
    the grid {k/(levels-1)} with lo rounded down and hi rounded up, so
    intervals only ever widen. Unbounded ends snap to the domain edges.
    The result is expressed in normalized units (feature_bounds become
    [0, 1]); use normalize_queries for matching against it.
    """
    if levels < 2:
        raise ValueError("levels must be >= 2")
    if not np.all(np.isfinite(array.feature_bounds)):
        raise ValueError("feature_bounds must be finite to quantize")
    mn = array.feature_bounds[:, 0]
    mx = array.feature_bounds[:, 1]
    span = mx - mn
    if not np.all(span > 0):
        raise ValueError("feature_bounds must satisfy min < max")

    steps = levels - 1
    lo_n = (array.lo - mn) / span
    hi_n = (array.hi - mn) / span
    # floor/ceil with a snap tolerance so bounds already on the grid stay put
    # despite binary rounding in the normalization above.
    lo_q = np.floor(lo_n * steps + 1e-9) / steps
    hi_q = np.ceil(hi_n * steps - 1e-9) / steps
    lo_q = np.clip(lo_q, 0.0, 1.0)
    hi_q = np.clip(hi_q, 0.0, 1.0)
    lo_q[np.isneginf(array.lo)] = 0.0
    hi_q[np.isposinf(array.hi)] = 1.0
    lo_q[~array.active] = -math.inf
    hi_q[~array.active] = math.inf
    return CamArray(
        lo_q, hi_q, array.active.copy(), array.row_labels.copy(), unit_bounds(array.n_cols)
    )


def normalize_queries(queries, feature_bounds, clip: bool = False) -> np.ndarray:
    """Map raw-unit queries into the [0, 1] units of a quantized array.

    With ``clip`` the result is clamped into (0, 1]; samples outside the
    training domain then behave like the nearest representable input.
    """
    q = np.atleast_2d(np.asarray(queries, dtype=float))
    bounds = np.asarray(feature_bounds, dtype=float)
    out = (q - bounds[:, 0]) / (bounds[:, 1] - bounds[:, 0])
    if clip:
        out = np.clip(out, 1e-12, 1.0)
    return out


def sparsity(array: CamArray) -> float:
    """Fraction of don't-care cells."""
    total = array.n_rows * array.n_cols
    return float((total - np.count_nonzero(array.active)) / total)


# ---------------------------------------------------------------------------
# Interchange JSON
# ---------------------------------------------------------------------------

def _num_out(x: float):
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return x


def _num_in(x) -> float:
    if x == "-inf":
        return -math.inf
    if x == "inf":
        return math.inf
    return float(x)


def array_to_document(array: CamArray) -> dict:
    cells = []
    for r in range(array.n_rows):
        row = []
        for c in range(array.n_cols):
            if array.active[r, c]:
                row.append(
                    {"kind": "a", "lo": _num_out(float(array.lo[r, c])), "hi": _num_out(float(array.hi[r, c]))}
                )
            else:
                row.append({"kind": "x"})
        cells.append(row)
    return {
        "n_rows": array.n_rows,
        "n_cols": array.n_cols,
        "row_labels": [int(x) for x in array.row_labels],
        "feature_bounds": [[float(a), float(b)] for a, b in array.feature_bounds],
        "cells": cells,
    }


def array_from_document(doc: dict) -> CamArray:
    try:
        rows, cols = int(doc["n_rows"]), int(doc["n_cols"])
        labels = doc["row_labels"]
        bounds = doc["feature_bounds"]
        cells = doc["cells"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"array document is missing field {exc}") from exc
    lo = np.full((rows, cols), -math.inf)
    hi = np.full((rows, cols), math.inf)
    act = np.zeros((rows, cols), dtype=bool)
    if len(cells) != rows:
        raise ValueError("cells row count does not match n_rows")
    for r, row in enumerate(cells):
        if len(row) != cols:
            raise ValueError(f"cells[{r}] has wrong length")
        for c, cell in enumerate(row):
            if cell["kind"] == "a":
                lo[r, c], hi[r, c], act[r, c] = _num_in(cell["lo"]), _num_in(cell["hi"]), True
            elif cell["kind"] != "x":
                raise ValueError(f"cells[{r}][{c}]: unknown kind {cell['kind']!r}")
    return CamArray(lo, hi, act, np.asarray(labels), np.asarray(bounds))


def save_array(array: CamArray, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(array_to_document(array), fh)
        fh.write("\n")


def load_array(path) -> CamArray:
    with open(path, "r", encoding="utf-8") as fh:
        return array_from_document(json.load(fh))
