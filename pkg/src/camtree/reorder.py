"""Feature Reordering: the activity-sort baseline transformation.

Sorts columns by active-cell count descending left-to-right and rows
ascending top-to-bottom, which piles the active cells into the bottom-left
corner of the grid. The transform is a pure permutation: matched rows of
the reordered array map back one-to-one onto the original rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .array_compiler import CamArray

__all__ = ["Reordering", "feature_reorder", "map_back", "permute_queries"]


@dataclass(frozen=True)
class Reordering:
    """Permutations applied by feature_reorder; both map new -> original."""

    row_perm: tuple[int, ...]
    col_perm: tuple[int, ...]

    def __post_init__(self):
        for name, perm in (("row_perm", self.row_perm), ("col_perm", self.col_perm)):
            if sorted(perm) != list(range(len(perm))):
                raise ValueError(f"{name} is not a permutation")

    def to_document(self) -> dict:
        return {"row_perm": list(self.row_perm), "col_perm": list(self.col_perm)}


def feature_reorder(array: CamArray) -> tuple[CamArray, Reordering]:
    """Activity sort: most active column leftmost, most active row at the
    highest row index; ties keep original order."""
    col_counts = np.count_nonzero(array.active, axis=0)
    row_counts = np.count_nonzero(array.active, axis=1)
    col_perm = sorted(range(array.n_cols), key=lambda c: (-col_counts[c], c))
    row_perm = sorted(range(array.n_rows), key=lambda r: (row_counts[r], r))
    rp = np.asarray(row_perm)
    cp = np.asarray(col_perm)
    reordered = CamArray(
        array.lo[np.ix_(rp, cp)],
        array.hi[np.ix_(rp, cp)],
        array.active[np.ix_(rp, cp)],
        array.row_labels[rp],
        array.feature_bounds[cp],
    )
    return reordered, Reordering(tuple(row_perm), tuple(col_perm))


def map_back(rows, reordering: Reordering):
    """Translate row indices of the reordered array to original indices."""
    n = len(reordering.row_perm)
    out = []
    for r in rows:
        if not 0 <= r < n:
            raise IndexError(f"row index {r} out of range")
        out.append(reordering.row_perm[r])
    return set(out) if isinstance(rows, (set, frozenset)) else out


def permute_queries(queries, reordering: Reordering) -> np.ndarray:
    """Reorder query coordinates to the reordered array's column order."""
    q = np.atleast_2d(np.asarray(queries, dtype=float))
    return q[:, list(reordering.col_perm)]
