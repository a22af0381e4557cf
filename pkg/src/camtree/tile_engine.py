"""Tiled CAM processing under four strategies.

A logical array is streamed through a physical tile (row-groups outermost,
column-blocks left-to-right). Matchlines are monotone: once a row has seen
a mismatching active cell it can never match again, so aliveness-tracking
strategies stop spending energy on it. Strategies differ only in which
tiles they skip and which cells they energize:

             skip tile when            energizes
  raw        never                     every cell of every group row
  fr         tile is all don't-care    active cells of every group row
  mono       whole group is dead       every cell of still-alive rows
  monosparse either of the above       active cells of still-alive rows

All four return identical matched-row sets; the savings are pure
bookkeeping. Matchline state is kept in a per-group register (one bit per
row, read and rewritten on every processed tile).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .array_compiler import CamArray
from . import energy_model

__all__ = [
    "TileConfig",
    "Strategy",
    "MatchlineRegister",
    "OpCounts",
    "schedule",
    "simulate",
    "trace_energized",
]


@dataclass(frozen=True)
class TileConfig:
    tile_rows: int
    tile_cols: int

    def __post_init__(self):
        if self.tile_rows < 1 or self.tile_cols < 1:
            raise ValueError("tile dimensions must be >= 1")

    @classmethod
    def parse(cls, text: str) -> "TileConfig":
        """Parse the 'RxC' flag syntax."""
        try:
            r, c = text.lower().split("x")
            return cls(int(r), int(c))
        except (ValueError, AttributeError):
            raise ValueError(f"tile spec {text!r} is not of the form RxC") from None


class Strategy(Enum):
    RAW = "raw"
    FEATURE_REORDER = "fr"
    MONOTONIC_ONLY = "mono"
    MONO_SPARSE = "monosparse"

    @property
    def tracks_aliveness(self) -> bool:
        return self in (Strategy.MONOTONIC_ONLY, Strategy.MONO_SPARSE)

    @property
    def skips_dontcare(self) -> bool:
        return self in (Strategy.FEATURE_REORDER, Strategy.MONO_SPARSE)


class MatchlineRegister:
    """Aliveness bits for one row-group; bits only ever fall."""

    def __init__(self, n_rows: int):
        self.alive = np.ones(n_rows, dtype=bool)

    def kill(self, dead_mask: np.ndarray) -> None:
        self.alive &= ~dead_mask

    @property
    def any_alive(self) -> bool:
        return bool(self.alive.any())


@dataclass
class OpCounts:
    cells_energized: int = 0
    matchlines_evaluated: int = 0
    tiles_processed: int = 0
    tiles_skipped: int = 0
    register_bits_accessed: int = 0

    def __add__(self, other: "OpCounts") -> "OpCounts":
        return OpCounts(
            self.cells_energized + other.cells_energized,
            self.matchlines_evaluated + other.matchlines_evaluated,
            self.tiles_processed + other.tiles_processed,
            self.tiles_skipped + other.tiles_skipped,
            self.register_bits_accessed + other.register_bits_accessed,
        )

    def to_document(self) -> dict:
        return {
            "cells_energized": self.cells_energized,
            "matchlines_evaluated": self.matchlines_evaluated,
            "tiles_processed": self.tiles_processed,
            "tiles_skipped": self.tiles_skipped,
            "register_bits_accessed": self.register_bits_accessed,
        }


def schedule(n_rows: int, n_cols: int, tiles: TileConfig) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Tile visit order: row-groups outermost, column-blocks left-to-right.
    Edge tiles are truncated to the array, never padded."""
    if n_rows < 1 or n_cols < 1:
        raise ValueError("array dimensions must be >= 1")
    out = []
    for r0 in range(0, n_rows, tiles.tile_rows):
        r1 = min(r0 + tiles.tile_rows, n_rows)
        for c0 in range(0, n_cols, tiles.tile_cols):
            out.append(((r0, r1), (c0, min(c0 + tiles.tile_cols, n_cols))))
    return out


def _column_blocks(n_cols: int, tile_cols: int) -> list[tuple[int, int]]:
    return [(c0, min(c0 + tile_cols, n_cols)) for c0 in range(0, n_cols, tile_cols)]


def _run_query(
    array: CamArray,
    query: np.ndarray,
    blocks: list[tuple[int, int]],
    tile_rows: int,
    strategy: Strategy,
    tile_active_count: np.ndarray,  # (groups, blocks) precomputed
    counts: OpCounts,
    trace: np.ndarray | None = None,
) -> np.ndarray:
    """Process one query; returns the boolean matched-row vector."""
    # A cell blocks its row iff it is active and the query falls outside it.
    mismatch = array.active & ~((array.lo < query) & (query <= array.hi))
    matched = np.zeros(array.n_rows, dtype=bool)

    for g, r0 in enumerate(range(0, array.n_rows, tile_rows)):
        r1 = min(r0 + tile_rows, array.n_rows)
        group_size = r1 - r0
        reg = MatchlineRegister(group_size)
        for b, (c0, c1) in enumerate(blocks):
            if strategy.skips_dontcare and tile_active_count[g, b] == 0:
                counts.tiles_skipped += 1
                continue
            if strategy.tracks_aliveness and not reg.any_alive:
                counts.tiles_skipped += 1
                continue

            counts.tiles_processed += 1
            # Matchline-state cache: one read + one write per group row.
            counts.register_bits_accessed += 2 * group_size

            considered = reg.alive if strategy.tracks_aliveness else np.ones(group_size, dtype=bool)
            n_considered = int(np.count_nonzero(considered)) if strategy.tracks_aliveness else group_size
            counts.matchlines_evaluated += n_considered

            act = array.active[r0:r1, c0:c1]
            if strategy is Strategy.RAW:
                counts.cells_energized += group_size * (c1 - c0)
            elif strategy is Strategy.FEATURE_REORDER:
                counts.cells_energized += int(tile_active_count[g, b])
            elif strategy is Strategy.MONOTONIC_ONLY:
                counts.cells_energized += n_considered * (c1 - c0)
            else:  # MONO_SPARSE
                counts.cells_energized += int(np.count_nonzero(act[considered]))

            if trace is not None:
                block = trace[r0:r1, c0:c1]
                if strategy in (Strategy.RAW, Strategy.MONOTONIC_ONLY):
                    block[considered, :] = True
                else:
                    block |= act & considered[:, None]

            # A considered row dies on its first mismatching active cell.
            row_mismatch = mismatch[r0:r1, c0:c1].any(axis=1)
            reg.kill(considered & row_mismatch)

        matched[r0:r1] = reg.alive
    return matched


def simulate(
    array: CamArray,
    tiles: TileConfig,
    queries,
    strategy: Strategy,
    params: "energy_model.EnergyParams",
    lam: float | None = None,
) -> "energy_model.SimReport":
    """Stream an array through the tile under one strategy.

    Queries must already be in the array's column order (reorder the
    coordinates with the Reordering when simulating a feature-reordered
    array). Returns the energy/delay report with per-query matched rows.
    """
    q = np.atleast_2d(np.asarray(queries, dtype=float))
    if q.size == 0:
        raise ValueError("query list must be non-empty")
    if q.shape[1] != array.n_cols:
        raise ValueError(f"queries have {q.shape[1]} coordinates, expected {array.n_cols}")

    blocks = _column_blocks(array.n_cols, tiles.tile_cols)
    groups = range(0, array.n_rows, tiles.tile_rows)
    tile_active_count = np.array(
        [
            [np.count_nonzero(array.active[r0 : r0 + tiles.tile_rows, c0:c1]) for (c0, c1) in blocks]
            for r0 in groups
        ]
    )

    counts = OpCounts()
    matched: list[list[int]] = []
    for row in q:
        ok = _run_query(array, row, blocks, tiles.tile_rows, strategy, tile_active_count, counts)
        matched.append([int(i) for i in np.flatnonzero(ok)])

    return energy_model.make_report(
        counts,
        params,
        matched_rows=matched,
        strategy=strategy.value,
        n_rows=array.n_rows,
        n_cols=array.n_cols,
        tile_rows=tiles.tile_rows,
        tile_cols=tiles.tile_cols,
        n_queries=q.shape[0],
        lam=lam,
    )


def trace_energized(
    array: CamArray, tiles: TileConfig, query, strategy: Strategy
) -> np.ndarray:
    """Boolean mask of cells energized for a single query (for grid plots;
    the mask's count equals the run's cells_energized)."""
    q = np.asarray(query, dtype=float)
    if q.shape != (array.n_cols,):
        raise ValueError(f"query has shape {q.shape}, expected ({array.n_cols},)")
    blocks = _column_blocks(array.n_cols, tiles.tile_cols)
    groups = range(0, array.n_rows, tiles.tile_rows)
    tile_active_count = np.array(
        [
            [np.count_nonzero(array.active[r0 : r0 + tiles.tile_rows, c0:c1]) for (c0, c1) in blocks]
            for r0 in groups
        ]
    )
    trace = np.zeros((array.n_rows, array.n_cols), dtype=bool)
    _run_query(array, q, blocks, tiles.tile_rows, strategy, tile_active_count, OpCounts(), trace)
    return trace
