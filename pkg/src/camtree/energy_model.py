"""Energy, delay, and throughput accounting over operation counts.

All constants are behavioral and live in a calibration JSON, never in
code; the shipped defaults anchor raw processing of a 240x320 array
through a 24x48 tile at 3.77 uJ, with peripheral terms (precharge, sense,
matchline-state register) kept under ten percent of that total. Process
corners are plain multiplicative scales on energy.
"""

from __future__ import annotations

import dataclasses
import importlib.resources
import json
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

if TYPE_CHECKING:  # pragma: no cover
    from .tile_engine import OpCounts

__all__ = [
    "EnergyParams",
    "SimReport",
    "account",
    "gops_per_watt",
    "apply_corner",
    "default_params",
    "load_params",
    "params_from_document",
]

CORNERS = ("tt", "ff", "ss")


@dataclass(frozen=True)
class EnergyParams:
    """Per-event energy/delay constants plus process-corner scaling.

    Every evaluated matchline is precharged once per processed tile, so
    the precharge and sense terms both scale with matchlines_evaluated.
    """

    e_cell_pj: float
    e_precharge_pj: float
    e_senseamp_pj: float
    e_reg_bit_pj: float
    t_tile_ns: float
    corner: str = "tt"
    corner_scale: dict = field(default_factory=lambda: {"tt": 1.0, "ff": 0.85, "ss": 1.20})

    def __post_init__(self):
        for name in ("e_cell_pj", "e_precharge_pj", "e_senseamp_pj", "e_reg_bit_pj", "t_tile_ns"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.corner not in self.corner_scale:
            raise ValueError(f"unknown corner {self.corner!r}")
        if self.corner_scale.get("tt") != 1.0:
            raise ValueError("corner_scale['tt'] must be 1.0")

    @property
    def scale(self) -> float:
        return float(self.corner_scale[self.corner])


def account(op_counts: "OpCounts", params: EnergyParams) -> tuple[float, float]:
    """(energy uJ, delay us) for a set of operation counts.

    Linear in every count; skipped tiles contribute neither energy nor
    delay. Corner scaling applies to energy only.
    """
    energy_pj = params.scale * (
        op_counts.cells_energized * params.e_cell_pj
        + op_counts.matchlines_evaluated * params.e_precharge_pj
        + op_counts.matchlines_evaluated * params.e_senseamp_pj
        + op_counts.register_bits_accessed * params.e_reg_bit_pj
    )
    delay_us = op_counts.tiles_processed * params.t_tile_ns * 1e-3
    return energy_pj * 1e-6, delay_us


def gops_per_watt(h_large: int, w_large: int, delay_s: float, avg_power_w: float) -> float:
    """Throughput efficiency: (H*W / delay) / power, in giga-ops per watt.

    Counts nominal cell comparisons of the full logical array regardless
    of how many the strategy actually performed.
    """
    if delay_s <= 0:
        raise ValueError("delay must be > 0")
    if avg_power_w <= 0:
        raise ValueError("avg_power must be > 0")
    return (h_large * w_large / delay_s) / avg_power_w / 1e9


def apply_corner(params: EnergyParams, corner: str) -> EnergyParams:
    """Same constants with a different active process corner."""
    if corner not in CORNERS or corner not in params.corner_scale:
        raise ValueError(f"unknown corner {corner!r}")
    return dataclasses.replace(params, corner=corner)


# ---------------------------------------------------------------------------
# Calibration files
# ---------------------------------------------------------------------------

def params_from_document(doc: dict) -> EnergyParams:
    try:
        return EnergyParams(
            e_cell_pj=float(doc["e_cell_pj"]),
            e_precharge_pj=float(doc["e_precharge_pj"]),
            e_senseamp_pj=float(doc["e_senseamp_pj"]),
            e_reg_bit_pj=float(doc["e_reg_bit_pj"]),
            t_tile_ns=float(doc["t_tile_ns"]),
            corner=doc.get("corner", "tt"),
            corner_scale={k: float(v) for k, v in doc.get("corner_scale", {"tt": 1.0}).items()},
        )
    except KeyError as exc:
        raise ValueError(f"calibration document is missing field {exc}") from exc


def load_params(path) -> EnergyParams:
    with open(path, "r", encoding="utf-8") as fh:
        return params_from_document(json.load(fh))


def default_params() -> EnergyParams:
    """Shipped calibration (see data/default_calibration.json)."""
    text = importlib.resources.files("camtree").joinpath("data/default_calibration.json").read_text()
    return params_from_document(json.loads(text))


# ---------------------------------------------------------------------------
# Run reports
# ---------------------------------------------------------------------------

@dataclass
class SimReport:
    """Totals for one simulation run (all queries pooled).

    ``gops_per_w`` counts nominal comparisons (queries * rows * cols); for
    a single query it equals gops_per_watt(rows, cols, delay, power). A
    run whose every tile was skipped has zero energy and delay; its power
    is reported as 0 and its efficiency as +inf.
    """

    energy_uj: float
    delay_us: float
    avg_power_w: float
    gops_per_w: float
    op_counts: "OpCounts"
    matched_rows: list
    strategy: str
    n_rows: int
    n_cols: int
    tile_rows: int
    tile_cols: int
    n_queries: int
    lam: float | None = None

    def to_document(self) -> dict:
        return {
            "strategy": self.strategy,
            "n_rows": self.n_rows,
            "n_cols": self.n_cols,
            "tile_rows": self.tile_rows,
            "tile_cols": self.tile_cols,
            "n_queries": self.n_queries,
            "lambda": self.lam,
            "energy_uJ": self.energy_uj,
            "delay_us": self.delay_us,
            "avg_power_W": self.avg_power_w,
            "gops_per_W": self.gops_per_w,
            "op_counts": self.op_counts.to_document(),
            "matched_rows": self.matched_rows,
        }


def make_report(
    op_counts: "OpCounts",
    params: EnergyParams,
    *,
    matched_rows: list,
    strategy: str,
    n_rows: int,
    n_cols: int,
    tile_rows: int,
    tile_cols: int,
    n_queries: int,
    lam: float | None = None,
) -> SimReport:
    energy_uj, delay_us = account(op_counts, params)
    if delay_us > 0:
        avg_power_w = energy_uj / delay_us
        gops = gops_per_watt(n_rows * n_cols * n_queries, 1, delay_us * 1e-6, avg_power_w)
    else:
        avg_power_w = 0.0
        gops = math.inf
    return SimReport(
        energy_uj=energy_uj,
        delay_us=delay_us,
        avg_power_w=avg_power_w,
        gops_per_w=gops,
        op_counts=op_counts,
        matched_rows=matched_rows,
        strategy=strategy,
        n_rows=n_rows,
        n_cols=n_cols,
        tile_rows=tile_rows,
        tile_cols=tile_cols,
        n_queries=n_queries,
        lam=lam,
    )
