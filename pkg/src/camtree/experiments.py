"""Experiment harness: sweeps, corners, scalability, datasets, balance study.

Each experiment produces one or more tables in a fixed CSV schema plus SVG
figures, and re-checks the qualitative cross-strategy invariants (work
dominance, flat raw energy, per-corner ordering) while it runs. A
violation raises InvariantViolation, which the CLI turns into a nonzero
exit. Runs are deterministic functions of (spec, seeds, calibration).
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.special import stdtr

from .array_compiler import (
    CamArray,
    classify,
    compile_tree,
    normalize_queries,
    quantize,
    sparsity,
    unit_bounds,
)
from .energy_model import EnergyParams, SimReport, apply_corner, default_params, load_params
from .reorder import feature_reorder, map_back, permute_queries
from .synthetic_gen import SparsitySpec, generate
from .tile_engine import Strategy, TileConfig, simulate, trace_energized
from .tree_model import TreeModel, balance, load_tree, predict, random_tree

__all__ = [
    "ExperimentSpec",
    "ExperimentResult",
    "FitResult",
    "InvariantViolation",
    "CSV_HEADER",
    "run_strategies",
    "sweep_sparsity",
    "corner_analysis",
    "scalability",
    "tile_orientation",
    "dataset_eval",
    "balance_correlation",
    "pearson",
    "fit_curve",
    "emit_report",
    "write_csv",
    "read_csv",
    "grid_heatmap_figure",
    "run_experiment",
]

ALL_STRATEGIES = (Strategy.RAW, Strategy.FEATURE_REORDER, Strategy.MONOTONIC_ONLY, Strategy.MONO_SPARSE)
DEFAULT_LAMBDAS = tuple(round(0.1 * i, 1) for i in range(1, 10))
DATASET_TILES = {"iris": (2, 2), "breast_cancer": (5, 4), "digits": (8, 16)}


class InvariantViolation(RuntimeError):
    """A cross-strategy invariant failed during an experiment run."""


# ---------------------------------------------------------------------------
# Specs and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentSpec:
    kind: str  # sweep | corner | scale | tiles | datasets | balance
    rows: int = 240
    cols: int = 320
    tile_rows: int = 24
    tile_cols: int = 48
    lambdas: tuple = DEFAULT_LAMBDAS
    seeds: tuple = (0, 1, 2)
    n_queries: int = 1
    strategies: tuple = ALL_STRATEGIES
    sizes: tuple = ((160, 120), (320, 240), (480, 360), (640, 480))
    corners: tuple = ("tt", "ff", "ss")
    corner_lambda: float = 0.7
    models_dir: str | None = None
    datasets: tuple = ("iris", "breast_cancer", "digits")
    corpus_dir: str | None = None
    n_trees: int = 500
    max_depth: int = 10
    n_features: int = 5
    quant_levels: int = 256
    calibration: str | None = None
    output_dir: str = "reports"
    threads: int = 1

    def __post_init__(self):
        if self.kind not in ("sweep", "corner", "scale", "tiles", "datasets", "balance"):
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if len(self.seeds) < 1:
            raise ValueError("need at least one seed")
        if self.kind in ("sweep",) and not self.lambdas:
            raise ValueError("lambda list must be non-empty")
        if self.kind == "scale" and len(self.sizes) < 4:
            raise ValueError("scalability needs at least 4 sizes")

    @classmethod
    def from_document(cls, doc: dict) -> "ExperimentSpec":
        known = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown experiment spec fields: {sorted(unknown)}")
        doc = dict(doc)
        if "seeds" in doc and isinstance(doc["seeds"], int):
            doc["seeds"] = tuple(range(doc["seeds"]))
        for key in ("lambdas", "seeds", "datasets", "corners"):
            if key in doc:
                doc[key] = tuple(doc[key])
        if "sizes" in doc:
            doc["sizes"] = tuple((int(r), int(c)) for r, c in doc["sizes"])
        if "strategies" in doc:
            doc["strategies"] = tuple(Strategy(s) for s in doc["strategies"])
        return cls(**doc)

    def params(self) -> EnergyParams:
        return load_params(self.calibration) if self.calibration else default_params()


@dataclass(frozen=True)
class FitResult:
    model: str  # "linear" | "quadratic"
    coefficients: tuple
    r_squared: float


@dataclass
class ExperimentResult:
    tables: dict = field(default_factory=dict)  # name -> (header, rows)
    figures: dict = field(default_factory=dict)  # name -> matplotlib Figure
    values: dict = field(default_factory=dict)  # scalar summaries


# ---------------------------------------------------------------------------
# CSV schema
# ---------------------------------------------------------------------------

CSV_HEADER = [
    "experiment", "strategy", "corner", "lambda", "rows", "cols", "tile_rows",
    "tile_cols", "seed", "queries", "energy_uJ", "delay_us", "avg_power_W",
    "gops_per_W", "cells_energized", "tiles_processed", "tiles_skipped",
    "accuracy", "sparsity",
]
_INT_COLS = {"rows", "cols", "tile_rows", "tile_cols", "seed", "queries",
             "cells_energized", "tiles_processed", "tiles_skipped"}
_FLOAT_COLS = {"lambda", "energy_uJ", "delay_us", "avg_power_W", "gops_per_W",
               "accuracy", "sparsity"}

BALANCE_HEADER = ["tree", "seed", "balance_bias", "max_depth", "nodes", "leaves", "balance", "sparsity"]
_BALANCE_INT = {"tree", "seed", "max_depth", "nodes", "leaves", "balance"}
_BALANCE_FLOAT = {"balance_bias", "sparsity"}

FITS_HEADER = ["strategy", "model", "a", "b", "c", "r_squared"]
_FITS_FLOAT = {"a", "b", "c", "r_squared"}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, rows: list[dict], header: list[str] = CSV_HEADER) -> None:
    """Write a table; float cells use repr so re-parsing is lossless."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row.get(col)) for col in header])


def read_csv(path) -> list[dict]:
    """Read a table written by write_csv back into typed rows."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if "energy_uJ" in header:
            int_cols, float_cols = _INT_COLS, _FLOAT_COLS
        elif "r_squared" in header:
            int_cols, float_cols = set(), _FITS_FLOAT
        else:
            int_cols, float_cols = _BALANCE_INT, _BALANCE_FLOAT
        out = []
        for record in reader:
            row: dict = {}
            for col, text in zip(header, record):
                if text == "":
                    row[col] = None
                elif col in int_cols:
                    row[col] = int(text)
                elif col in float_cols:
                    row[col] = float(text)
                else:
                    row[col] = text
            out.append(row)
        return out


def _report_row(experiment: str, report: SimReport, *, corner: str = "tt", seed=None,
                accuracy=None, sparsity_value=None) -> dict:
    return {
        "experiment": experiment,
        "strategy": report.strategy,
        "corner": corner,
        "lambda": report.lam,
        "rows": report.n_rows,
        "cols": report.n_cols,
        "tile_rows": report.tile_rows,
        "tile_cols": report.tile_cols,
        "seed": seed,
        "queries": report.n_queries,
        "energy_uJ": report.energy_uj,
        "delay_us": report.delay_us,
        "avg_power_W": report.avg_power_w,
        "gops_per_W": report.gops_per_w,
        "cells_energized": report.op_counts.cells_energized,
        "tiles_processed": report.op_counts.tiles_processed,
        "tiles_skipped": report.op_counts.tiles_skipped,
        "accuracy": accuracy,
        "sparsity": sparsity_value,
    }


# ---------------------------------------------------------------------------
# Shared run machinery
# ---------------------------------------------------------------------------

def _sweep_queries(seed: int, n_queries: int, n_cols: int) -> np.ndarray:
    return np.random.default_rng([seed, 7919]).random((n_queries, n_cols))


def _map_jobs(fn, jobs, threads: int) -> list:
    """Evaluate fn over argument tuples, optionally on a thread pool.
    Results come back in job order either way, so output stays stable."""
    if threads <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def run_strategies(
    array: CamArray,
    tiles: TileConfig,
    queries,
    params: EnergyParams,
    strategies=ALL_STRATEGIES,
    lam: float | None = None,
) -> dict[Strategy, SimReport]:
    """Run several strategies on one array/query batch and enforce the
    equivalence and dominance invariants. Feature reordering is applied
    here; matched rows in every returned report use original row indices."""
    reports: dict[Strategy, SimReport] = {}
    for strategy in strategies:
        if strategy is Strategy.FEATURE_REORDER:
            reordered, ro = feature_reorder(array)
            rep = simulate(reordered, tiles, permute_queries(queries, ro), strategy, params, lam=lam)
            rep.matched_rows = [sorted(map_back(m, ro)) for m in rep.matched_rows]
        else:
            rep = simulate(array, tiles, queries, strategy, params, lam=lam)
        reports[strategy] = rep

    baseline = next(iter(reports.values())).matched_rows
    for strategy, rep in reports.items():
        if rep.matched_rows != baseline:
            raise InvariantViolation(f"matched rows differ between strategies ({strategy.value})")
    _check_dominance(reports)
    return reports


def _check_dominance(reports: dict[Strategy, SimReport]) -> None:
    """Per-run dominance. Cells dominate along every chain because each
    strategy energizes a subset of the same cell multiset. Energy also
    dominates wherever two strategies walk the same layout (monosparse vs
    mono vs raw, and fr vs raw); monosparse-vs-fr energy is only a
    statistical ordering, since fr runs on its own reordered layout and
    can process fewer tiles when active cells cluster well."""

    def cells(s):
        return reports[s].op_counts.cells_energized if s in reports else None

    def energy(s):
        return reports[s].energy_uj if s in reports else None

    ms, fr, mono, raw = (cells(s) for s in (Strategy.MONO_SPARSE, Strategy.FEATURE_REORDER,
                                            Strategy.MONOTONIC_ONLY, Strategy.RAW))
    for low, high in [(ms, fr), (ms, mono), (fr, raw), (mono, raw)]:
        if low is not None and high is not None and low > high:
            raise InvariantViolation("cells_energized dominance violated")
    ems, efr, emono, eraw = (energy(s) for s in (Strategy.MONO_SPARSE, Strategy.FEATURE_REORDER,
                                                 Strategy.MONOTONIC_ONLY, Strategy.RAW))
    for low, high in [(ems, emono), (emono, eraw), (efr, eraw)]:
        if low is not None and high is not None and low > high + 1e-12:
            raise InvariantViolation("energy dominance violated")


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def sweep_sparsity(spec: ExperimentSpec, params: EnergyParams | None = None) -> ExperimentResult:
    """Energy/delay/GOPS-per-watt versus sparsity (one table row per
    lambda and strategy, averaged over the spec's seeds)."""
    params = params or spec.params()
    tiles = TileConfig(spec.tile_rows, spec.tile_cols)
    run_rows: list[dict] = []
    mean_rows: list[dict] = []
    raw_counts_by_seed: dict[int, object] = {}

    def cell(lam, seed):
        array = generate(SparsitySpec(lam, 0.0, seed, spec.rows, spec.cols))
        queries = _sweep_queries(seed, spec.n_queries, spec.cols)
        return run_strategies(array, tiles, queries, params, spec.strategies, lam=lam)

    jobs = [(lam, seed) for lam in spec.lambdas for seed in spec.seeds]
    per_cell: dict[Strategy, dict[float, list[SimReport]]] = {s: {} for s in spec.strategies}
    for (lam, seed), reports in zip(jobs, _map_jobs(cell, jobs, spec.threads)):
        for strategy, rep in reports.items():
            per_cell[strategy].setdefault(lam, []).append(rep)
            run_rows.append(_report_row("sweep", rep, seed=seed))
        if Strategy.RAW in reports:
            counts = reports[Strategy.RAW].op_counts
            before = raw_counts_by_seed.setdefault(seed, counts)
            if before != counts:
                raise InvariantViolation("raw OpCounts changed with lambda")

    ms_by_lam, fr_by_lam = {}, {}
    for strategy in spec.strategies:
        for lam in spec.lambdas:
            reps = per_cell[strategy][lam]
            mean_rows.append({
                "experiment": "sweep", "strategy": strategy.value, "corner": params.corner,
                "lambda": lam, "rows": spec.rows, "cols": spec.cols,
                "tile_rows": spec.tile_rows, "tile_cols": spec.tile_cols,
                "seed": None, "queries": spec.n_queries,
                "energy_uJ": float(np.mean([r.energy_uj for r in reps])),
                "delay_us": float(np.mean([r.delay_us for r in reps])),
                "avg_power_W": float(np.mean([r.avg_power_w for r in reps])),
                "gops_per_W": float(np.mean([r.gops_per_w for r in reps])),
                "cells_energized": int(np.mean([r.op_counts.cells_energized for r in reps])),
                "tiles_processed": int(np.mean([r.op_counts.tiles_processed for r in reps])),
                "tiles_skipped": int(np.mean([r.op_counts.tiles_skipped for r in reps])),
                "accuracy": None,
                "sparsity": None,
            })
            if strategy is Strategy.MONO_SPARSE:
                ms_by_lam[lam] = mean_rows[-1]["energy_uJ"]
            if strategy is Strategy.FEATURE_REORDER:
                fr_by_lam[lam] = mean_rows[-1]["energy_uJ"]

    if Strategy.MONO_SPARSE in spec.strategies:
        for lam in spec.lambdas:
            others = [row["energy_uJ"] for row in mean_rows
                      if row["lambda"] == lam and row["strategy"] != Strategy.MONO_SPARSE.value]
            if others and ms_by_lam[lam] > min(others) + 1e-12:
                raise InvariantViolation(f"monosparse is not lowest-energy at lambda={lam}")

    result = ExperimentResult(
        tables={"sweep_sparsity": (CSV_HEADER, mean_rows), "sweep_sparsity_runs": (CSV_HEADER, run_rows)},
        values={"ms_energy_by_lambda": ms_by_lam, "fr_energy_by_lambda": fr_by_lam},
    )
    result.figures["energy_vs_lambda"] = _line_figure(
        mean_rows, x="lambda", y="energy_uJ", title="Energy vs sparsity control",
        xlabel="sparsity control", ylabel="energy (uJ)", logy=True)
    result.figures["gops_vs_lambda"] = _line_figure(
        mean_rows, x="lambda", y="gops_per_W", title="Efficiency vs sparsity control",
        xlabel="sparsity control", ylabel="GOPS/W")
    result.figures["delay_vs_lambda"] = _line_figure(
        mean_rows, x="lambda", y="delay_us", title="Delay vs sparsity control",
        xlabel="sparsity control", ylabel="delay (us)")
    return result


def corner_analysis(spec: ExperimentSpec, params: EnergyParams | None = None) -> ExperimentResult:
    """Per-corner energy for each strategy at one sparsity level."""
    params = params or spec.params()
    tiles = TileConfig(spec.tile_rows, spec.tile_cols)
    rows: list[dict] = []
    energies: dict[str, dict[Strategy, float]] = {}
    for corner in spec.corners:
        corner_params = apply_corner(params, corner)
        sums: dict[Strategy, list[float]] = {s: [] for s in spec.strategies}
        for seed in spec.seeds:
            array = generate(SparsitySpec(spec.corner_lambda, 0.0, seed, spec.rows, spec.cols))
            queries = _sweep_queries(seed, spec.n_queries, spec.cols)
            reports = run_strategies(array, tiles, queries, corner_params, spec.strategies, lam=spec.corner_lambda)
            for strategy, rep in reports.items():
                sums[strategy].append(rep.energy_uj)
        energies[corner] = {s: float(np.mean(v)) for s, v in sums.items()}
        for strategy in spec.strategies:
            rows.append({
                "experiment": "corner", "strategy": strategy.value, "corner": corner,
                "lambda": spec.corner_lambda, "rows": spec.rows, "cols": spec.cols,
                "tile_rows": spec.tile_rows, "tile_cols": spec.tile_cols, "seed": None,
                "queries": spec.n_queries, "energy_uJ": energies[corner][strategy],
                "delay_us": None, "avg_power_W": None, "gops_per_W": None,
                "cells_energized": None, "tiles_processed": None, "tiles_skipped": None,
                "accuracy": None, "sparsity": None,
            })
        if Strategy.MONO_SPARSE in spec.strategies:
            ms = energies[corner][Strategy.MONO_SPARSE]
            if any(ms > e + 1e-12 for s, e in energies[corner].items() if s is not Strategy.MONO_SPARSE):
                raise InvariantViolation(f"monosparse is not lowest-energy in corner {corner}")

    # Corner scaling is a common factor, so cross-strategy ratios must agree.
    if "tt" in energies:
        for corner in spec.corners:
            for strategy in spec.strategies:
                if strategy is Strategy.RAW or Strategy.RAW not in spec.strategies:
                    continue
                ratio = energies[corner][strategy] / energies[corner][Strategy.RAW]
                ratio_tt = energies["tt"][strategy] / energies["tt"][Strategy.RAW]
                if abs(ratio - ratio_tt) > 1e-9 * abs(ratio_tt):
                    raise InvariantViolation("cross-strategy ratio changed with corner")

    result = ExperimentResult(tables={"corner_analysis": (CSV_HEADER, rows)}, values={"energies": energies})
    result.figures["energy_by_corner"] = _bar_figure(rows, group="corner", y="energy_uJ",
                                                     title="Energy by process corner", ylabel="energy (uJ)")
    return result


def scalability(spec: ExperimentSpec, params: EnergyParams | None = None) -> ExperimentResult:
    """Energy versus array size at fixed sparsity, with least-squares fits
    of energy against total cell count."""
    params = params or spec.params()
    tiles = TileConfig(spec.tile_rows, spec.tile_cols)
    rows: list[dict] = []
    energy_by_strategy: dict[Strategy, list[float]] = {s: [] for s in spec.strategies}
    cell_counts = [r * c for r, c in spec.sizes]

    for (n_rows, n_cols) in spec.sizes:
        sums: dict[Strategy, list[float]] = {s: [] for s in spec.strategies}
        for seed in spec.seeds:
            array = generate(SparsitySpec(spec.corner_lambda, 0.0, seed, n_rows, n_cols))
            queries = _sweep_queries(seed, spec.n_queries, n_cols)
            reports = run_strategies(array, tiles, queries, params, spec.strategies, lam=spec.corner_lambda)
            for strategy, rep in reports.items():
                sums[strategy].append(rep.energy_uj)
                rows.append(_report_row("scale", rep, seed=seed))
        for strategy in spec.strategies:
            energy_by_strategy[strategy].append(float(np.mean(sums[strategy])))

    # Three fit views per strategy: linear in total cells (raw's law),
    # quadratic in the linear dimension, and linear in the dimension
    # (monosparse energy scales with the row count, i.e. with sqrt(cells)).
    dims = [math.sqrt(n) for n in cell_counts]
    fits: dict[str, dict[str, FitResult]] = {}
    fit_rows: list[dict] = []
    for strategy in spec.strategies:
        energies = energy_by_strategy[strategy]
        fits[strategy.value] = {
            "linear_cells": fit_curve(cell_counts, energies, model="linear"),
            "quad_dim": fit_curve(cell_counts, energies, model="quadratic"),
            "linear_dim": fit_curve(dims, energies, model="linear"),
        }
        for model_name, fit in fits[strategy.value].items():
            coef = fit.coefficients + (None,) * (3 - len(fit.coefficients))
            fit_rows.append({
                "strategy": strategy.value, "model": model_name,
                "a": coef[0], "b": coef[1], "c": coef[2], "r_squared": fit.r_squared,
            })

    gains = None
    if Strategy.RAW in spec.strategies and Strategy.MONO_SPARSE in spec.strategies:
        raw_curve = energy_by_strategy[Strategy.RAW]
        ms_curve = energy_by_strategy[Strategy.MONO_SPARSE]
        gains = [r / m for r, m in zip(raw_curve, ms_curve)]
        if any(gains[i] > gains[i + 1] + 1e-9 for i in range(len(gains) - 1)):
            raise InvariantViolation("raw/monosparse gain decreased with array size")

    result = ExperimentResult(
        tables={"scalability": (CSV_HEADER, rows), "scalability_fits": (FITS_HEADER, fit_rows)},
        values={"fits": fits, "gains": gains, "cell_counts": cell_counts,
                "energy_by_strategy": {s.value: e for s, e in energy_by_strategy.items()}},
    )
    result.figures["energy_vs_size"] = _scaling_figure(cell_counts, energy_by_strategy, fits)
    return result


def tile_orientation(spec: ExperimentSpec, params: EnergyParams | None = None) -> ExperimentResult:
    """Fixed-area tile orientation study: the spec tile versus its
    transpose. Narrower column blocks detect mismatches earlier."""
    params = params or spec.params()
    rows: list[dict] = []
    mean_cells: dict[tuple[int, int], float] = {}
    lam = spec.corner_lambda
    for (tr, tc) in ((spec.tile_rows, spec.tile_cols), (spec.tile_cols, spec.tile_rows)):
        tiles = TileConfig(tr, tc)
        cells = []
        for seed in spec.seeds:
            array = generate(SparsitySpec(lam, 0.0, seed, spec.rows, spec.cols))
            queries = _sweep_queries(seed, spec.n_queries, spec.cols)
            reports = run_strategies(array, tiles, queries, params, spec.strategies, lam=lam)
            for strategy, rep in reports.items():
                rows.append(_report_row("tiles", rep, seed=seed))
                if strategy is Strategy.MONO_SPARSE:
                    cells.append(rep.op_counts.cells_energized)
        if cells:
            mean_cells[(tr, tc)] = float(np.mean(cells))
    result = ExperimentResult(tables={"tile_orientation": (CSV_HEADER, rows)},
                              values={"mean_cells_energized": mean_cells})
    result.figures["cells_by_tile"] = _bar_figure(
        [r for r in rows if r["strategy"] == Strategy.MONO_SPARSE.value],
        group=None, y="cells_energized", title="Energized cells by tile shape",
        ylabel="cells energized", label_cols=("tile_rows", "tile_cols"))
    return result


def dataset_eval(spec: ExperimentSpec, params: EnergyParams | None = None) -> ExperimentResult:
    """Compile, quantize, and simulate exported dataset trees; report
    held-out accuracy, array sparsity, and per-strategy energy."""
    params = params or spec.params()
    if not spec.models_dir:
        raise ValueError("dataset evaluation needs models_dir")
    rows: list[dict] = []
    summary: dict[str, dict] = {}
    for name in spec.datasets:
        paths = {kind: os.path.join(spec.models_dir, f"{name}_{kind}.json")
                 for kind in ("tree", "split", "metrics")}
        for path in paths.values():
            if not os.path.exists(path):
                raise FileNotFoundError(f"missing model file: {path}")
        model = load_tree(paths["tree"])
        with open(paths["split"], "r", encoding="utf-8") as fh:
            split = json.load(fh)
        with open(paths["metrics"], "r", encoding="utf-8") as fh:
            metrics = json.load(fh)

        bounds = np.asarray(metrics["feature_bounds"], dtype=float)
        array = compile_tree(model, bounds)
        quantized = quantize(array, spec.quant_levels)
        samples = np.asarray(split["samples"], dtype=float)
        labels = np.asarray(split["labels"], dtype=int)
        queries = normalize_queries(samples, bounds, clip=True)

        predicted = [classify(quantized, q) for q in queries]
        accuracy = float(np.mean([p == t for p, t in zip(predicted, labels)]))
        spar = sparsity(array)
        tr, tc = DATASET_TILES.get(name, (spec.tile_rows, spec.tile_cols))
        reports = run_strategies(quantized, TileConfig(tr, tc), queries, params, spec.strategies)
        for strategy, rep in reports.items():
            rows.append(_report_row(f"datasets:{name}", rep, seed=metrics.get("seed"),
                                    accuracy=accuracy, sparsity_value=spar))
        summary[name] = {
            "accuracy": accuracy,
            "sparsity": spar,
            "n_rows": array.n_rows,
            "n_cols": array.n_cols,
            "exporter_test_accuracy": metrics.get("test_accuracy"),
        }

    result = ExperimentResult(tables={"dataset_eval": (CSV_HEADER, rows)}, values={"summary": summary})
    result.figures["dataset_energy"] = _bar_figure(rows, group="experiment", y="energy_uJ",
                                                   title="Dataset acceleration cost", ylabel="energy (uJ)", logy=True)
    return result


def balance_correlation(spec: ExperimentSpec) -> ExperimentResult:
    """Pearson correlation between tree balance and compiled-array
    sparsity over a corpus of trees (generated or loaded from disk)."""
    rows: list[dict] = []
    balances: list[float] = []
    sparsities: list[float] = []
    if spec.corpus_dir:
        paths = sorted(
            os.path.join(spec.corpus_dir, p) for p in os.listdir(spec.corpus_dir) if p.endswith(".json")
        )
        if len(paths) < 30:
            raise ValueError(f"corpus too small: {len(paths)} trees (need >= 30)")
        for i, path in enumerate(paths):
            model = load_tree(path)
            _append_balance_row(rows, balances, sparsities, model, i, seed=None, bias=None)
    else:
        if spec.n_trees < 30:
            raise ValueError(f"corpus too small: {spec.n_trees} trees (need >= 30)")
        base = spec.seeds[0]
        bias_rng = np.random.default_rng([base, 4242])
        for i in range(spec.n_trees):
            bias = float(bias_rng.random())
            seed = base * 1_000_000 + i
            model = random_tree(spec.n_features, spec.max_depth, bias, seed=seed)
            _append_balance_row(rows, balances, sparsities, model, i, seed=seed, bias=bias)

    r, p = pearson(balances, sparsities)
    result = ExperimentResult(
        tables={"balance_correlation": (BALANCE_HEADER, rows)},
        values={"r": r, "p": p, "n": len(rows)},
    )
    result.figures["balance_vs_sparsity"] = _scatter_figure(
        balances, sparsities, title=f"Balance vs sparsity (r={r:.3f}, p={p:.2e})",
        xlabel="|left - right| node count", ylabel="array sparsity")
    return result


def _append_balance_row(rows, balances, sparsities, model: TreeModel, index: int, seed, bias) -> None:
    array = compile_tree(model, unit_bounds(model.n_features))
    b = balance(model)
    s = sparsity(array)
    balances.append(float(b))
    sparsities.append(s)
    rows.append({
        "tree": index, "seed": seed, "balance_bias": bias,
        "max_depth": model.metadata.get("max_depth"), "nodes": len(model.nodes),
        "leaves": model.n_leaves, "balance": b, "sparsity": s,
    })


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

def pearson(x, y) -> tuple[float, float]:
    """Product-moment correlation with a two-sided p-value from the
    t-distribution with n-2 degrees of freedom."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("x and y must have equal length")
    n = x.size
    if n < 3:
        raise ValueError("need at least 3 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("zero variance input")
    r = float(np.dot(dx, dy) / math.sqrt(sxx * syy))
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * float(stdtr(n - 2, -abs(t)))
    return r, p


def fit_curve(x, y, model: str = "linear") -> FitResult:
    """Least-squares fit of y against x.

    "linear" fits a + b*x; "quadratic" is quadratic in the linear
    dimension sqrt(x): a + b*sqrt(x) + c*x.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 3:
        raise ValueError("need at least 3 (x, y) points")
    if model == "linear":
        design = np.column_stack([np.ones_like(x), x])
    elif model == "quadratic":
        design = np.column_stack([np.ones_like(x), np.sqrt(x), x])
    else:
        raise ValueError(f"unknown fit model {model!r}")
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise ValueError("degenerate design matrix")
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    residuals = y - design @ coef
    ss_res = float(np.dot(residuals, residuals))
    ss_tot = float(np.dot(y - y.mean(), y - y.mean()))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res < 1e-24 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return FitResult(model=model, coefficients=tuple(float(c) for c in coef), r_squared=r2)


# ---------------------------------------------------------------------------
# Figures
# ---------------------------------------------------------------------------

def _new_figure(figsize):
    """A Figure outside the pyplot registry, with deterministic SVG ids."""
    import matplotlib
    from matplotlib.figure import Figure

    matplotlib.rcParams["svg.hashsalt"] = "camtree"
    fig = Figure(figsize=figsize)
    return fig, fig.add_subplot()


def _line_figure(rows, *, x, y, title, xlabel, ylabel, logy=False):
    fig, ax = _new_figure((5, 3.5))
    strategies = sorted({r["strategy"] for r in rows})
    for name in strategies:
        pts = sorted((r[x], r[y]) for r in rows if r["strategy"] == name and r[y] is not None)
        if pts:
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=name)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def _bar_figure(rows, *, group, y, title, ylabel, logy=False, label_cols=None):
    fig, ax = _new_figure((5.5, 3.5))
    labels, values = [], []
    for r in rows:
        if r.get(y) is None:
            continue
        if label_cols:
            key = "x".join(str(r[c]) for c in label_cols) + f" s{r.get('seed')}"
        else:
            key = f"{r.get(group, '')}/{r['strategy']}"
        labels.append(key)
        values.append(r[y])
    ax.bar(range(len(values)), values)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=6)
    if logy:
        ax.set_yscale("log")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    fig.tight_layout()
    return fig


def _scatter_figure(x, y, *, title, xlabel, ylabel):
    fig, ax = _new_figure((5, 3.5))
    ax.scatter(x, y, s=6, alpha=0.5)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    fig.tight_layout()
    return fig


def _scaling_figure(cell_counts, energy_by_strategy, fits):
    fig, ax = _new_figure((5, 3.5))
    xs = np.linspace(min(cell_counts), max(cell_counts), 50)
    for strategy, energies in energy_by_strategy.items():
        line, = ax.plot(cell_counts, energies, marker="o", label=strategy.value)
        variants = fits.get(strategy.value, {})
        fit = max(variants.values(), key=lambda f: f.r_squared, default=None)
        if fit is variants.get("linear_cells"):
            a, b = fit.coefficients
            ax.plot(xs, a + b * xs, linestyle=":", color=line.get_color())
        elif fit is variants.get("quad_dim"):
            a, b, c = fit.coefficients
            ax.plot(xs, a + b * np.sqrt(xs) + c * xs, linestyle=":", color=line.get_color())
        elif fit is variants.get("linear_dim"):
            a, b = fit.coefficients
            ax.plot(xs, a + b * np.sqrt(xs), linestyle=":", color=line.get_color())
    ax.set_xlabel("total cells")
    ax.set_ylabel("energy (uJ)")
    ax.set_title("Energy vs array size (dotted: best fit)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def grid_heatmap_figure(array: CamArray, tiles: TileConfig | None = None,
                        strategy: Strategy | None = None, query=None):
    """Grid rendering: don't-care cells, active cells, and (when a
    simulation is given) active cells whose evaluation was skipped."""
    from matplotlib.colors import ListedColormap

    classes = np.where(array.active, 1, 0)
    if tiles is not None and strategy is not None and query is not None:
        energized = trace_energized(array, tiles, np.asarray(query, dtype=float), strategy)
        classes = np.where(array.active & ~energized, 2, classes)
    fig, ax = _new_figure((5, 5))
    cmap = ListedColormap(["#f5d742", "#2d6cdf", "#101010"])
    ax.imshow(classes, cmap=cmap, vmin=0, vmax=2, interpolation="nearest", aspect="auto")
    ax.set_xlabel("feature column")
    ax.set_ylabel("row (leaf path)")
    title = "CAM array occupancy"
    if strategy is not None:
        title += f" ({strategy.value}: dark = skipped)"
    ax.set_title(title)
    fig.tight_layout()
    return fig


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

def emit_report(tables: dict, output_dir, figures: dict | None = None) -> list[str]:
    """Write tables as CSV and figures as SVG into output_dir.

    All tables are validated as non-empty before anything is written, so a
    bad report never leaves partial files behind.
    """
    for name, (header, rows) in tables.items():
        if not rows:
            raise ValueError(f"table {name!r} is empty; nothing written")
    os.makedirs(output_dir, exist_ok=True)
    written = []
    for name, (header, rows) in tables.items():
        path = os.path.join(output_dir, f"{name}.csv")
        write_csv(path, rows, header)
        written.append(path)
    for name, fig in (figures or {}).items():
        path = os.path.join(output_dir, f"{name}.svg")
        fig.savefig(path, format="svg", metadata={"Date": None})
        written.append(path)
    return written


_RUNNERS = {
    "sweep": sweep_sparsity,
    "corner": corner_analysis,
    "scale": scalability,
    "tiles": tile_orientation,
    "datasets": dataset_eval,
}


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Dispatch an ExperimentSpec to its runner and emit its report."""
    if spec.kind == "balance":
        result = balance_correlation(spec)
    else:
        result = _RUNNERS[spec.kind](spec, spec.params())
    emit_report(result.tables, spec.output_dir, result.figures)
    return result
