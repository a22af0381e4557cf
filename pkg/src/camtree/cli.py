"""Command-line front end.

Subcommands: gen, compile, reorder, simulate, experiment, report. Data
goes to files or stdout, diagnostics to stderr. Exit codes: 0 success,
1 validation error, 2 invariant violation inside the experiment harness,
3 I/O error. Identical argv and inputs produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .array_compiler import compile_tree, load_array, quantize, save_array, sparsity
from .energy_model import apply_corner, default_params, load_params
from .experiments import (
    CSV_HEADER,
    ExperimentSpec,
    InvariantViolation,
    emit_report,
    grid_heatmap_figure,
    read_csv,
    run_experiment,
    _line_figure,
)
from .reorder import feature_reorder, map_back, permute_queries
from .synthetic_gen import SparsitySpec, generate, generate_with_empty_fraction
from .tile_engine import Strategy, TileConfig, simulate
from .tree_model import load_tree

CALIBRATION_ENV = "CAMTREE_CALIBRATION"


class CliError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); validation is exit 1
        raise CliError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="camtree", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic array")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="expected dontcare fraction")
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--empty-fraction", type=float, default=None, help="exact dontcare fraction instead of --lambda")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("compile", help="compile a tree JSON into an array JSON")
    p.add_argument("--tree", required=True)
    p.add_argument("--bounds", help="JSON file: [[min,max],...] or metrics JSON with feature_bounds")
    p.add_argument("--unit-bounds", action="store_true", help="use [0,1] for every feature")
    p.add_argument("--levels", type=int, default=None, help="quantize to this many levels")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("reorder", help="apply feature reordering to an array JSON")
    p.add_argument("-a", "--array", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--perm-out", help="where to write the row/col permutations")

    p = sub.add_parser("simulate", help="simulate one strategy; SimReport JSON to stdout")
    p.add_argument("-a", "--array", required=True)
    p.add_argument("--tile", required=True, help="tile shape RxC, e.g. 24x48")
    p.add_argument("--strategy", required=True, choices=[s.value for s in Strategy])
    p.add_argument("--queries", required=True, help="JSON file with query vectors")
    p.add_argument("--calib", default=None)
    p.add_argument("--corner", default=None, choices=["tt", "ff", "ss"])
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="descriptor recorded in the report")

    p = sub.add_parser("experiment", help="run an experiment suite")
    p.add_argument("--kind", choices=["sweep", "corner", "scale", "tiles", "datasets", "balance"])
    p.add_argument("--config", help="JSON file with ExperimentSpec fields")
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--tile", help="tile shape RxC")
    p.add_argument("--lambdas", help="comma-separated lambda grid")
    p.add_argument("--seeds", help="comma-separated seed list")
    p.add_argument("--queries", type=int, dest="n_queries")
    p.add_argument("--calib", dest="calibration")
    p.add_argument("--models-dir")
    p.add_argument("--corpus-dir")
    p.add_argument("--threads", type=int)
    p.add_argument("-o", "--outdir", dest="output_dir")

    p = sub.add_parser("report", help="re-render figures from CSVs or draw array heatmaps")
    p.add_argument("--csv", action="append", default=[], help="CSV written by an experiment")
    p.add_argument("--array", help="array JSON to render as a grid heatmap")
    p.add_argument("--tile", help="tile shape RxC for the skipped-cell overlay")
    p.add_argument("--strategy", choices=[s.value for s in Strategy])
    p.add_argument("--query-seed", type=int, default=0)
    p.add_argument("-o", "--outdir", required=True)
    return parser


def _load_params(path: str | None):
    path = path or os.environ.get(CALIBRATION_ENV)
    return load_params(path) if path else default_params()


def _load_queries(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if isinstance(doc, dict):
        doc = doc.get("queries")
    if not isinstance(doc, list) or not doc:
        raise CliError(f"{path}: expected a non-empty list of query vectors")
    return np.asarray(doc, dtype=float)


def _cmd_gen(args) -> int:
    if (args.lam is None) == (args.empty_fraction is None):
        raise CliError("give exactly one of --lambda or --empty-fraction")
    if args.lam is not None:
        array = generate(SparsitySpec(args.lam, args.mu, args.seed, args.rows, args.cols))
    else:
        array = generate_with_empty_fraction(args.empty_fraction, args.rows, args.cols, args.seed)
    save_array(array, args.output)
    print(f"wrote {args.output} ({array.n_rows}x{array.n_cols}, sparsity {sparsity(array):.4f})", file=sys.stderr)
    return 0


def _cmd_compile(args) -> int:
    model = load_tree(args.tree)
    if args.unit_bounds == bool(args.bounds):
        raise CliError("give exactly one of --bounds or --unit-bounds")
    if args.unit_bounds:
        bounds = np.tile(np.array([0.0, 1.0]), (model.n_features, 1))
    else:
        with open(args.bounds, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        bounds = np.asarray(doc["feature_bounds"] if isinstance(doc, dict) else doc, dtype=float)
    array = compile_tree(model, bounds)
    if args.levels is not None:
        array = quantize(array, args.levels)
    save_array(array, args.output)
    print(f"wrote {args.output} ({array.n_rows}x{array.n_cols}, sparsity {sparsity(array):.4f})", file=sys.stderr)
    return 0


def _cmd_reorder(args) -> int:
    array = load_array(args.array)
    reordered, ro = feature_reorder(array)
    save_array(reordered, args.output)
    if args.perm_out:
        with open(args.perm_out, "w", encoding="utf-8") as fh:
            json.dump(ro.to_document(), fh)
            fh.write("\n")
    print(f"wrote {args.output}", file=sys.stderr)
    return 0


def _cmd_simulate(args) -> int:
    array = load_array(args.array)
    tiles = TileConfig.parse(args.tile)
    strategy = Strategy(args.strategy)
    queries = _load_queries(args.queries)
    params = _load_params(args.calib)
    if args.corner:
        params = apply_corner(params, args.corner)
    if strategy is Strategy.FEATURE_REORDER:
        array, ro = feature_reorder(array)
        report = simulate(array, tiles, permute_queries(queries, ro), strategy, params, lam=args.lam)
        report.matched_rows = [sorted(map_back(m, ro)) for m in report.matched_rows]
    else:
        report = simulate(array, tiles, queries, strategy, params, lam=args.lam)
    json.dump(report.to_document(), sys.stdout)
    sys.stdout.write("\n")
    return 0


def _cmd_experiment(args) -> int:
    doc: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    if args.kind:
        doc["kind"] = args.kind
    if "kind" not in doc:
        raise CliError("experiment kind missing (use --kind or a config file)")
    for name in ("rows", "cols", "n_queries", "calibration", "models_dir", "corpus_dir", "threads", "output_dir"):
        value = getattr(args, name, None)
        if value is not None:
            doc[name] = value
    if args.tile:
        tiles = TileConfig.parse(args.tile)
        doc["tile_rows"], doc["tile_cols"] = tiles.tile_rows, tiles.tile_cols
    if args.lambdas:
        doc["lambdas"] = [float(x) for x in args.lambdas.split(",")]
    if args.seeds:
        doc["seeds"] = [int(x) for x in args.seeds.split(",")]
    if doc.get("calibration") is None and os.environ.get(CALIBRATION_ENV):
        doc["calibration"] = os.environ[CALIBRATION_ENV]
    spec = ExperimentSpec.from_document(doc)
    result = run_experiment(spec)
    for key, value in sorted(result.values.items()):
        print(f"{key}: {value}", file=sys.stderr)
    print(f"report written to {spec.output_dir}", file=sys.stderr)
    return 0


def _cmd_report(args) -> int:
    figures = {}
    tables = {}
    for path in args.csv:
        rows = read_csv(path)
        if not rows:
            raise CliError(f"{path}: empty table")
        name = os.path.splitext(os.path.basename(path))[0]
        tables[name] = (CSV_HEADER, rows)
        if any(r.get("lambda") is not None and r.get("energy_uJ") is not None for r in rows):
            figures[f"{name}_energy"] = _line_figure(
                [r for r in rows if r.get("seed") is None],
                x="lambda", y="energy_uJ", title=name,
                xlabel="sparsity control", ylabel="energy (uJ)", logy=True)
    if args.array:
        array = load_array(args.array)
        tiles = strategy = query = None
        if args.tile and args.strategy:
            tiles = TileConfig.parse(args.tile)
            strategy = Strategy(args.strategy)
            query = np.random.default_rng(args.query_seed).random(array.n_cols)
        name = os.path.splitext(os.path.basename(args.array))[0]
        figures[f"{name}_grid"] = grid_heatmap_figure(array, tiles, strategy, query)
    if not figures and not tables:
        raise CliError("nothing to report: give --csv and/or --array")
    os.makedirs(args.outdir, exist_ok=True)
    for name, fig in figures.items():
        fig.savefig(os.path.join(args.outdir, f"{name}.svg"), format="svg", metadata={"Date": None})
    print(f"report written to {args.outdir}", file=sys.stderr)
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "compile": _cmd_compile,
    "reorder": _cmd_reorder,
    "simulate": _cmd_simulate,
    "experiment": _cmd_experiment,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
