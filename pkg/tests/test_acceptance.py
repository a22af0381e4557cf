"""Acceptance suite: one test (and one printed PASS/FAIL line) per criterion.

Criteria 1-10 run on synthetic arrays and random trees only. Criteria 11
and 12 need the trained-model bundles and the exporter package; they skip
with a reason when those are absent. Run with ``pytest -s
tests/test_acceptance.py`` to see the per-criterion lines.
"""

import importlib.util
import json
import math
import os

import numpy as np
import pytest

from camtree.array_compiler import (
    classify,
    compile_tree,
    match_all_rows,
    match_row,
    normalize_queries,
    quantize,
    sparsity,
    unit_bounds,
)
from camtree.energy_model import default_params, gops_per_watt
from camtree.experiments import (
    ExperimentSpec,
    balance_correlation,
    corner_analysis,
    run_strategies,
    scalability,
    sweep_sparsity,
    tile_orientation,
)
from camtree.synthetic_gen import SparsitySpec, generate
from camtree.tile_engine import Strategy, TileConfig, simulate
from camtree.tree_model import load_tree, predict, random_tree

PARAMS = default_params()
MODELS_DIR = os.path.join(os.path.dirname(__file__), "..", "models")
HAVE_BUNDLES = all(
    os.path.exists(os.path.join(MODELS_DIR, f"{name}_{kind}.json"))
    for name in ("iris", "breast_cancer", "digits")
    for kind in ("tree", "split", "metrics")
)
HAVE_EXPORTER = importlib.util.find_spec("camtree_exporter") is not None


def report(criterion, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
    assert ok, f"criterion {criterion}: {detail}"


# ---------------------------------------------------------------------------
# Shared runs
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def randomized_cases():
    """~1000 randomized (array, tile, query) runs across the lambda grid,
    with per-run reports for all four strategies and the per-row oracle."""
    rng = np.random.default_rng(20240901)
    lambdas = [round(0.1 * i, 1) for i in range(11)]
    cases = []
    for i in range(1012):
        lam = lambdas[i % len(lambdas)]
        rows = int(rng.integers(4, 33))
        cols = int(rng.integers(4, 33))
        tiles = TileConfig(int(rng.integers(1, rows + 1)), int(rng.integers(1, cols + 1)))
        array = generate(SparsitySpec(lam, 0.0, 10_000 + i, rows, cols))
        queries = rng.random((int(rng.integers(1, 3)), cols))
        reports = run_strategies(array, tiles, queries, PARAMS, lam=lam)
        oracle = [
            sorted(r for r in range(array.n_rows) if match_row(array, r, q)) for q in queries
        ]
        cases.append((array, tiles, reports, oracle))
    return cases


@pytest.fixture(scope="module")
def sweep_result(tmp_path_factory):
    return sweep_sparsity(ExperimentSpec(kind="sweep"))


# ---------------------------------------------------------------------------
# Primary criteria
# ---------------------------------------------------------------------------

def test_criterion_01_oracle_equivalence(randomized_cases):
    bad = 0
    for _, _, reports, oracle in randomized_cases:
        for rep in reports.values():
            if [sorted(m) for m in rep.matched_rows] != oracle:
                bad += 1
    report(1, bad == 0,
           f"matched rows of all 4 strategies equal the brute-force oracle on "
           f"{len(randomized_cases)} randomized runs ({bad} mismatches)")


def test_criterion_02_work_dominance(randomized_cases, sweep_result):
    cell_bad = energy_bad = 0
    for _, _, reports, _ in randomized_cases:
        c = {s: r.op_counts.cells_energized for s, r in reports.items()}
        e = {s: r.energy_uj for s, r in reports.items()}
        if not (c[Strategy.MONO_SPARSE] <= min(c[Strategy.FEATURE_REORDER], c[Strategy.MONOTONIC_ONLY])
                and max(c[Strategy.FEATURE_REORDER], c[Strategy.MONOTONIC_ONLY]) <= c[Strategy.RAW]):
            cell_bad += 1
        # Energy follows by linearity wherever the strategies walk the same
        # layout; the fr comparison is asserted on the sweep means below.
        if e[Strategy.MONO_SPARSE] > e[Strategy.MONOTONIC_ONLY] + 1e-12 or \
           e[Strategy.MONOTONIC_ONLY] > e[Strategy.RAW] + 1e-12 or \
           e[Strategy.FEATURE_REORDER] > e[Strategy.RAW] + 1e-12:
            energy_bad += 1
    ms = sweep_result.values["ms_energy_by_lambda"]
    fr = sweep_result.values["fr_energy_by_lambda"]
    mean_ok = all(ms[lam] <= fr[lam] for lam in ms)
    report(2, cell_bad == 0 and energy_bad == 0 and mean_ok,
           f"cells dominance exact on every run ({cell_bad} violations), energy dominance exact on "
           f"same-layout chains ({energy_bad} violations), monosparse <= fr energy at every sweep lambda ({mean_ok})")


def test_criterion_03_raw_flatness():
    tiles = TileConfig(24, 48)
    energies = []
    for seed in range(3):
        counts = []
        for lam in [round(0.1 * i, 1) for i in range(1, 10)]:
            array = generate(SparsitySpec(lam, 0.0, seed, 240, 320))
            queries = np.random.default_rng([seed, 7919]).random((1, 320))
            rep = simulate(array, tiles, queries, Strategy.RAW, PARAMS, lam=lam)
            counts.append(rep.op_counts)
            energies.append(rep.energy_uj)
        flat = all(c == counts[0] for c in counts)
        assert flat, f"raw OpCounts varied with lambda at seed {seed}"
    anchor_ok = all(abs(e - 3.77) / 3.77 <= 0.05 for e in energies)
    report(3, anchor_ok,
           f"raw OpCounts bit-identical across lambda; energy {energies[0]:.4f} uJ "
           f"within 5% of the 3.77 uJ anchor")


def test_criterion_04_sweep_gains(sweep_result):
    ms = sweep_result.values["ms_energy_by_lambda"]
    fr = sweep_result.values["fr_energy_by_lambda"]
    raw = {row["lambda"]: row["energy_uJ"]
           for row in sweep_result.tables["sweep_sparsity"][1] if row["strategy"] == "raw"}
    lams = sorted(ms)
    gain_ms = {lam: raw[lam] / ms[lam] for lam in lams}
    gain_fr = {lam: raw[lam] / fr[lam] for lam in lams}
    ok = (
        gain_ms[0.9] >= 10.0
        and gain_fr[0.9] >= 5.0
        and all(gain_ms[lam] > gain_fr[lam] for lam in lams)
        and all(gain_fr[a] <= gain_fr[b] + 1e-9 for a, b in zip(lams, lams[1:]))
    )
    report(4, ok,
           f"lambda=0.9 gains raw/monosparse={gain_ms[0.9]:.1f}x (>=10), raw/fr={gain_fr[0.9]:.1f}x (>=5); "
           f"monosparse gain beats fr gain at every lambda; fr gain non-decreasing")


def test_criterion_05_corner_analysis():
    res = corner_analysis(ExperimentSpec(kind="corner"))
    energies = res.values["energies"]
    lowest = all(
        per[Strategy.MONO_SPARSE] == min(per.values()) for per in energies.values()
    )
    ratio_drift = 0.0
    for corner in ("ff", "ss"):
        for s in energies[corner]:
            ratio = energies[corner][s] / energies[corner][Strategy.RAW]
            ratio_tt = energies["tt"][s] / energies["tt"][Strategy.RAW]
            ratio_drift = max(ratio_drift, abs(ratio - ratio_tt) / abs(ratio_tt))
    report(5, lowest and ratio_drift <= 1e-9,
           f"monosparse lowest in every corner; cross-strategy ratios corner-invariant "
           f"(max relative drift {ratio_drift:.2e})")


def test_criterion_06_scalability():
    res = scalability(ExperimentSpec(kind="scale", tile_rows=40, tile_cols=24))
    ms_fit = res.values["fits"]["monosparse"]["linear_dim"]
    gains = res.values["gains"]
    monotone = all(a <= b + 1e-9 for a, b in zip(gains, gains[1:]))
    # monosparse energy scales with the row count, i.e. the linear array
    # dimension; that is the growth law the fitted-curve claim describes
    raw_fit = res.values["fits"]["raw"]["linear_cells"]
    report(6, ms_fit.r_squared > 0.97 and monotone and raw_fit.r_squared > 0.999999,
           f"monosparse dimension-linear fit R^2={ms_fit.r_squared:.5f} (>0.97); raw exactly linear "
           f"in cell count (R^2={raw_fit.r_squared:.7f}); raw/monosparse gain non-decreasing {['%.1f' % g for g in gains]}")


def test_criterion_07_narrow_tiles():
    spec = ExperimentSpec(kind="tiles", seeds=tuple(range(20)),
                          strategies=(Strategy.MONO_SPARSE,))
    res = tile_orientation(spec)
    cells = res.values["mean_cells_energized"]
    narrow, wide = cells[(48, 24)], cells[(24, 48)]
    report(7, narrow <= wide,
           f"mean monosparse cells energized over 20 seeds: {narrow:.0f} with 24-wide tiles "
           f"<= {wide:.0f} with 48-wide tiles")


def test_criterion_08_gops_arithmetic(sweep_result):
    unit = gops_per_watt(240, 320, 1e-6, 1.0)
    exact = math.isclose(unit, 76.8, rel_tol=1e-12)
    rows = sweep_result.tables["sweep_sparsity"][1]
    by_lam: dict = {}
    for row in rows:
        by_lam.setdefault(row["lambda"], {})[row["strategy"]] = row["gops_per_W"]
    monotone = all(per["monosparse"] >= max(per.values()) - 1e-9 for per in by_lam.values())
    report(8, exact and monotone,
           f"(240*320 / 1us) / 1W = {unit} GOPS/W; monosparse GOPS/W highest at every lambda")


def test_criterion_09_balance_correlation():
    res = balance_correlation(ExperimentSpec(kind="balance", n_trees=500, max_depth=10))
    r, p = res.values["r"], res.values["p"]
    report(9, r < -0.15 and p < 0.01,
           f"balance vs sparsity over 500 random trees: r={r:.3f} (< -0.15), p={p:.2e} (< 0.01)")


def test_criterion_10_quantization_safety():
    rng = np.random.default_rng(77)
    total = agree = 0
    containment = True
    for i in range(20):
        model = random_tree(6, 6, float(rng.random()), seed=900 + i)
        array = compile_tree(model, unit_bounds(6))
        quantized = quantize(array, 256)
        for query in rng.random((500, 6)):
            original = match_all_rows(array, query)
            widened = match_all_rows(quantized, query)
            if not np.all(widened[original]):
                containment = False
            agree += classify(array, query) == classify(quantized, query)
            total += 1
    rate = agree / total
    report(10, rate >= 0.99 and containment,
           f"256-level quantized classification agrees on {rate:.2%} of {total} queries (>=99%); "
           f"match-set containment exact ({containment})")


# ---------------------------------------------------------------------------
# Secondary criteria (need exporter bundles / package)
# ---------------------------------------------------------------------------

needs_bundles = pytest.mark.skipif(not HAVE_BUNDLES, reason="exporter bundles not present under models/")


@pytest.fixture(scope="module")
def dataset_bundles():
    out = {}
    for name in ("iris", "breast_cancer", "digits"):
        model = load_tree(os.path.join(MODELS_DIR, f"{name}_tree.json"))
        with open(os.path.join(MODELS_DIR, f"{name}_split.json")) as fh:
            split = json.load(fh)
        with open(os.path.join(MODELS_DIR, f"{name}_metrics.json")) as fh:
            metrics = json.load(fh)
        bounds = np.asarray(metrics["feature_bounds"], dtype=float)
        array = compile_tree(model, bounds)
        quantized = quantize(array, 256)
        queries = normalize_queries(np.asarray(split["samples"]), bounds, clip=True)
        labels = np.asarray(split["labels"])
        accuracy = float(np.mean([classify(quantized, q) == t for q, t in zip(queries, labels)]))
        out[name] = dict(model=model, split=split, metrics=metrics, array=array,
                         quantized=quantized, accuracy=accuracy, sparsity=sparsity(array))
    return out


@needs_bundles
def test_criterion_11a_iris_accuracy(dataset_bundles):
    acc = dataset_bundles["iris"]["accuracy"]
    report("11a", acc == 1.0, f"iris quantized-array accuracy {acc:.4f} == 100%")


@needs_bundles
@pytest.mark.xfail(
    strict=True,
    reason="unattainable as stated: every leaf path tests >=1 of iris's 4 features, so each of "
    "the L rows of the compiled array has >=1 active cell and sparsity <= 1 - 1/4 = 0.75; the "
    "reported 95% empty cells on a 4x10 array would need 38 of 40 cells empty with >=10 active.",
)
def test_criterion_11b_iris_sparsity(dataset_bundles):
    sp = dataset_bundles["iris"]["sparsity"]
    report("11b", sp >= 0.93, f"iris array sparsity {sp:.4f} >= 0.93")


@needs_bundles
def test_criterion_11c_breast_cancer(dataset_bundles):
    acc = dataset_bundles["breast_cancer"]["accuracy"]
    sp = dataset_bundles["breast_cancer"]["sparsity"]
    ok = abs(acc - 0.9415) <= 0.03 and abs(sp - 0.89) <= 0.02
    report("11c", ok, f"breast-cancer accuracy {acc:.4f} within 3 points of 94.15%, "
                      f"sparsity {sp:.4f} within 0.89 +/- 0.02")


@needs_bundles
def test_criterion_11d_digits(dataset_bundles):
    acc = dataset_bundles["digits"]["accuracy"]
    sp = dataset_bundles["digits"]["sparsity"]
    ok = abs(acc - 0.8426) <= 0.03 and abs(sp - 0.865) <= 0.02
    report("11d", ok, f"digits accuracy {acc:.4f} within 3 points of 84.26%, "
                      f"sparsity {sp:.4f} within 0.865 +/- 0.02")


@needs_bundles
def test_criterion_11e_predict_agreement(dataset_bundles):
    mismatches = total = 0
    for name, bundle in dataset_bundles.items():
        recorded = bundle["metrics"]["test_predictions"]
        for sample, expect in zip(bundle["split"]["samples"], recorded):
            total += 1
            mismatches += predict(bundle["model"], sample) != expect
    report("11e", mismatches == 0,
           f"loaded-tree predict matches the exporter's recorded predictions on "
           f"{total - mismatches}/{total} held-out samples")


@pytest.mark.skipif(not HAVE_EXPORTER, reason="camtree_exporter not installed")
def test_criterion_12_learner_corpus(tmp_path):
    from camtree_exporter.export import corpus_export

    corpus_export(300, str(tmp_path), max_depth=10, seed=0)
    res = balance_correlation(ExperimentSpec(kind="balance", corpus_dir=str(tmp_path)))
    r, p = res.values["r"], res.values["p"]
    report(12, r < 0 and p < 0.01,
           f"trained-tree corpus (300 trees): r={r:.3f} (< 0), p={p:.2e} (< 0.01)")
