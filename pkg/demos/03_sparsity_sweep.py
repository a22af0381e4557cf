"""Energy versus sparsity: the headline comparison.

Sweeps the sparsity control parameter over a 240x320 array processed
through a 24x48 tile, three seeds per point, and prints the mean energy
per strategy. Raw processing is flat by construction (it touches every
cell no matter what's stored); feature reordering pays off only when
arrays are sparse; the combined strategy wins everywhere and its margin
grows with sparsity. CSVs and SVG plots land in demo_reports/sweep.
"""

from camtree.experiments import ExperimentSpec, run_experiment

spec = ExperimentSpec(kind="sweep", output_dir="demo_reports/sweep")
result = run_experiment(spec)

rows = result.tables["sweep_sparsity"][1]
strategies = ["raw", "fr", "mono", "monosparse"]
lambdas = sorted({row["lambda"] for row in rows})

print(f"{'lambda':>6s} " + " ".join(f"{s:>11s}" for s in strategies) + f" {'raw/ms':>7s}")
for lam in lambdas:
    at = {row["strategy"]: row["energy_uJ"] for row in rows if row["lambda"] == lam}
    gain = at["raw"] / at["monosparse"]
    print(f"{lam:6.1f} " + " ".join(f"{at[s]:11.4f}" for s in strategies) + f" {gain:6.1f}x")

print("\nwrote", ", ".join(sorted(result.tables)), "to demo_reports/sweep")
