"""Why tree shape matters: balance predicts array sparsity.

Balance is the absolute node-count difference between the root's two
subtrees. Across a corpus of random trees with shapes spanning chains to
complete trees, more balanced trees compile to sparser arrays (each leaf
path is shorter, so each row constrains fewer features). The correlation
is the lever that makes shape-aware processing worth it: sparser arrays
mean more skippable work.
"""

from camtree.experiments import ExperimentSpec, run_experiment

spec = ExperimentSpec(
    kind="balance", n_trees=500, max_depth=10, n_features=5,
    output_dir="demo_reports/balance",
)
result = run_experiment(spec)

r, p, n = result.values["r"], result.values["p"], result.values["n"]
print(f"corpus: {n} random trees, depth <= 10, 5 features")
print(f"Pearson r = {r:.3f}  (p = {p:.2e})")
print("negative: balanced trees -> shorter paths -> more don't-care cells")

rows = result.tables["balance_correlation"][1]
by_balance = sorted(rows, key=lambda row: row["balance"])
lo, hi = by_balance[: n // 4], by_balance[-n // 4:]
mean = lambda rs, k: sum(row[k] for row in rs) / len(rs)
print(f"\nmost balanced quartile:  balance {mean(lo, 'balance'):6.1f}, "
      f"mean sparsity {mean(lo, 'sparsity'):.3f}")
print(f"least balanced quartile: balance {mean(hi, 'balance'):6.1f}, "
      f"mean sparsity {mean(hi, 'sparsity'):.3f}")
print("\nscatter plot: demo_reports/balance/balance_vs_sparsity.svg")
