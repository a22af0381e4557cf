"""End-to-end: trained models on the simulated hardware.

Consumes the interchange bundles produced by the exporter package
(`camtree-export datasets --out models`): a trained tree, its held-out
split, and metrics. Each tree is compiled, quantized to 256 conductance
levels, and run through its dataset's tile shape under all four
strategies; accuracy is measured on the held-out samples against the true
labels. Run from the repository root after generating models/.
"""

import os
import sys

from camtree.experiments import ExperimentSpec, run_experiment

models_dir = sys.argv[1] if len(sys.argv) > 1 else "models"
if not os.path.exists(os.path.join(models_dir, "iris_tree.json")):
    raise SystemExit(
        f"no bundles under {models_dir!r}; run `camtree-export datasets --out {models_dir}` first"
    )

spec = ExperimentSpec(kind="datasets", models_dir=models_dir,
                      output_dir="demo_reports/datasets")
result = run_experiment(spec)

print(f"{'dataset':14s} {'array':>9s} {'sparsity':>8s} {'tree acc':>9s} {'CAM acc':>8s}")
for name, s in result.values["summary"].items():
    print(f"{name:14s} {s['n_rows']:4d}x{s['n_cols']:<4d} {s['sparsity']:8.4f} "
          f"{s['exporter_test_accuracy']:9.4f} {s['accuracy']:8.4f}")

rows = result.tables["dataset_eval"][1]
print(f"\n{'dataset':14s} {'strategy':12s} {'energy uJ':>10s}")
for row in rows:
    print(f"{row['experiment'].split(':', 1)[1]:14s} {row['strategy']:12s} {row['energy_uJ']:10.4f}")
print("\nCSV + figures in demo_reports/datasets")
