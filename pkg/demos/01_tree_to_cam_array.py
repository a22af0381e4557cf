"""From a decision tree to a CAM array, step by step.

A binary decision tree classifies a sample by walking feature comparisons
root-to-leaf. A content-addressable memory does the same job in one shot:
every root-to-leaf path becomes one row of interval cells, and a query
matches the single row whose intervals all contain it. Features a path
never tests become don't-care cells, and those are where all the energy
savings in the processing strategies come from.
"""

import numpy as np

from camtree import (
    balance,
    compile_tree,
    match_row,
    predict,
    quantize,
    random_tree,
    sparsity,
    unit_bounds,
)

rng = np.random.default_rng(7)

# A small random tree over 4 features on the unit box. balance_bias
# controls the shape: 1.0 grows complete trees, 0.0 grows chains.
model = random_tree(n_features=4, max_depth=3, balance_bias=0.7, seed=42)
print(f"tree: {len(model.nodes)} nodes, {model.n_leaves} leaves, balance {balance(model)}")

sample = rng.random(4)
print(f"sample {np.round(sample, 3)} -> class {predict(model, sample)}")

# Compile: one row per leaf, one column per feature.
array = compile_tree(model, unit_bounds(4))
print(f"\ncompiled array: {array.n_rows} rows x {array.n_cols} cols, "
      f"sparsity {sparsity(array):.2f}")

for r in range(array.n_rows):
    cells = []
    for c in range(array.n_cols):
        cell = array.cell(r, c)
        cells.append(f"({cell.lo:+.2f},{cell.hi:+.2f}]" if cell.is_active else "     X     ")
    print(f"  row {r} (class {array.row_labels[r]}): " + " ".join(cells))

# Exactly one row matches any in-domain query, and it carries the same
# class the tree itself predicts.
matches = [r for r in range(array.n_rows) if match_row(array, r, sample)]
print(f"\nmatching rows for the sample: {matches} "
      f"(class {array.row_labels[matches[0]]}, same as predict)")

# Hardware stores bounds at finite precision. Quantization snaps interval
# ends onto a uniform grid, only ever widening them, so the matched set
# can only grow; classification picks the lowest matching row.
quantized = quantize(array, levels=256)
print(f"quantized to 256 levels: grid step 1/255 = {1 / 255:.5f}, "
      f"sparsity unchanged at {sparsity(quantized):.2f}")
