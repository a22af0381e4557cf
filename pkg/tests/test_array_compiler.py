import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from camtree.array_compiler import (
    CamArray,
    InconsistentTreeError,
    array_from_document,
    array_to_document,
    classify,
    compile_tree,
    match_all_rows,
    match_row,
    quantize,
    sparsity,
    unit_bounds,
)
from camtree.tree_model import TreeModel, TreeNode, loads_tree, predict, random_tree

from test_tree_model import SINGLE_LEAF, STUMP


def stump_array(n_features=4, threshold=0.5):
    doc = json.loads(json.dumps(STUMP))
    doc["n_features"] = n_features
    doc["nodes"][0]["threshold"] = threshold
    return compile_tree(loads_tree(doc), unit_bounds(n_features))


class TestCompile:
    def test_single_leaf(self):
        array = compile_tree(loads_tree(SINGLE_LEAF), unit_bounds(4))
        assert (array.n_rows, array.n_cols) == (1, 4)
        assert not array.active.any()
        assert sparsity(array) == 1.0
        assert array.row_labels.tolist() == [1]

    def test_stump_cells(self):
        array = stump_array(threshold=0.5)
        assert (array.n_rows, array.n_cols) == (2, 4)
        left = array.cell(0, 0)
        right = array.cell(1, 0)
        assert (left.lo, left.hi) == (-math.inf, 0.5)
        assert (right.lo, right.hi) == (0.5, math.inf)
        for col in range(1, 4):
            assert not array.active[0, col] and not array.active[1, col]
        assert array.row_labels.tolist() == [0, 1]  # left-first row order

    def test_row_order_is_left_first_dfs(self):
        model = random_tree(3, 4, 1.0, seed=3)
        array = compile_tree(model, unit_bounds(3))
        leaf_labels = [leaf.class_label for leaf in model.leaves_in_order()]
        assert array.row_labels.tolist() == leaf_labels

    def test_inconsistent_tree_rejected(self):
        # Built directly so load-time validation cannot catch it.
        model = TreeModel(
            nodes=(
                TreeNode(0, "split", feature=0, threshold=0.5, left=1, right=2),
                TreeNode(1, "split", feature=0, threshold=0.7, left=3, right=4),
                TreeNode(2, "leaf", class_label=0),
                TreeNode(3, "leaf", class_label=0),
                TreeNode(4, "leaf", class_label=1),
            ),
            n_features=1,
            n_classes=2,
        )
        with pytest.raises(InconsistentTreeError):
            compile_tree(model, unit_bounds(1))

    def test_bounds_validation(self):
        model = loads_tree(SINGLE_LEAF)
        with pytest.raises(ValueError):
            compile_tree(model, [[0.0, 1.0]] * 3)  # wrong count
        with pytest.raises(ValueError):
            compile_tree(model, [[1.0, 0.0]] * 4)  # min >= max


class TestMatchRow:
    def test_all_dontcare_matches_anything(self):
        array = compile_tree(loads_tree(SINGLE_LEAF), unit_bounds(4))
        assert match_row(array, 0, [0.0, 0.5, 1.0, 123.0])

    def test_stump_boundary(self):
        array = stump_array(n_features=1)
        assert match_row(array, 0, [0.5])
        assert not match_row(array, 1, [0.5])

    def test_errors(self):
        array = stump_array(n_features=1)
        with pytest.raises(IndexError):
            match_row(array, 5, [0.5])
        with pytest.raises(ValueError):
            match_row(array, 0, [0.5, 0.5])

    def test_partition_property_against_predict(self):
        # Exactly one matching row per in-domain query, labelled like the
        # tree's own prediction.
        rng = np.random.default_rng(11)
        model = random_tree(5, 5, 0.7, seed=8)
        array = compile_tree(model, unit_bounds(5))
        for _ in range(100):
            query = rng.random(5)
            matches = [r for r in range(array.n_rows) if match_row(array, r, query)]
            assert len(matches) == 1
            assert array.row_labels[matches[0]] == predict(model, query)


class TestQuantize:
    def test_grid_step_256(self):
        array = stump_array(n_features=1, threshold=0.37)
        q = quantize(array, 256)
        step = 1.0 / 255.0
        assert step == pytest.approx(0.00392, abs=5e-6)
        for value in (q.lo[q.active], q.hi[q.active]):
            assert np.allclose(np.round(value * 255) / 255, value, atol=1e-12)

    def test_fixed_point_on_grid(self):
        cells_lo = np.array([[0.3]])
        cells_hi = np.array([[0.7]])
        array = CamArray(cells_lo, cells_hi, np.array([[True]]), np.array([0]), unit_bounds(1))
        q = quantize(array, 11)
        assert q.lo[0, 0] == pytest.approx(0.3, abs=1e-12)
        assert q.hi[0, 0] == pytest.approx(0.7, abs=1e-12)

    def test_rounding_widens(self):
        array = CamArray(np.array([[0.3001]]), np.array([[0.6999]]),
                         np.array([[True]]), np.array([0]), unit_bounds(1))
        q = quantize(array, 11)
        assert q.lo[0, 0] == pytest.approx(0.3, abs=1e-12)
        assert q.hi[0, 0] == pytest.approx(0.7, abs=1e-12)

    def test_infinite_bounds_snap_to_domain(self):
        array = stump_array(n_features=1, threshold=0.4)
        q = quantize(array, 256)
        assert q.lo[0, 0] == 0.0
        assert q.hi[1, 0] == 1.0

    def test_containment_on_random_queries(self):
        rng = np.random.default_rng(5)
        for seed in range(10):
            model = random_tree(4, 5, float(rng.random()), seed=seed)
            array = compile_tree(model, unit_bounds(4))
            q = quantize(array, 16)  # coarse grid widens a lot
            for _ in range(50):
                query = rng.random(4)
                original = match_all_rows(array, query)
                widened = match_all_rows(q, query)
                assert np.all(widened[original])

    @given(lo=st.floats(0.0, 0.98), width=st.floats(0.001, 0.5), levels=st.integers(2, 300))
    @settings(max_examples=200, deadline=None)
    def test_quantized_interval_contains_original(self, lo, width, levels):
        hi = min(lo + width, 1.0)
        array = CamArray(np.array([[lo]]), np.array([[hi]]),
                         np.array([[True]]), np.array([0]), unit_bounds(1))
        q = quantize(array, levels)
        assert q.lo[0, 0] <= lo + 1e-12
        assert q.hi[0, 0] >= hi - 1e-12


class TestSparsity:
    def test_all_dontcare(self):
        array = compile_tree(loads_tree(SINGLE_LEAF), unit_bounds(4))
        assert sparsity(array) == 1.0

    def test_stump(self):
        assert sparsity(stump_array(n_features=4)) == 0.75  # 6 of 8 cells

    def test_permutation_invariant(self):
        rng = np.random.default_rng(2)
        array = stump_array(n_features=4)
        rp = rng.permutation(array.n_rows)
        cp = rng.permutation(array.n_cols)
        permuted = CamArray(array.lo[np.ix_(rp, cp)], array.hi[np.ix_(rp, cp)],
                            array.active[np.ix_(rp, cp)], array.row_labels[rp],
                            array.feature_bounds[cp])
        assert sparsity(permuted) == sparsity(array)


class TestInterchange:
    def test_roundtrip_with_infinities(self):
        array = stump_array(n_features=3)
        doc = array_to_document(array)
        assert doc["cells"][0][0] == {"kind": "a", "lo": "-inf", "hi": 0.5}
        back = array_from_document(json.loads(json.dumps(doc)))
        assert np.array_equal(back.lo, array.lo)
        assert np.array_equal(back.hi, array.hi)
        assert np.array_equal(back.active, array.active)
        assert np.array_equal(back.row_labels, array.row_labels)
        assert np.array_equal(back.feature_bounds, array.feature_bounds)

    def test_bad_kind_rejected(self):
        doc = array_to_document(stump_array(n_features=1))
        doc["cells"][0][0]["kind"] = "q"
        with pytest.raises(ValueError, match="kind"):
            array_from_document(doc)


class TestClassify:
    def test_lowest_row_wins(self):
        lo = np.array([[0.0], [0.0]])
        hi = np.array([[1.0], [1.0]])
        array = CamArray(lo, hi, np.ones((2, 1), dtype=bool), np.array([7, 3]), unit_bounds(1))
        assert classify(array, [0.5]) == 7

    def test_no_match_returns_none(self):
        array = CamArray(np.array([[0.6]]), np.array([[0.9]]),
                         np.array([[True]]), np.array([1]), unit_bounds(1))
        assert classify(array, [0.1]) is None
