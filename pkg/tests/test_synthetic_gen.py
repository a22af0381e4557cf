import numpy as np
import pytest

from camtree.array_compiler import sparsity
from camtree.synthetic_gen import SparsitySpec, generate, generate_with_empty_fraction


class TestGenerate:
    def test_lambda_zero_all_active(self):
        array = generate(SparsitySpec(0.0, 0.0, 1, 12, 9))
        assert array.active.all()

    def test_lambda_one_all_dontcare(self):
        array = generate(SparsitySpec(1.0, 0.0, 1, 12, 9))
        assert not array.active.any()

    def test_expected_sparsity_at_scale(self):
        # Monte-Carlo check on a 160x160 grid; the band threshold is set so
        # the dontcare fraction has mean lambda.
        for seed in range(10):
            array = generate(SparsitySpec(0.6, 0.0, seed, 160, 160))
            assert abs(sparsity(array) - 0.6) <= 0.02

    def test_mu_does_not_shift_sparsity(self):
        a = generate(SparsitySpec(0.5, 0.0, 3, 80, 80))
        b = generate(SparsitySpec(0.5, 2.5, 3, 80, 80))
        assert abs(sparsity(a) - sparsity(b)) <= 0.05

    def test_deterministic(self):
        a = generate(SparsitySpec(0.4, 0.0, 7, 20, 30))
        b = generate(SparsitySpec(0.4, 0.0, 7, 20, 30))
        assert np.array_equal(a.lo, b.lo) and np.array_equal(a.hi, b.hi)
        assert np.array_equal(a.active, b.active)

    def test_active_intervals_are_proper(self):
        array = generate(SparsitySpec(0.3, 0.0, 5, 40, 40))
        act = array.active
        assert np.all(array.lo[act] < array.hi[act])
        assert np.all(array.lo[act] >= 0.0) and np.all(array.hi[act] <= 1.0)

    def test_labels_round_robin(self):
        array = generate(SparsitySpec(0.5, 0.0, 0, 6, 4))
        assert array.row_labels.tolist() == [0, 1, 0, 1, 0, 1]

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            SparsitySpec(1.5, 0.0, 0, 4, 4)
        with pytest.raises(ValueError):
            SparsitySpec(0.5, 0.0, 0, 0, 4)


class TestExactFraction:
    def test_exact_counts(self):
        a = generate_with_empty_fraction(0.95, 4, 10, 1)
        assert int((~a.active).sum()) == 38  # round(0.95 * 40)
        b = generate_with_empty_fraction(0.8647, 64, 135, 1)
        assert int((~b.active).sum()) == 7471  # round(0.8647 * 8640)

    def test_zero_target_all_active(self):
        array = generate_with_empty_fraction(0.0, 5, 7, 2)
        assert array.active.all()

    def test_deterministic(self):
        a = generate_with_empty_fraction(0.4, 12, 12, 9)
        b = generate_with_empty_fraction(0.4, 12, 12, 9)
        assert np.array_equal(a.active, b.active) and np.array_equal(a.lo, b.lo)

    def test_target_validation(self):
        with pytest.raises(ValueError):
            generate_with_empty_fraction(1.2, 4, 4, 0)
