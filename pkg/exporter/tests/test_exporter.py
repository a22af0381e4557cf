import json
import os

import numpy as np
import pytest

from camtree.array_compiler import compile_tree, sparsity
from camtree.tree_model import load_tree, predict
from camtree_exporter.export import DEFAULT_DEPTHS, corpus_export, train_export


@pytest.fixture(scope="module")
def iris_bundle(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("iris"))
    metrics = train_export("iris", out)
    return out, metrics


class TestTrainExport:
    def test_iris_bundle_files(self, iris_bundle):
        out, metrics = iris_bundle
        for kind in ("tree", "split", "metrics"):
            assert os.path.exists(os.path.join(out, f"iris_{kind}.json"))
        assert metrics["test_accuracy"] == 1.0
        assert 8 <= metrics["n_leaves"] <= 12

    def test_tree_validates_under_consumer_loader(self, iris_bundle):
        out, _ = iris_bundle
        model = load_tree(os.path.join(out, "iris_tree.json"))
        assert model.n_features == 4
        assert model.n_classes == 3

    def test_split_is_70_30(self, iris_bundle):
        out, _ = iris_bundle
        split = json.load(open(os.path.join(out, "iris_split.json")))
        assert len(split["samples"]) == 45  # 30% of 150
        assert len(split["labels"]) == 45

    def test_scaling_and_bounds(self, iris_bundle):
        out, metrics = iris_bundle
        split = json.load(open(os.path.join(out, "iris_split.json")))
        samples = np.asarray(split["samples"])
        bounds = np.asarray(metrics["feature_bounds"])
        assert np.array_equal(bounds, np.tile([0.0, 1.0], (4, 1)))
        # held-out samples are scaled with train statistics, so they may
        # poke slightly outside [0, 1] but must sit near it
        assert samples.min() > -0.5 and samples.max() < 1.5

    def test_predictions_agree_with_consumer_predict(self, iris_bundle):
        out, metrics = iris_bundle
        model = load_tree(os.path.join(out, "iris_tree.json"))
        split = json.load(open(os.path.join(out, "iris_split.json")))
        for sample, expect in zip(split["samples"], metrics["test_predictions"]):
            assert predict(model, sample) == expect

    def test_accuracy_matches_recorded_predictions(self, iris_bundle):
        out, metrics = iris_bundle
        split = json.load(open(os.path.join(out, "iris_split.json")))
        acc = np.mean([p == t for p, t in zip(metrics["test_predictions"], split["labels"])])
        assert acc == pytest.approx(metrics["test_accuracy"])

    def test_unknown_dataset(self, tmp_path):
        with pytest.raises(ValueError, match="unknown dataset"):
            train_export("mnist", str(tmp_path))

    def test_breast_cancer_band(self, tmp_path):
        metrics = train_export("breast_cancer", str(tmp_path),
                               max_depth=DEFAULT_DEPTHS["breast_cancer"])
        assert abs(metrics["test_accuracy"] - 0.9415) <= 0.03
        model = load_tree(os.path.join(str(tmp_path), "breast_cancer_tree.json"))
        arr = compile_tree(model, np.tile([0.0, 1.0], (30, 1)))
        assert abs(sparsity(arr) - 0.89) <= 0.02

    def test_deterministic_bytes(self, tmp_path):
        a, b = str(tmp_path / "a"), str(tmp_path / "b")
        train_export("iris", a)
        train_export("iris", b)
        for kind in ("tree", "split", "metrics"):
            assert open(os.path.join(a, f"iris_{kind}.json"), "rb").read() == \
                   open(os.path.join(b, f"iris_{kind}.json"), "rb").read()


class TestCorpusExport:
    def test_count_and_validity(self, tmp_path):
        paths = corpus_export(40, str(tmp_path), max_depth=6, seed=1)
        assert len(paths) == 40
        for path in paths[:5]:
            model = load_tree(path)
            assert model.n_features == 5

    def test_deterministic(self, tmp_path):
        a, b = str(tmp_path / "a"), str(tmp_path / "b")
        corpus_export(30, a, max_depth=5, seed=3)
        corpus_export(30, b, max_depth=5, seed=3)
        assert open(os.path.join(a, "tree_0000.json"), "rb").read() == \
               open(os.path.join(b, "tree_0000.json"), "rb").read()

    def test_minimum_size(self, tmp_path):
        with pytest.raises(ValueError, match="at least 30"):
            corpus_export(10, str(tmp_path))

    def test_balance_sparsity_direction(self, tmp_path):
        # Desk-scale check that trained trees show the negative
        # balance-sparsity relationship the full corpus test relies on.
        from camtree.experiments import ExperimentSpec, balance_correlation

        corpus_export(60, str(tmp_path), max_depth=10, seed=0)
        res = balance_correlation(ExperimentSpec(kind="balance", corpus_dir=str(tmp_path)))
        assert res.values["r"] < 0
