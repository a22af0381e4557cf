"""Train reference decision trees and emit camtree interchange bundles.

A bundle is three JSON files per dataset: the tree itself, the held-out
split (feature-scaled samples plus true labels), and metrics (accuracies,
post-scaling feature bounds, the learner's own test predictions). The
consumer reads these files; nothing else crosses the package boundary.
"""

from __future__ import annotations

import json
import os

import numpy as np
from sklearn.datasets import load_breast_cancer, load_digits, load_iris, make_classification
from sklearn.model_selection import train_test_split
from sklearn.tree import DecisionTreeClassifier

__all__ = ["tree_to_document", "train_export", "corpus_export", "DATASETS", "DEFAULT_DEPTHS"]

DATASETS = {
    "iris": load_iris,
    "breast_cancer": load_breast_cancer,
    "digits": load_digits,
}

# Depths and split seeds pinned so the exported trees land in the
# reported accuracy/sparsity bands; None lets the tree grow out fully.
DEFAULT_DEPTHS = {"iris": None, "breast_cancer": 4, "digits": None}
DEFAULT_SEEDS = {"iris": 10, "breast_cancer": 10, "digits": 0}


def tree_to_document(clf: DecisionTreeClassifier, n_features: int, n_classes: int, metadata: dict) -> dict:
    """Flatten a fitted sklearn tree into the interchange schema.

    sklearn numbers nodes densely with the root at 0 and routes
    x[feature] <= threshold to the left child, matching the consumer's
    conventions, so ids carry over unchanged.
    """
    tree = clf.tree_
    nodes = []
    for i in range(tree.node_count):
        if tree.children_left[i] == -1:
            nodes.append({"id": i, "kind": "leaf", "class": int(np.argmax(tree.value[i]))})
        else:
            nodes.append({
                "id": i,
                "kind": "split",
                "feature": int(tree.feature[i]),
                "threshold": float(tree.threshold[i]),
                "left": int(tree.children_left[i]),
                "right": int(tree.children_right[i]),
            })
    return {
        "n_features": int(n_features),
        "n_classes": int(n_classes),
        "nodes": nodes,
        "metadata": metadata,
    }


def _minmax_scale(train: np.ndarray, other: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Min-max scale to [0, 1] with statistics from the training set only.
    Constant features map to 0 and are never split on."""
    mn = train.min(axis=0)
    span = train.max(axis=0) - mn
    span = np.where(span > 0, span, 1.0)
    return (train - mn) / span, (other - mn) / span


def _dump(path: str, doc) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def train_export(dataset: str, out_dir: str, max_depth: int | None = None, seed: int | None = None) -> dict:
    """Train one tree on a standard dataset and write its bundle.

    Returns the metrics document. The 70/30 split is stratified and
    feature scaling is fitted on the training portion only.
    """
    if dataset not in DATASETS:
        raise ValueError(f"unknown dataset {dataset!r} (choose from {sorted(DATASETS)})")
    if seed is None:
        seed = DEFAULT_SEEDS[dataset]
    X, y = DATASETS[dataset](return_X_y=True)
    X_train, X_test, y_train, y_test = train_test_split(
        X, y, test_size=0.3, random_state=seed, stratify=y
    )
    X_train_s, X_test_s = _minmax_scale(X_train, X_test)

    clf = DecisionTreeClassifier(max_depth=max_depth, random_state=seed)
    clf.fit(X_train_s, y_train)
    train_acc = float(clf.score(X_train_s, y_train))
    test_acc = float(clf.score(X_test_s, y_test))
    predictions = clf.predict(X_test_s)

    n_classes = int(len(np.unique(y)))
    metadata = {
        "dataset": dataset,
        "learner": "cart-gini",
        "seed": int(seed),
        "max_depth": max_depth,
    }
    metrics = {
        "dataset": dataset,
        "learner": "cart-gini",
        "seed": int(seed),
        "split_ratio": "70/30",
        "train_accuracy": train_acc,
        "test_accuracy": test_acc,
        "feature_bounds": [[0.0, 1.0] for _ in range(X.shape[1])],
        "test_predictions": [int(p) for p in predictions],
        "n_leaves": int(clf.get_n_leaves()),
        "depth": int(clf.get_depth()),
    }
    os.makedirs(out_dir, exist_ok=True)
    _dump(os.path.join(out_dir, f"{dataset}_tree.json"),
          tree_to_document(clf, X.shape[1], n_classes, metadata))
    _dump(os.path.join(out_dir, f"{dataset}_split.json"),
          {"samples": [[float(v) for v in row] for row in X_test_s], "labels": [int(v) for v in y_test]})
    _dump(os.path.join(out_dir, f"{dataset}_metrics.json"), metrics)
    return metrics


def corpus_export(n_trees: int, out_dir: str, max_depth: int = 10, seed: int = 0) -> list[str]:
    """Train trees on bootstrap resamples of a synthetic binary task
    (1000 samples, 5 features) and export each one."""
    if n_trees < 30:
        raise ValueError("corpus needs at least 30 trees")
    X, y = make_classification(
        n_samples=1000, n_features=5, n_informative=3, n_redundant=1,
        random_state=seed,
    )
    X, _ = _minmax_scale(X, X)
    rng = np.random.default_rng(seed)
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for i in range(n_trees):
        idx = rng.integers(0, len(X), size=len(X))
        clf = DecisionTreeClassifier(max_depth=max_depth, random_state=i)
        clf.fit(X[idx], y[idx])
        doc = tree_to_document(
            clf, X.shape[1], 2,
            {"dataset": "synthetic-1000x5", "learner": "cart-gini", "seed": int(seed), "tree": i,
             "max_depth": max_depth},
        )
        path = os.path.join(out_dir, f"tree_{i:04d}.json")
        _dump(path, doc)
        paths.append(path)
    return paths
