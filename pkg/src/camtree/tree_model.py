"""Binary decision trees: validation, prediction, generation, shape metrics.

Trees are the unit that gets compiled onto CAM hardware. A tree is a flat
collection of nodes with dense ids (root is always id 0); split nodes route
a sample left when ``sample[feature] <= threshold``, right otherwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TreeNode",
    "TreeModel",
    "TreeSchemaError",
    "TreeStructureError",
    "load_tree",
    "loads_tree",
    "serialize",
    "predict",
    "balance",
    "random_tree",
]


class TreeSchemaError(ValueError):
    """A tree document does not conform to the interchange schema."""


class TreeStructureError(ValueError):
    """A tree document parses but is not a single consistent binary tree."""


@dataclass(frozen=True)
class TreeNode:
    id: int
    kind: str  # "split" | "leaf"
    feature: int | None = None
    threshold: float | None = None
    left: int | None = None
    right: int | None = None
    class_label: int | None = None

    @property
    def is_leaf(self) -> bool:
        return self.kind == "leaf"


@dataclass(frozen=True)
class TreeModel:
    """An immutable, validated binary decision tree."""

    nodes: tuple[TreeNode, ...]
    n_features: int
    n_classes: int
    metadata: dict = field(default_factory=dict)

    @property
    def root(self) -> TreeNode:
        return self.nodes[0]

    def node(self, node_id: int) -> TreeNode:
        return self.nodes[node_id]

    @property
    def n_leaves(self) -> int:
        return sum(1 for n in self.nodes if n.is_leaf)

    @property
    def n_splits(self) -> int:
        return len(self.nodes) - self.n_leaves

    def leaves_in_order(self) -> list[TreeNode]:
        """Leaves by left-first depth-first visitation from the root."""
        out: list[TreeNode] = []
        stack = [0]
        while stack:
            node = self.nodes[stack.pop()]
            if node.is_leaf:
                out.append(node)
            else:
                stack.append(node.right)  # type: ignore[arg-type]
                stack.append(node.left)  # type: ignore[arg-type]
        return out


# ---------------------------------------------------------------------------
# Interchange JSON
# ---------------------------------------------------------------------------

def _require(doc: dict, key: str, types, where: str):
    if key not in doc:
        raise TreeSchemaError(f"{where}: missing field '{key}'")
    value = doc[key]
    if not isinstance(value, types) or isinstance(value, bool):
        raise TreeSchemaError(f"{where}: field '{key}' has wrong type")
    return value


def _parse_node(raw: dict, index: int) -> TreeNode:
    where = f"nodes[{index}]"
    if not isinstance(raw, dict):
        raise TreeSchemaError(f"{where}: node must be an object")
    node_id = _require(raw, "id", int, where)
    kind = _require(raw, "kind", str, where)
    if kind == "split":
        return TreeNode(
            id=node_id,
            kind="split",
            feature=_require(raw, "feature", int, where),
            threshold=float(_require(raw, "threshold", (int, float), where)),
            left=_require(raw, "left", int, where),
            right=_require(raw, "right", int, where),
        )
    if kind == "leaf":
        return TreeNode(id=node_id, kind="leaf", class_label=_require(raw, "class", int, where))
    raise TreeSchemaError(f"{where}: field 'kind' must be 'split' or 'leaf'")


def loads_tree(document: str | dict) -> TreeModel:
    """Parse and validate a tree-interchange document (JSON text or dict)."""
    doc = json.loads(document) if isinstance(document, str) else document
    if not isinstance(doc, dict):
        raise TreeSchemaError("top level: document must be an object")
    n_features = _require(doc, "n_features", int, "top level")
    n_classes = _require(doc, "n_classes", int, "top level")
    raw_nodes = _require(doc, "nodes", list, "top level")
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise TreeSchemaError("top level: field 'metadata' has wrong type")
    if n_features < 1:
        raise TreeSchemaError("top level: field 'n_features' must be >= 1")
    if n_classes < 1:
        raise TreeSchemaError("top level: field 'n_classes' must be >= 1")
    if not raw_nodes:
        raise TreeSchemaError("top level: field 'nodes' must be non-empty")

    nodes = [_parse_node(raw, i) for i, raw in enumerate(raw_nodes)]
    model = TreeModel(tuple(nodes), n_features, n_classes, dict(metadata))
    _validate_structure(model)
    return model


def load_tree(path) -> TreeModel:
    """Load and validate a tree-interchange JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        return loads_tree(fh.read())


def serialize(model: TreeModel) -> dict:
    """Emit the interchange document for a model (inverse of loads_tree)."""
    raw_nodes = []
    for n in model.nodes:
        if n.is_leaf:
            raw_nodes.append({"id": n.id, "kind": "leaf", "class": n.class_label})
        else:
            raw_nodes.append(
                {
                    "id": n.id,
                    "kind": "split",
                    "feature": n.feature,
                    "threshold": n.threshold,
                    "left": n.left,
                    "right": n.right,
                }
            )
    return {
        "n_features": model.n_features,
        "n_classes": model.n_classes,
        "nodes": raw_nodes,
        "metadata": model.metadata,
    }


def _validate_structure(model: TreeModel) -> None:
    n = len(model.nodes)
    ids = [node.id for node in model.nodes]
    if sorted(ids) != list(range(n)):
        raise TreeStructureError("node ids must be dense 0..n-1 with no duplicates")
    if ids != list(range(n)):
        raise TreeStructureError("nodes must be listed in id order")

    seen: set[int] = set()
    # (node id, per-feature open lower bounds, closed upper bounds)
    lo = [-math.inf] * model.n_features
    hi = [math.inf] * model.n_features
    stack: list[tuple[int, list[float], list[float]]] = [(0, lo, hi)]
    while stack:
        node_id, lo, hi = stack.pop()
        if not 0 <= node_id < n:
            raise TreeStructureError(f"child reference {node_id} is out of range")
        if node_id in seen:
            raise TreeStructureError(f"node {node_id} is referenced more than once (cycle or shared child)")
        seen.add(node_id)
        node = model.nodes[node_id]
        if node.is_leaf:
            if not 0 <= node.class_label < model.n_classes:  # type: ignore[operator]
                raise TreeStructureError(f"leaf {node_id}: class {node.class_label} out of range")
            continue
        if not 0 <= node.feature < model.n_features:  # type: ignore[operator]
            raise TreeStructureError(f"split {node_id}: feature index {node.feature} out of range")
        f, t = node.feature, node.threshold
        if not math.isfinite(t):  # type: ignore[arg-type]
            raise TreeStructureError(f"split {node_id}: threshold must be finite")
        # Left keeps value <= t, right keeps value > t; an empty interval on
        # either side means the branch is unreachable.
        left_hi, right_lo = list(hi), list(lo)
        left_hi[f] = min(hi[f], t)
        right_lo[f] = max(lo[f], t)
        if not lo[f] < left_hi[f]:
            raise TreeStructureError(f"split {node_id}: left branch has empty interval on feature {f}")
        if not right_lo[f] < hi[f]:
            raise TreeStructureError(f"split {node_id}: right branch has empty interval on feature {f}")
        stack.append((node.right, right_lo, hi))  # type: ignore[arg-type]
        stack.append((node.left, lo, left_hi))  # type: ignore[arg-type]

    if len(seen) != n:
        orphans = sorted(set(range(n)) - seen)
        raise TreeStructureError(f"orphan nodes not reachable from root: {orphans}")


# ---------------------------------------------------------------------------
# Inference
# ---------------------------------------------------------------------------

def predict(model: TreeModel, sample) -> int:
    """Class label of the unique leaf reached by a sample.

    Routing is ``sample[feature] <= threshold`` goes left, else right.
    """
    sample = np.asarray(sample, dtype=float)
    if sample.shape != (model.n_features,):
        raise ValueError(f"sample has length {sample.shape}, expected ({model.n_features},)")
    node = model.root
    while not node.is_leaf:
        node = model.nodes[node.left if sample[node.feature] <= node.threshold else node.right]
    return node.class_label  # type: ignore[return-value]


def balance(model: TreeModel) -> int:
    """Absolute node-count difference between the root's two subtrees."""
    if model.root.is_leaf:
        return 0

    def subtree_size(node_id: int) -> int:
        size = 0
        stack = [node_id]
        while stack:
            node = model.nodes[stack.pop()]
            size += 1
            if not node.is_leaf:
                stack.extend((node.left, node.right))  # type: ignore[arg-type]
        return size

    return abs(subtree_size(model.root.left) - subtree_size(model.root.right))


# ---------------------------------------------------------------------------
# Random generation
# ---------------------------------------------------------------------------

def random_tree(
    n_features: int,
    max_depth: int,
    balance_bias: float,
    seed: int,
    n_classes: int = 2,
) -> TreeModel:
    """Grow a random tree whose shape is steered by ``balance_bias``.

    Each split expands both children with probability ``balance_bias`` and
    exactly one (the other becomes a leaf) otherwise, so bias 1 yields the
    complete tree of depth ``max_depth`` and bias 0 a single chain.
    Thresholds are drawn uniformly inside the interval each path still
    allows, which keeps every root-to-leaf path satisfiable.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    if not 0.0 <= balance_bias <= 1.0:
        raise ValueError("balance_bias must be in [0, 1]")
    rng = np.random.default_rng(seed)
    nodes: list[TreeNode] = []

    def grow(depth: int, lo: list[float], hi: list[float]) -> int:
        node_id = len(nodes)
        nodes.append(None)  # type: ignore[arg-type]  # reserve preorder slot
        feasible = [f for f in range(n_features) if np.nextafter(lo[f], hi[f]) < hi[f]]
        if depth >= max_depth or not feasible:
            nodes[node_id] = TreeNode(
                id=node_id, kind="leaf", class_label=int(rng.integers(n_classes))
            )
            return node_id
        f = int(feasible[rng.integers(len(feasible))])
        t = float(rng.uniform(lo[f], hi[f]))
        while not lo[f] < t < hi[f]:
            t = float(np.nextafter(t, hi[f]) if t <= lo[f] else np.nextafter(t, lo[f]))
        expand_left = expand_right = True
        if rng.random() >= balance_bias:
            expand_left = bool(rng.random() < 0.5)
            expand_right = not expand_left
        left_hi, right_lo = list(hi), list(lo)
        left_hi[f], right_lo[f] = t, t
        left = grow(depth + 1 if expand_left else max_depth, lo, left_hi)
        right = grow(depth + 1 if expand_right else max_depth, right_lo, hi)
        nodes[node_id] = TreeNode(
            id=node_id, kind="split", feature=f, threshold=t, left=left, right=right
        )
        return node_id

    unit = [0.0] * n_features, [1.0] * n_features
    grow(0, *unit)
    model = TreeModel(
        tuple(nodes),
        n_features,
        n_classes,
        {"source": "random_tree", "seed": int(seed), "max_depth": int(max_depth), "balance_bias": float(balance_bias)},
    )
    _validate_structure(model)
    return model
